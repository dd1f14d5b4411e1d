// lbro: run, svd, lsqr, experiment and gen subcommands.
// Exit codes: 0 ok, 2 bad input, 3 numerical invariant violated.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lbro/bidiag.hpp"
#include "lbro/diagnostics.hpp"
#include "lbro/errors.hpp"
#include "lbro/experiments.hpp"
#include "lbro/generators.hpp"
#include "lbro/lsqr.hpp"
#include "lbro/matrix_market.hpp"
#include "lbro/svdapprox.hpp"

namespace fs = std::filesystem;
using namespace lbro;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitInvariant = 3;

// numerical invariant failed after a successful run
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string matrix;
    std::string gen;
    Index m = 0;
    Index n = 0;
    std::string b = "ones";
    std::string reorth = "full";
    double eta = 1e-10;
    double delta = 0.0;
    double threshold = 0.0;
    int passes = 2;
    bool no_local = false;
    Index k = 100;
    std::string precision = "double";
    std::string out;
    std::uint64_t seed = 1;
    std::string watch = "largest:4";
    double tol = 0.0;
    double atol = 1e-12;
    bool bundle = false;
    // experiment / gen
    std::string name;
    std::string matrix_dir;
    Index k_small = 250;
    std::string output;
    bool precision_set = false;
};

Precision parse_precision(const std::string& s) { return s == "single" ? Precision::binary32 : Precision::binary64; }

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::logic_error&) {
            throw InvalidInput("bad number '" + item + "'");
        }
        if (used != item.size()) throw InvalidInput("bad number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw InvalidInput("empty value list");
    return out;
}

// kind and the part after ':' of a generator spec such as diag:3,2,1
std::pair<std::string, std::string> split_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) return {spec, ""};
    return {spec.substr(0, colon), spec.substr(colon + 1)};
}

Index dim_or(Index v, Index fallback) { return v > 0 ? v : fallback; }

LinearOperator generate(const std::string& spec, const Options& o, Precision p) {
    const auto [kind, arg] = split_spec(spec);
    if (kind == "section5") {
        return LinearOperator::dense(generate_section5_matrix(dim_or(o.n, 800)), p);
    }
    if (kind == "diag") {
        const std::vector<double> v = parse_list(arg);
        return LinearOperator::sparse(diagonal_sparse(v), p);
    }
    if (kind == "rank1" || kind == "random") {
        const Index m = dim_or(o.m, 10);
        const Index n = dim_or(o.n, 6);
        if (m < n) throw DimensionError("generator needs m >= n");
        return LinearOperator::dense(kind == "rank1" ? random_rank1(m, n, o.seed) : random_dense(m, n, o.seed), p);
    }
    if (kind == "corpus") return corpus_substitute(arg, p);
    throw InvalidInput("unknown generator '" + spec + "' (section5, diag:a,b,..., rank1, random, corpus:<name>)");
}

std::string default_name(const std::string& spec) {
    const auto [kind, arg] = split_spec(spec);
    return (kind == "corpus" ? arg : kind) + ".mtx";
}

LinearOperator load(const Options& o) {
    const Precision p = parse_precision(o.precision);
    if (!o.matrix.empty() && !o.gen.empty()) throw InvalidInput("give either --matrix or --gen, not both");
    if (!o.matrix.empty()) return load_operator(o.matrix, p);
    if (!o.gen.empty()) return generate(o.gen, o, p);
    throw InvalidInput("a matrix is required (--matrix file.mtx or --gen spec)");
}

Vector read_vector(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".mtx") {
        const MatrixMarketData d = read_matrix_market_file(path);
        const Matrix m = d.dense ? d.dense_entries : Matrix(d.sparse_entries);
        if (m.cols() != 1) throw InvalidInput("right-hand side file must hold a single column");
        return m.col(0);
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vector file '" + path + "'");
    std::vector<double> v;
    std::string tok;
    while (in >> tok) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(tok, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (used != tok.size()) throw InvalidInput("bad value '" + tok + "' in " + path);
        v.push_back(x);
    }
    return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

Vector rhs(const Options& o, Index m) {
    if (o.b == "ones") return ones_vector(m);
    if (o.b == "random") return random_vector(m, o.seed);
    Vector b = read_vector(o.b);
    if (b.size() != m) {
        throw DimensionError("right-hand side has " + std::to_string(b.size()) + " entries, matrix has " +
                             std::to_string(m) + " rows");
    }
    return b;
}

ReorthPolicy policy(const Options& o) {
    ReorthPolicy p;
    if (o.reorth == "full") {
        p = ReorthPolicy::full(o.passes);
    } else if (o.reorth == "none") {
        p = ReorthPolicy::none();
    } else if (o.reorth == "onesided-u") {
        p = ReorthPolicy::one_sided(Side::Left, o.passes);
    } else if (o.reorth == "onesided-v") {
        p = ReorthPolicy::one_sided(Side::Right, o.passes);
    } else if (o.reorth == "partial") {
        p = ReorthPolicy::partial(o.eta, o.delta);
    } else if (o.reorth == "semi") {
        p = ReorthPolicy::semi(o.threshold > 0.0 ? o.threshold : std::sqrt(unit_roundoff(parse_precision(o.precision))));
    } else {
        throw InvalidInput("unknown reorthogonalization '" + o.reorth + "'");
    }
    p.passes = o.passes;
    if (o.no_local) p.include_local = false;
    p.validate();
    return p;
}

std::string out_dir(const Options& o) {
    std::string dir = o.out;
    if (dir.empty()) {
        const char* env = std::getenv("KB_OUT_DIR");
        dir = env != nullptr && *env != '\0' ? env : ".";
    }
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
    return f;
}

Index checked_k(const Options& o, const LinearOperator& op) {
    if (o.k < 1 || o.k > op.cols()) {
        throw InvalidInput("--k must be in [1, " + std::to_string(op.cols()) + "], got " + std::to_string(o.k));
    }
    return o.k;
}

void write_bundle(const fs::path& dir, const BidiagFactorization& f) {
    auto csv = open_out(dir / "bidiag.csv");
    csv << "i,alpha_i,beta_i_plus_1\n" << std::setprecision(17);
    for (Index i = 0; i < f.k; ++i) {
        const double beta = static_cast<std::size_t>(i + 1) < f.betas.size() ? f.betas[static_cast<std::size_t>(i + 1)] : 0.0;
        csv << i + 1 << ',' << f.alphas[static_cast<std::size_t>(i)] << ',' << beta << '\n';
    }
    auto u = open_out(dir / "U.mtx");
    write_matrix_market_array(u, f.U);
    auto v = open_out(dir / "V.mtx");
    write_matrix_market_array(v, f.V);
}

int cmd_run(const Options& o) {
    const LinearOperator op = load(o);
    const Vector b = rhs(o, op.rows());
    const Index k = checked_k(o, op);
    const TracedRun tr = traced_run(op, b, k, policy(o));
    const fs::path dir = out_dir(o);
    auto f = open_out(dir / "trace.csv");
    write_trace_csv(f, tr.trace);
    if (o.bundle) write_bundle(dir, tr.factorization);
    std::cout << "steps=" << tr.factorization.k << " status=" << to_string(tr.factorization.status)
              << " norm_a=" << tr.trace.norm_a << " trace=" << (dir / "trace.csv").string() << '\n';

    for (const TraceRow& r : tr.trace.rows) {
        if (!std::isfinite(r.mu) || !std::isfinite(r.nu) || !std::isfinite(r.normXk_over_normA)) {
            throw InvariantViolation("non-finite diagnostics at step " + std::to_string(r.k));
        }
    }
    if (!tr.trace.monotone(1e-12)) throw InvariantViolation("orthogonality levels are not nondecreasing");
    return 0;
}

int cmd_svd(const Options& o) {
    const LinearOperator op = load(o);
    const Vector b = rhs(o, op.rows());
    const Index k = checked_k(o, op);
    TrackOptions t;
    t.tol = o.tol;
    const ConvergenceHistory h = track_convergence(op, b, policy(o), k, WatchSpec::parse(o.watch), t);
    const fs::path dir = out_dir(o);
    auto f = open_out(dir / "convergence.csv");
    write_convergence_csv(f, h);

    std::map<std::string, double> s{{"final_k", static_cast<double>(h.final_k)},
                                    {"norm_a", h.norm_a},
                                    {"tol", h.tol},
                                    {"ghost_flags", static_cast<double>(h.ghosts.size())}};
    for (std::size_t w = 0; w < h.values.size(); ++w) {
        const std::string key = "watch_" + std::to_string(w + 1);
        s[key + ".value"] = h.values[w].back();
        s[key + ".residual"] = h.residuals[w].back();
        s[key + ".converged_at"] = static_cast<double>(h.converged_at[w]);
    }
    write_summary((dir / "svd_summary.txt").string(), s);
    for (std::size_t w = 0; w < h.values.size(); ++w) {
        std::cout << "s_" << w + 1 << '=' << std::setprecision(17) << h.values[w].back()
                  << (h.converged[w] ? " converged" : "") << '\n';
    }
    for (const GhostFlag& g : h.ghosts) {
        std::cout << "ghost step=" << g.step << " pair=" << g.first << ',' << g.second << " value=" << g.value << '\n';
    }
    for (const auto& v : h.values) {
        if (!std::isfinite(v.back())) throw InvariantViolation("non-finite Ritz value");
    }
    return 0;
}

int cmd_lsqr(const Options& o) {
    const LinearOperator op = load(o);
    const Vector b = rhs(o, op.rows());
    const Index k = checked_k(o, op);
    LsqrOptions lo;
    lo.atol = o.atol;
    const LsqrResult r = lsqr_solve(op, b, k, policy(o), lo);
    const fs::path dir = out_dir(o);
    auto f = open_out(dir / "lsqr.csv");
    write_lsqr_csv(f, r);
    const double res = r.history.empty() ? b.norm() : r.history.back().residual_estimate;
    write_summary((dir / "lsqr_summary.txt").string(), {{"k", static_cast<double>(r.k)},
                                                       {"converged", r.converged ? 1.0 : 0.0},
                                                       {"residual_estimate", res},
                                                       {"norm_x", r.x.norm()}});
    std::cout << "k=" << r.k << " converged=" << (r.converged ? "yes" : "no") << " residual=" << std::setprecision(6)
              << res << '\n';
    if (!r.x.allFinite()) throw InvariantViolation("non-finite solution");
    return 0;
}

int cmd_experiment(const Options& o) {
    ExperimentConfig cfg;
    cfg.out_dir = out_dir(o);
    cfg.matrix_dir = o.matrix_dir;
    if (o.precision_set) cfg.precision = parse_precision(o.precision);
    cfg.k = o.k;
    cfg.k_small = o.k_small;
    cfg.n = dim_or(o.n, 800);
    cfg.eta = o.eta;
    if (cfg.k < 1) throw InvalidInput("--k must be positive");
    ExperimentOutput out;
    if (o.name == "fig1") {
        out = experiment_fig1(cfg);
    } else if (o.name == "fig2") {
        out = experiment_fig2(cfg);
    } else if (o.name == "fig3") {
        out = experiment_fig3(cfg);
    } else if (o.name == "table2") {
        out = experiment_table2(cfg);
    } else {
        throw InvalidInput("unknown experiment '" + o.name + "' (fig1, fig2, fig3, table2)");
    }
    for (const std::string& w : out.warnings) std::cerr << w << '\n';
    for (const std::string& f : out.files) std::cout << f << '\n';
    for (const auto& [key, v] : out.summary) {
        if (!std::isfinite(v)) throw InvariantViolation("non-finite summary value " + key);
    }
    return 0;
}

int cmd_gen(const Options& o) {
    const LinearOperator op = generate(o.name, o, Precision::binary64);
    const fs::path path = o.output.empty() ? fs::path(out_dir(o)) / default_name(o.name) : fs::path(o.output);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto f = open_out(path);
    write_matrix_market(f, op);
    std::cout << path.string() << '\n';
    return 0;
}

void add_matrix_options(CLI::App* c, Options& o) {
    c->add_option("--matrix", o.matrix, "Matrix Market file");
    c->add_option("--gen", o.gen, "generator: section5, diag:a,b,..., rank1, random, corpus:<name>");
    c->add_option("--m", o.m, "rows for rank1/random");
    c->add_option("--n", o.n, "columns (section5: order)");
    c->add_option("--b", o.b, "right-hand side: ones, random or a file")->capture_default_str();
    c->add_option("--reorth", o.reorth, "full|none|onesided-u|onesided-v|partial|semi")
        ->check(CLI::IsMember({"full", "none", "onesided-u", "onesided-v", "partial", "semi"}))
        ->capture_default_str();
    c->add_option("--eta", o.eta, "partial: level kept after an event")->capture_default_str();
    c->add_option("--delta", o.delta, "partial: trigger level (0 = sqrt(u/k))");
    c->add_option("--threshold", o.threshold, "semi: trigger level (0 = sqrt(u))");
    c->add_option("--passes", o.passes, "Gram-Schmidt passes")->capture_default_str();
    c->add_flag("--no-local", o.no_local, "skip the newest vector as a target");
    c->add_option("--k", o.k, "steps")->capture_default_str();
    c->add_option("--precision", o.precision, "double|single")
        ->check(CLI::IsMember({"double", "single"}))
        ->capture_default_str();
    c->add_option("--out", o.out, "output directory (default $KB_OUT_DIR or .)");
    c->add_option("--seed", o.seed, "seed for random inputs")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lanczos bidiagonalization with reorthogonalization and backward-error diagnostics"};
    app.require_subcommand(1);
    Options o;

    CLI::App* run = app.add_subcommand("run", "bidiagonalize and write trace.csv");
    add_matrix_options(run, o);
    run->add_flag("--bundle", o.bundle, "also write bidiag.csv, U.mtx and V.mtx");

    CLI::App* svd = app.add_subcommand("svd", "track Ritz values and write convergence.csv");
    add_matrix_options(svd, o);
    svd->add_option("--watch", o.watch, "largest:j or smallest:j")->capture_default_str();
    svd->add_option("--tol", o.tol, "relative residual tolerance (0 = by precision)");

    CLI::App* lsqr = app.add_subcommand("lsqr", "solve min ||b - Ax|| and write lsqr.csv");
    add_matrix_options(lsqr, o);
    lsqr->add_option("--atol", o.atol, "stopping tolerance")->capture_default_str();

    CLI::App* exp = app.add_subcommand("experiment", "fig1, fig2, fig3 or table2");
    exp->add_option("name", o.name, "experiment")->required()->check(CLI::IsMember({"fig1", "fig2", "fig3", "table2"}));
    exp->add_option("--matrix-dir", o.matrix_dir, "directory holding the corpus .mtx files");
    exp->add_option("--precision", o.precision, "double|single (default both)")
        ->check(CLI::IsMember({"double", "single"}));
    exp->add_option("--k", o.k, "steps")->capture_default_str();
    exp->add_option("--k-small", o.k_small, "table2: steps for the smallest pair")->capture_default_str();
    exp->add_option("--n", o.n, "order of the generated matrix (default 800)");
    exp->add_option("--eta", o.eta, "fig2: partial reorthogonalization level")->capture_default_str();
    exp->add_option("--out", o.out, "output directory (default $KB_OUT_DIR or .)");

    CLI::App* gen = app.add_subcommand("gen", "write a generated matrix in Matrix Market format");
    gen->add_option("name", o.name, "section5, diag:a,b,..., rank1, random, corpus:<name>")->required();
    gen->add_option("--m", o.m, "rows");
    gen->add_option("--n", o.n, "columns");
    gen->add_option("--seed", o.seed, "seed")->capture_default_str();
    gen->add_option("--output", o.output, "output file (default <out>/<name>.mtx)");
    gen->add_option("--out", o.out, "output directory (default $KB_OUT_DIR or .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }
    o.precision_set = exp->count("--precision") > 0;

    try {
        if (*run) return cmd_run(o);
        if (*svd) return cmd_svd(o);
        if (*lsqr) return cmd_lsqr(o);
        if (*exp) return cmd_experiment(o);
        if (*gen) return cmd_gen(o);
    } catch (const InvariantViolation& e) {
        std::cerr << "error: invariant violated: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << " (best estimate " << e.best_estimate() << ")\n";
        return kExitInvariant;
    } catch (const StateError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return 0;
}

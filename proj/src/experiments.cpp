#include "lbro/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "lbro/errors.hpp"
#include "lbro/generators.hpp"
#include "lbro/matrix_market.hpp"

namespace lbro {

namespace fs = std::filesystem;

namespace {

std::string join(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

std::vector<Precision> precisions(const ExperimentConfig& cfg) {
    if (cfg.precision) return {*cfg.precision};
    return {Precision::binary64, Precision::binary32};
}

ExperimentOutput corpus_traces(const ExperimentConfig& cfg, const ReorthPolicy& policy, const std::string& tag) {
    ExperimentOutput out;
    fs::create_directories(cfg.out_dir);
    for (const CorpusEntry& e : corpus()) {
        const LinearOperator op = corpus_operator(e.name, cfg.matrix_dir, out.warnings);
        const Index k = std::min(cfg.k, op.cols());
        const TracedRun tr = traced_run(op, ones_vector(op.rows()), k, policy);
        const std::string path = join(cfg.out_dir, tag + "_" + e.name + ".csv");
        auto f = open_out(path);
        write_trace_csv(f, tr.trace);
        out.files.push_back(path);

        double mu = 0.0, nu = 0.0, xk = 0.0;
        for (const TraceRow& r : tr.trace.rows) {
            mu = std::max(mu, r.mu);
            nu = std::max(nu, r.nu);
            xk = std::max(xk, r.normXk_over_normA);
        }
        out.summary[e.name + ".max_mu"] = mu;
        out.summary[e.name + ".max_nu"] = nu;
        out.summary[e.name + ".max_normXk_over_normA"] = xk;
        out.summary[e.name + ".steps"] = static_cast<double>(tr.factorization.k);
        out.summary[e.name + ".reorth_events_u"] = static_cast<double>(tr.factorization.events_u);
        out.summary[e.name + ".reorth_events_v"] = static_cast<double>(tr.factorization.events_v);
        out.summary[e.name + ".norm_a"] = tr.trace.norm_a;
    }
    const std::string summary = join(cfg.out_dir, tag + "_summary.txt");
    write_summary(summary, out.summary);
    out.files.push_back(summary);
    return out;
}

}  // namespace

LinearOperator corpus_operator(const std::string& name, const std::string& matrix_dir,
                               std::vector<std::string>& warnings) {
    if (!matrix_dir.empty()) {
        const fs::path p = fs::path(matrix_dir) / (name + ".mtx");
        if (fs::exists(p)) return load_operator(p.string());
    }
    warnings.push_back("warning: " + name + ".mtx not found, using generated substitute");
    return corpus_substitute(name);
}

ExperimentOutput experiment_fig1(const ExperimentConfig& cfg) { return corpus_traces(cfg, ReorthPolicy::full(), "fig1"); }

ExperimentOutput experiment_fig2(const ExperimentConfig& cfg) {
    return corpus_traces(cfg, ReorthPolicy::partial(cfg.eta), "fig2");
}

ExperimentOutput experiment_fig3(const ExperimentConfig& cfg) {
    ExperimentOutput out;
    fs::create_directories(cfg.out_dir);
    const Matrix a = generate_section5_matrix(cfg.n);
    const Vector sigma = section5_singular_values(cfg.n);
    {
        const std::string path = join(cfg.out_dir, "fig3_sigma.csv");
        auto f = open_out(path);
        f << "i,sigma\n" << std::setprecision(17);
        for (Index i = 0; i < sigma.size(); ++i) f << i + 1 << ',' << sigma[i] << '\n';
        out.files.push_back(path);
    }
    const double norm_a = spectral_norm(a);
    for (Precision p : precisions(cfg)) {
        const LinearOperator op = LinearOperator::dense(a, p);
        TrackOptions opt;
        opt.norm_a = norm_a;
        const ConvergenceHistory h = track_convergence(op, ones_vector(cfg.n), ReorthPolicy::full(),
                                                       std::min(cfg.k, cfg.n), WatchSpec{WatchSpec::End::Largest, 4}, opt);
        const std::string tag = std::string(to_string(p));
        const std::string path = join(cfg.out_dir, "fig3_" + tag + ".csv");
        auto f = open_out(path);
        write_convergence_csv(f, h);
        out.files.push_back(path);
        const double s1 = h.values[0].back();
        const double s2 = h.values[1].back();
        out.summary[tag + ".s1"] = s1;
        out.summary[tag + ".s2"] = s2;
        out.summary[tag + ".gap_s1_s2"] = std::abs(s1 - s2);
        out.summary[tag + ".ghost_flags"] = static_cast<double>(h.ghosts.size());
    }
    const std::string summary = join(cfg.out_dir, "fig3_summary.txt");
    write_summary(summary, out.summary);
    out.files.push_back(summary);
    return out;
}

Table2Values table2_values(Precision precision, Index n, Index k, Index k_small) {
    if (k < 2 || k_small < 2) throw InvalidInput("table2: need at least two steps");
    k = std::min(k, n);
    k_small = std::min(k_small, n);
    const Matrix a = generate_section5_matrix(n);
    const LinearOperator op = LinearOperator::dense(a, precision);
    const Vector b = ones_vector(n);
    TrackOptions opt;
    opt.norm_a = spectral_norm(a);
    opt.ghost_stride = 0;
    const ReorthPolicy full = ReorthPolicy::full();

    const ConvergenceHistory top = track_convergence(op, b, full, k, WatchSpec{WatchSpec::End::Largest, 2}, opt);
    const ConvergenceHistory bottom =
        track_convergence(op, b, full, k_small, WatchSpec{WatchSpec::End::Smallest, 2}, opt);
    if (top.final_k != k || bottom.final_k != k_small) throw StateError("table2: run stopped early");

    const double sigma1 = 1.0;
    const double sigma_n = 1e-4;
    Table2Values t;
    t.s1 = top.values[0].back();
    t.s2 = top.values[1].back();
    t.rel_err_s1 = std::abs(t.s1 - sigma1) / sigma1;
    t.rel_err_s2 = std::abs(t.s2 - sigma1) / sigma1;
    t.gap_s1_s2 = std::abs(t.s1 - t.s2);
    t.s1_s2_converged = top.converged[0] && top.converged[1];
    t.s_min = bottom.value(1, k_small);
    t.s_min_prev = bottom.value(1, k_small - 1);
    t.s_second = bottom.value(2, k_small);
    t.rel_err_s_min = std::abs(t.s_min - sigma_n) / sigma_n;
    t.rel_err_s_min_prev = std::abs(t.s_min_prev - sigma_n) / sigma_n;
    t.rel_err_s_second = std::abs(t.s_second - sigma_n) / sigma_n;
    t.gap_min = std::abs(t.s_min - t.s_min_prev);
    t.gap_min_second = std::abs(t.s_min - t.s_second);
    return t;
}

ExperimentOutput experiment_table2(const ExperimentConfig& cfg) {
    ExperimentOutput out;
    fs::create_directories(cfg.out_dir);
    for (Precision p : precisions(cfg)) {
        const Table2Values t = table2_values(p, cfg.n, cfg.k, cfg.k_small);
        const std::string tag = std::string(to_string(p));
        std::map<std::string, double> s{
            {"k", static_cast<double>(std::min(cfg.k, cfg.n))},
            {"k_small", static_cast<double>(std::min(cfg.k_small, cfg.n))},
            {"s1", t.s1},
            {"s2", t.s2},
            {"rel_err_s1", t.rel_err_s1},
            {"rel_err_s2", t.rel_err_s2},
            {"gap_s1_s2", t.gap_s1_s2},
            {"s_min", t.s_min},
            {"s_min_prev", t.s_min_prev},
            {"s_second", t.s_second},
            {"rel_err_s_min", t.rel_err_s_min},
            {"rel_err_s_min_prev", t.rel_err_s_min_prev},
            {"rel_err_s_second", t.rel_err_s_second},
            {"gap_min", t.gap_min},
            {"gap_min_second", t.gap_min_second},
        };
        const std::string path = join(cfg.out_dir, "table2_" + tag + ".txt");
        write_summary(path, s);
        out.files.push_back(path);
        for (const auto& [key, v] : s) out.summary[tag + "." + key] = v;
    }
    return out;
}

void write_summary(const std::string& path, const std::map<std::string, double>& values) {
    auto f = open_out(path);
    f << std::setprecision(17);
    for (const auto& [key, v] : values) f << key << '=' << v << '\n';
}

}  // namespace lbro

// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "lbro/bidiag.hpp"
#include "lbro/diagnostics.hpp"
#include "lbro/experiments.hpp"
#include "lbro/generators.hpp"
#include "lbro/hbridge.hpp"
#include "lbro/lsqr.hpp"
#include "lbro/svdapprox.hpp"

using namespace lbro;

namespace {

constexpr double kU = 0x1p-53;

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

struct CorpusOp {
    std::string name;
    LinearOperator op;
    double norm_a;
};

std::vector<CorpusOp> load_corpus() {
    std::vector<CorpusOp> out;
    for (const CorpusEntry& e : corpus()) {
        LinearOperator op = corpus_substitute(e.name);
        const double n = spectral_norm(op);
        out.push_back({e.name, std::move(op), n});
    }
    return out;
}

void full_reorth_stability(const std::vector<CorpusOp>& ops) {
    bool ok = true;
    std::ostringstream d;
    for (const CorpusOp& c : ops) {
        const TracedRun tr = traced_run(c.op, ones_vector(c.op.rows()), 100, ReorthPolicy::full(),
                                        TraceOptions{true, c.norm_a, {}});
        double mu = 0.0, nu = 0.0, x = 0.0;
        for (const TraceRow& r : tr.trace.rows) {
            mu = std::max(mu, r.mu);
            nu = std::max(nu, r.nu);
            x = std::max(x, r.normXk_over_normA);
        }
        const bool here = tr.trace.rows.size() == 100 && mu <= 1e-13 && nu <= 1e-13 && x <= 1e-12;
        ok = ok && here;
        d << c.name << "(k=" << tr.trace.rows.size() << " mu=" << sci(mu) << " nu=" << sci(nu) << " X=" << sci(x)
          << ") ";
    }
    report("full_reorth_stability [mu,nu<=1e-13, X<=1e-12, k=1..100]", ok, d.str());
}

void partial_reorth_coupling(const std::vector<CorpusOp>& ops) {
    bool ok = true;
    std::ostringstream d;
    for (const CorpusOp& c : ops) {
        const TracedRun tr = traced_run(c.op, ones_vector(c.op.rows()), 100, ReorthPolicy::partial(1e-10),
                                        TraceOptions{true, c.norm_a, {}});
        double level = 0.0, worst = 0.0;
        for (const TraceRow& r : tr.trace.rows) {
            level = std::max({level, r.mu, r.nu});
            const double k = static_cast<double>(r.k);
            const double bound = 100.0 * std::sqrt(k) * (k * kU + k * r.nu + r.mu);
            worst = std::max(worst, r.normXk_over_normA / bound);
        }
        const Index events = tr.factorization.events_u + tr.factorization.events_v;
        const bool here = tr.trace.rows.size() == 100 && level <= 1e-8 && events >= 1 && worst <= 1.0;
        ok = ok && here;
        d << c.name << "(level=" << sci(level) << " events=" << events << " X/bound=" << sci(worst) << ") ";
    }
    report("partial_reorth_coupling [eta=1e-10: level<=1e-8, events>=1, X/A<=100 sqrt(k)(k u+k nu_k+mu_{k+1})]", ok,
           d.str());
}

void table2_double() {
    const Table2Values t = table2_values(Precision::binary64, 800, 100, 250);
    const bool ok = t.rel_err_s1 <= 1e-14 && t.rel_err_s2 <= 1e-14 && t.gap_s1_s2 <= 1e-14 &&
                    t.rel_err_s_min <= 1e-10 && t.rel_err_s_min_prev <= 1e-10 && t.gap_min <= 1e-13;
    std::ostringstream d;
    d << "|s1-1|=" << sci(t.rel_err_s1) << " |s2-1|=" << sci(t.rel_err_s2) << " |s1-s2|=" << sci(t.gap_s1_s2)
      << " rel(s250^(250))=" << sci(t.rel_err_s_min) << " rel(s249^(249))=" << sci(t.rel_err_s_min_prev)
      << " |s250^(250)-s249^(249)|=" << sci(t.gap_min) << " (second smallest at 250: rel=" << sci(t.rel_err_s_second)
      << " gap=" << sci(t.gap_min_second) << ")";
    report("table2_double [1e-14 largest pair, 1e-10 rel and 1e-13 gap smallest pair]", ok, d.str());
}

void table2_single() {
    const Table2Values t = table2_values(Precision::binary32, 800, 100, 250);
    auto in_window = [](double x) { return x >= 1e-9 && x <= 1e-6; };
    const bool ok = in_window(t.rel_err_s1) && in_window(t.gap_s1_s2);
    std::ostringstream d;
    d << "|s1-1|/1=" << sci(t.rel_err_s1) << " |s1-s2|=" << sci(t.gap_s1_s2) << " |s2-1|=" << sci(t.rel_err_s2);
    report("table2_single [|s1-1| and |s1-s2| in [1e-9,1e-6]]", ok, d.str());
}

void equivalence() {
    const LinearOperator a = LinearOperator::dense(random_dense(10, 6, 11));
    const LinearOperator s = LinearOperator::dense(random_dense(8, 8, 12));
    const double ra = exact_equivalence_residual(a, random_vector(10, 13), 6);
    const double rs = exact_equivalence_residual(s, random_vector(8, 14), 8);
    report("householder_equivalence [10x6 and 8x8, k=n, residual<=1e-13]", ra <= 1e-13 && rs <= 1e-13,
           "10x6=" + sci(ra) + " 8x8=" + sci(rs));
}

void structure() {
    std::mt19937_64 gen(2024);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> pick_l(1, 10);
    std::uniform_real_distribution<double> pick_eps(-4.0, -0.5);
    int done = 0, bad = 0;
    double worst_res = 0.0, min_slack = 1.0;
    while (done < 50) {
        const Index l = pick_l(gen);
        const Index r = std::uniform_int_distribution<Index>(l, 30)(gen);
        Matrix g(r, l), p(r, l);
        for (Index i = 0; i < r; ++i)
            for (Index j = 0; j < l; ++j) {
                g(i, j) = normal(gen);
                p(i, j) = normal(gen);
            }
        Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(r, l);
        q += std::pow(10.0, pick_eps(gen)) * p;
        q.colwise().normalize();
        const Matrix m = Matrix(q.transpose() * q).triangularView<Eigen::StrictlyUpper>();
        if (spectral_norm(m) >= 1.0) continue;
        const StructureReport rep = structure_report(q);
        worst_res = std::max(worst_res, rep.block_residual);
        min_slack = std::min({min_slack, rep.slack_unit, rep.slack_lower, rep.slack_upper});
        if (rep.block_residual > 1e-13 || rep.slack_unit < 0 || rep.slack_lower < 0 || rep.slack_upper < 0) ++bad;
        ++done;
    }
    report("structure_identity [50 random Q, residual<=1e-13, slacks>=0]", bad == 0,
           "max residual=" + sci(worst_res) + " min slack=" + sci(min_slack) + " failures=" + std::to_string(bad));
}

void local_orthogonality() {
    const LinearOperator a = LinearOperator::dense(random_dense(200, 150, 21));
    const double norm_a = spectral_norm(a);
    ReorthPolicy p = ReorthPolicy::semi(std::sqrt(kU));
    p.include_local = false;
    const BidiagFactorization f = run(a, ones_vector(200), 100, p);
    const std::vector<double> loc = local_orthogonality_trace(f);
    double worst = 0.0;
    for (double v : loc) worst = std::max(worst, v);
    const bool ok = loc.size() == 100 && worst <= 100.0 * kU * norm_a;
    report("local_orthogonality [semi(sqrt u), no local, 200x150, i<=100, <=100 u ||A||]", ok,
           "max=" + sci(worst) + " limit=" + sci(100.0 * kU * norm_a) + " count=" + std::to_string(loc.size()) +
               " events=" + std::to_string(f.events_u + f.events_v));
}

void lsqr_consistency(const std::vector<CorpusOp>& ops) {
    bool ok = true;
    std::ostringstream d;
    LsqrOptions o;
    o.atol = 0.0;
    o.track_nu = false;
    o.true_residual = false;
    for (const CorpusOp& c : ops) {
        o.bidiag.norm_a_est = c.norm_a;
        const LsqrResult r = lsqr_solve(c.op, ones_vector(c.op.rows()), 100, ReorthPolicy::full(), o);
        double gap = 0.0;
        for (const LsqrIterate& it : r.history) gap = std::max(gap, it.oracle_gap);
        ok = ok && r.history.size() == 100 && gap <= 1e-12;
        d << c.name << "(gap=" << sci(gap) << ") ";
    }
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Matrix a = random_dense(10, 4, 100 + seed);
        const Vector b = random_vector(10, 200 + seed);
        const Vector xs = a.colPivHouseholderQr().solve(b);
        const LsqrResult r = lsqr_solve(LinearOperator::dense(a), b, 4, ReorthPolicy::full());
        worst = std::max(worst, (r.x - xs).norm() / xs.norm());
    }
    ok = ok && worst <= 1e-12;
    d << "dense 10x4 max rel err=" << sci(worst);
    report("lsqr_consistency [oracle gap<=1e-12 k<=100, 10x4 vs QR <=1e-12]", ok, d.str());
}

void bidiag_svd_oracle() {
    std::mt19937_64 gen(77);
    std::uniform_int_distribution<Index> pick_k(1, 300);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Index k = pick_k(gen);
        const bool square = t % 5 == 4;
        const double grade = t % 3 == 0 ? 8.0 : 0.0;
        LowerBidiagonal B;
        B.diag.resize(k);
        B.sub.resize(square ? k - 1 : k);
        for (Index i = 0; i < k; ++i) B.diag[i] = std::pow(10.0, -grade * unit(gen)) * (0.01 + unit(gen));
        for (Index i = 0; i < B.sub.size(); ++i) B.sub[i] = std::pow(10.0, -grade * unit(gen)) * (0.01 + unit(gen));
        const Matrix dense = B.to_dense();
        const Vector ref = singular_values(dense);
        const Vector got = bidiag_svd(B, VectorMode::None).theta;
        const double err = (got - ref).cwiseAbs().maxCoeff() / ref[0];
        worst = std::max(worst, err);
    }
    report("bidiag_svd_oracle [100 random, k<=300, <=1e-14 ||B||]", worst <= 1e-14, "max err/||B||=" + sci(worst));
}

}  // namespace

int main() {
    const std::vector<CorpusOp> ops = load_corpus();
    full_reorth_stability(ops);
    partial_reorth_coupling(ops);
    table2_double();
    table2_single();
    equivalence();
    structure();
    local_orthogonality();
    lsqr_consistency(ops);
    bidiag_svd_oracle();
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

#include "lbro/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "lbro/errors.hpp"

namespace lbro {

const char* const kTraceCsvHeader =
    "k,mu,nu,omega_u,omega_v,local_u,norm_cbar,normXk_over_normA,reorth_events_u,reorth_events_v,"
    "inner_products_count";

double orthogonality_level_from_gram(const Eigen::Ref<const Matrix>& gram) {
    if (gram.rows() < 2) return 0.0;
    const Matrix sut = gram.triangularView<Eigen::StrictlyUpper>();
    return spectral_norm(sut);
}

double orthogonality_level(const Eigen::Ref<const Matrix>& Q) {
    if (Q.cols() < 2) return 0.0;
    return orthogonality_level_from_gram(Q.transpose() * Q);
}

double pairwise_level(const Eigen::Ref<const Vector>& q, const Eigen::Ref<const Matrix>& basis, bool exclude_last) {
    if (basis.rows() != q.size() && basis.cols() > 0) throw DimensionError("pairwise_level: length mismatch");
    const Index n = exclude_last ? basis.cols() - 1 : basis.cols();
    double m = 0.0;
    for (Index j = 0; j < n; ++j) m = std::max(m, std::abs(basis.col(j).dot(q)));
    return m;
}

SingularValueWindow singular_value_window(const Eigen::Ref<const Matrix>& Q) {
    SingularValueWindow w;
    w.level = orthogonality_level(Q);
    const Vector s = singular_values(Q);
    w.sigma_max = s.size() ? s[0] : 0.0;
    w.sigma_min = s.size() ? s[s.size() - 1] : 0.0;
    w.applicable = w.level < 0.5;
    if (!w.applicable) return w;
    const double slack = 4.0 * static_cast<double>(std::max<Index>(1, Q.cols())) * unit_roundoff(Precision::binary64);
    w.upper_ok = w.sigma_max <= 1.0 + w.level + slack;
    w.lower_ok = w.sigma_min >= std::sqrt(1.0 - 2.0 * w.level) - slack;
    return w;
}

std::vector<double> local_orthogonality_trace(const BidiagFactorization& f) {
    std::vector<double> out;
    for (Index i = 1; i < f.U.cols(); ++i) {
        out.push_back(f.betas[static_cast<std::size_t>(i)] * std::abs(f.U.col(i - 1).dot(f.U.col(i))));
    }
    return out;
}

bool DiagnosticsTrace::monotone(double slack) const {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].mu < rows[i - 1].mu - slack || rows[i].nu < rows[i - 1].nu - slack) return false;
    }
    return true;
}

void GramTracker::extend(const Eigen::Ref<const Matrix>& Q) {
    const Index old = gram_.rows();
    const Index n = Q.cols();
    if (n <= old) return;
    Matrix g(n, n);
    g.topLeftCorner(old, old) = gram_;
    for (Index j = old; j < n; ++j) {
        for (Index i = 0; i <= j; ++i) {
            const double d = Q.col(i).dot(Q.col(j));
            g(i, j) = d;
            g(j, i) = d;
        }
    }
    gram_ = std::move(g);
}

double GramTracker::level(Index cols) const {
    return orthogonality_level_from_gram(gram_.topLeftCorner(cols, cols));
}

TraceRecorder::TraceRecorder(const LinearOperator& op, double norm_a, bool with_Xk) {
    trace_.norm_a = norm_a;
    trace_.has_Xk = with_Xk;
    if (with_Xk) xk_.emplace(op, norm_a);
}

void TraceRecorder::record(const LanczosBidiagonalization& lb) {
    const Index k = lb.k();
    if (k < 1) return;
    gu_.extend(lb.U());
    gv_.extend(lb.V());
    const Matrix& G = gu_.gram();
    const Matrix& H = gv_.gram();
    const Index uc = lb.u_count();
    const Index vc = lb.v_count();

    TraceRow row;
    row.k = k;
    row.mu = gu_.level(uc);
    row.nu = gv_.level(std::min(k, vc));
    row.nu_next = gv_.level(vc);
    if (uc == k + 1) {
        for (Index i = 0; i < k; ++i) row.omega_u = std::max(row.omega_u, std::abs(G(i, k)));
        row.local_u = lb.betas()[static_cast<std::size_t>(k)] * std::abs(G(k - 1, k));
    }
    if (vc >= k) {
        for (Index i = 0; i + 1 < k; ++i) row.omega_v = std::max(row.omega_v, std::abs(H(i, k - 1)));
    }
    const StepRecord& rec = lb.records().back();
    row.norm_cbar = rec.cbar.norm();
    if (xk_) row.normXk_over_normA = xk_->extend(lb) / trace_.norm_a;
    row.reorth_events_u = lb.reorthogonalizer().events(Side::Left);
    row.reorth_events_v = lb.reorthogonalizer().events(Side::Right);
    row.inner_products_count = lb.reorthogonalizer().inner_products();
    trace_.rows.push_back(row);
}

TracedRun traced_run(const LinearOperator& op, const Eigen::Ref<const Vector>& b, Index k_max,
                     const ReorthPolicy& policy, const TraceOptions& options) {
    const double norm_a = options.norm_a > 0.0 ? options.norm_a : spectral_norm(op);
    BidiagOptions bo = options.bidiag;
    if (bo.norm_a_est <= 0.0) bo.norm_a_est = norm_a;
    LanczosBidiagonalization lb(op, b, policy, k_max, bo);
    TraceRecorder rec(op, norm_a, options.with_Xk);
    while (lb.running()) {
        lb.step();
        rec.record(lb);
    }
    return TracedRun{lb.factorization(), rec.trace()};
}

void write_trace_csv(std::ostream& out, const DiagnosticsTrace& trace) {
    out << kTraceCsvHeader << '\n';
    out << std::setprecision(17);
    for (const TraceRow& r : trace.rows) {
        out << r.k << ',' << r.mu << ',' << r.nu << ',' << r.omega_u << ',' << r.omega_v << ',' << r.local_u << ','
            << r.norm_cbar << ',' << r.normXk_over_normA << ',' << r.reorth_events_u << ',' << r.reorth_events_v
            << ',' << r.inner_products_count << '\n';
    }
}

}  // namespace lbro

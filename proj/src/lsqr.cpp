#include "lbro/lsqr.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "lbro/diagnostics.hpp"
#include "lbro/errors.hpp"

namespace lbro {

Vector projected_solve(const LowerBidiagonal& B, double beta1) {
    const Index k = B.cols();
    if (k == 0) return Vector();
    if (B.sub.size() != B.rows() - 1) throw DimensionError("projected_solve: malformed bidiagonal");
    Vector d(k), e(std::max<Index>(k - 1, 0)), f = Vector::Zero(B.rows());
    f[0] = beta1;
    double rho_bar = B.diag[0];
    for (Index i = 0; i < k; ++i) {
        if (i + 1 < B.rows()) {
            const double beta = B.sub[i];
            const double rho = std::hypot(rho_bar, beta);
            const double c = rho_bar / rho;
            const double s = beta / rho;
            d[i] = rho;
            if (i + 1 < k) {
                e[i] = s * B.diag[i + 1];
                rho_bar = c * B.diag[i + 1];
            }
            const double fi = f[i];
            f[i] = c * fi + s * f[i + 1];
            f[i + 1] = -s * fi + c * f[i + 1];
        } else {
            d[i] = rho_bar;
        }
    }
    Vector y(k);
    y[k - 1] = f[k - 1] / d[k - 1];
    for (Index i = k - 2; i >= 0; --i) y[i] = (f[i] - e[i] * y[i + 1]) / d[i];
    return y;
}

LsqrResult lsqr_solve(const LinearOperator& op, const Eigen::Ref<const Vector>& b, Index k_max,
                      const ReorthPolicy& policy, const LsqrOptions& options) {
    const bool want_true = options.true_residual.value_or(op.is_dense());
    const double norm_b = b.norm();
    LanczosBidiagonalization lb(op, b, policy, k_max, options.bidiag);
    const double norm_a = lb.norm_a_est();
    const LinearOperator op64 = op.precision() == Precision::binary64 ? op : op.with_precision(Precision::binary64);

    LsqrResult res;
    res.x = Vector::Zero(op.cols());
    if (lb.v_count() == 0) {
        // A^T b = 0: x = 0 is the least squares solution.
        res.converged = true;
        res.status = lb.status();
        return res;
    }
    double phi_bar = lb.betas()[0];
    double rho_bar = lb.alphas()[0];
    Vector w = lb.V().col(0);
    GramTracker gv;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    while (lb.running()) {
        const StepRecord& rec = lb.step();
        const Index k = lb.k();
        const bool beta_absent = lb.u_count() == k;
        const bool alpha_absent = lb.v_count() == k;
        const double beta = beta_absent ? 0.0 : rec.beta;
        const double alpha = beta_absent || alpha_absent ? 0.0 : rec.alpha;

        const double rho = std::hypot(rho_bar, beta);
        const double c = rho_bar / rho;
        const double s = beta / rho;
        const double theta = s * alpha;
        rho_bar = -c * alpha;
        const double phi = c * phi_bar;
        phi_bar = s * phi_bar;

        res.x += (phi / rho) * w;
        if (!alpha_absent && !beta_absent) w = lb.V().col(k) - (theta / rho) * w;

        LsqrIterate it;
        it.k = k;
        it.residual_estimate = std::abs(phi_bar);
        it.normal_residual_estimate = std::abs(phi_bar * alpha * c);
        it.true_residual = want_true ? (b - op64.apply(res.x)).norm() : nan;
        if (options.oracle_gap) {
            const Vector y = projected_solve(lb.B(), lb.betas()[0]);
            const double gap = (res.x - lb.V().leftCols(k) * y).norm();
            const double xn = res.x.norm();
            it.oracle_gap = xn > 0.0 ? gap / xn : gap;
        } else {
            it.oracle_gap = nan;
        }
        if (options.track_nu) {
            gv.extend(lb.V().leftCols(k));
            it.nu_k = gv.level(k);
        } else {
            it.nu_k = nan;
        }
        res.history.push_back(it);
        res.k = k;

        const bool exact = beta_absent || alpha_absent;
        const bool small_normal = it.normal_residual_estimate <= options.atol * norm_a * it.residual_estimate;
        const bool small_residual = it.residual_estimate <= options.atol * (norm_a * res.x.norm() + norm_b);
        if (exact || small_normal || small_residual) {
            res.converged = true;
            break;
        }
    }
    res.status = lb.status();
    return res;
}

double oracle_gap(const LinearOperator& op, const Eigen::Ref<const Vector>& b, const ReorthPolicy& policy, Index k) {
    LsqrOptions o;
    o.atol = 0.0;
    o.track_nu = false;
    o.true_residual = false;
    const LsqrResult r = lsqr_solve(op, b, k, policy, o);
    if (r.history.empty()) return 0.0;
    return r.history.back().oracle_gap;
}

void write_lsqr_csv(std::ostream& out, const LsqrResult& result) {
    out << "k,residual_estimate,true_residual,oracle_gap,nu_k\n" << std::setprecision(17);
    for (const LsqrIterate& it : result.history) {
        out << it.k << ',' << it.residual_estimate << ',' << it.true_residual << ',' << it.oracle_gap << ','
            << it.nu_k << '\n';
    }
}

}  // namespace lbro

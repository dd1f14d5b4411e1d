#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "lbro/bidiag.hpp"
#include "lbro/hbridge.hpp"

namespace lbro {

/// ||SUT(I - Q^T Q)||_2, the spectral norm of the strictly upper triangular part.
double orthogonality_level(const Eigen::Ref<const Matrix>& Q);

/// Same quantity from a precomputed Gram matrix Q^T Q.
double orthogonality_level_from_gram(const Eigen::Ref<const Matrix>& gram);

/// max_j |basis_j^T q| over all columns, or all but the last one.
double pairwise_level(const Eigen::Ref<const Vector>& q, const Eigen::Ref<const Matrix>& basis, bool exclude_last);

/// Checks sigma_1(Q) <= 1 + nu and sigma_min(Q) >= sqrt(1 - 2 nu), nu the
/// orthogonality level; only meaningful when nu < 1/2.
struct SingularValueWindow {
    bool applicable = false;
    bool upper_ok = false;
    bool lower_ok = false;
    double level = 0.0;
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    bool holds() const { return applicable && upper_ok && lower_ok; }
};
SingularValueWindow singular_value_window(const Eigen::Ref<const Matrix>& Q);

/// beta_{i+1} |u_i^T u_{i+1}| for every i with u_{i+1} stored.
std::vector<double> local_orthogonality_trace(const BidiagFactorization& f);

/// Row k describes the state after step k: mu is the level of U_{k+1},
/// nu the level of V_k, omega_u = max_{i<=k} |u_i^T u_{k+1}|,
/// omega_v = max_{i<k} |v_i^T v_k|, local_u = beta_{k+1} |u_k^T u_{k+1}|.
/// When u_{k+1} was not formed, mu falls back to U_k and the u_{k+1} terms are 0.
struct TraceRow {
    Index k = 0;
    double mu = 0.0;
    double nu = 0.0;
    double omega_u = 0.0;
    double omega_v = 0.0;
    double local_u = 0.0;
    double norm_cbar = 0.0;
    double normXk_over_normA = 0.0;
    Index reorth_events_u = 0;
    Index reorth_events_v = 0;
    Index inner_products_count = 0;
    double nu_next = 0.0;  ///< level of V_{k+1} (not written to CSV)
};

struct DiagnosticsTrace {
    std::vector<TraceRow> rows;
    double norm_a = 0.0;
    bool has_Xk = false;

    /// mu and nu nondecreasing up to `slack`.
    bool monotone(double slack) const;
};

/// Incremental Gram matrix of a growing set of columns.
class GramTracker {
public:
    void extend(const Eigen::Ref<const Matrix>& Q);
    const Matrix& gram() const noexcept { return gram_; }
    Index size() const noexcept { return gram_.rows(); }
    double level(Index cols) const;

private:
    Matrix gram_;
};

struct TraceOptions {
    bool with_Xk = true;
    double norm_a = 0.0;  ///< 0 means spectral_norm(op)
    BidiagOptions bidiag;
};

/// Observes a driver after each step and appends one row.
class TraceRecorder {
public:
    TraceRecorder(const LinearOperator& op, double norm_a, bool with_Xk);
    void record(const LanczosBidiagonalization& lb);
    const DiagnosticsTrace& trace() const noexcept { return trace_; }

private:
    DiagnosticsTrace trace_;
    GramTracker gu_;
    GramTracker gv_;
    std::optional<BackwardErrorTracker> xk_;
};

struct TracedRun {
    BidiagFactorization factorization;
    DiagnosticsTrace trace;
};

TracedRun traced_run(const LinearOperator& op, const Eigen::Ref<const Vector>& b, Index k_max,
                     const ReorthPolicy& policy, const TraceOptions& options = {});

/// Header plus one line per row, floats with 17 significant digits.
void write_trace_csv(std::ostream& out, const DiagnosticsTrace& trace);
extern const char* const kTraceCsvHeader;

}  // namespace lbro

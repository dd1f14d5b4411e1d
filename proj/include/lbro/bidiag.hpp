#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lbro/linops.hpp"
#include "lbro/reorth.hpp"

namespace lbro {

enum class Status { Running, LuckyTermination, Completed };

/// Which coefficient fell below the termination tolerance.
enum class Vanished { None, Alpha, Beta };

std::string to_string(Status s);

/// Lower bidiagonal matrix with diagonal alpha_1..alpha_k and subdiagonal
/// beta_2..beta_{k+1}. When `sub` has k-1 entries the matrix is square.
struct LowerBidiagonal {
    Vector diag;
    Vector sub;

    Index cols() const noexcept { return diag.size(); }
    Index rows() const noexcept { return diag.size() == 0 ? 0 : sub.size() + 1; }
    bool square() const noexcept { return rows() == cols(); }
    Matrix to_dense() const;
};

/// Everything produced by one step i (1-based): the new u_{i+1} and v_{i+1}.
struct StepRecord {
    Index step = 0;
    double beta_pre = 0.0;   ///< ||A v_i - alpha_i u_i|| before reorthogonalization
    Vector u_pre;            ///< unit direction of that vector (empty when not kept)
    Vector cbar;             ///< xi_{1i}..xi_{ii}; zero where a vector was skipped
    double beta = 0.0;       ///< beta_{i+1}
    double alpha_pre = 0.0;  ///< ||A^T u_{i+1} - beta_{i+1} v_i|| before reorthogonalization
    Vector dbar;             ///< eta_{1,i+1}..eta_{i,i+1}
    double alpha = 0.0;      ///< alpha_{i+1}; 0 when not computed
    IndexSet targets_u;
    IndexSet targets_v;
    Index inner_products = 0;
};

/// Snapshot of a k-step factorization
///   A V_k = U_{k+1} (B_k + C_k),   A^T U_{k+1} = V_k (B_k^T + D_k) + alpha_{k+1} v_{k+1} e_{k+1}^T.
///
/// On termination the vector whose norm vanished is not appended; its
/// unnormalized remainder is kept in `u_tail` / `v_tail` so the relations
/// above still close. When m = n the run stops after step n without forming
/// u_{n+1}, so B_n is square.
struct BidiagFactorization {
    Index k = 0;
    std::vector<double> alphas;  ///< alpha_1..
    std::vector<double> betas;   ///< beta_1..
    Matrix U;                    ///< m x (k+1), or m x k when u_{k+1} is absent
    Matrix V;                    ///< n x (k+1), or n x k when v_{k+1} is absent
    Matrix C;                    ///< U.cols() x k, xi coefficients
    Matrix D;                    ///< k x U.cols(), eta coefficients
    Vector u_tail;
    Vector v_tail;
    Status status = Status::Running;
    Vanished vanished = Vanished::None;
    Index termination_step = 0;
    double norm_a_est = 0.0;
    Precision precision = Precision::binary64;
    std::vector<StepRecord> steps;
    Index events_u = 0;
    Index events_v = 0;
    Index inner_products = 0;

    LowerBidiagonal B() const;
    double beta1() const { return betas.empty() ? 0.0 : betas.front(); }
};

struct BidiagOptions {
    double term_tol = 0.0;           ///< relative to ||A||est; 0 means sqrt(u)
    double norm_a_est = 0.0;         ///< 0 means estimate by power iteration
    bool keep_pre_vectors = true;    ///< store u'_{i+1} in each StepRecord
};

/// Loose estimate of ||A|| used for the tolerances of a run.
double estimate_norm(const LinearOperator& op);

/// Incremental driver. The operator must outlive this object.
class LanczosBidiagonalization {
public:
    /// Computes beta_1, u_1, alpha_1, v_1. Throws InvalidInput for a zero or
    /// non-finite b and DimensionError for a length mismatch.
    LanczosBidiagonalization(const LinearOperator& op, const Eigen::Ref<const Vector>& b, ReorthPolicy policy,
                             Index k_max, BidiagOptions options = {});

    /// One step; throws StateError once the run has stopped.
    const StepRecord& step();
    bool running() const noexcept { return status_ == Status::Running; }
    Status status() const noexcept { return status_; }
    Vanished vanished() const noexcept { return vanished_; }

    Index k() const noexcept { return k_; }
    Index k_max() const noexcept { return k_max_; }
    Index u_count() const noexcept { return u_count_; }
    Index v_count() const noexcept { return v_count_; }
    auto U() const { return U_.leftCols(u_count_); }
    auto V() const { return V_.leftCols(v_count_); }
    std::span<const double> alphas() const noexcept { return alphas_; }
    std::span<const double> betas() const noexcept { return betas_; }
    const std::vector<StepRecord>& records() const noexcept { return steps_; }
    const Reorthogonalizer& reorthogonalizer() const noexcept { return reorth_; }
    const LinearOperator& op() const noexcept { return *op_; }
    double norm_a_est() const noexcept { return norm_a_est_; }
    Precision precision() const noexcept { return precision_; }
    LowerBidiagonal B() const;

    BidiagFactorization factorization() const;

private:
    Vector round_vec(Vector v) const;
    void finish(Status s, Vanished w);

    const LinearOperator* op_;
    Precision precision_;
    double norm_a_est_;
    double tol_;
    bool keep_pre_;
    Index k_max_;
    Reorthogonalizer reorth_;
    Matrix U_;
    Matrix V_;
    Index u_count_ = 0;
    Index v_count_ = 0;
    std::vector<double> alphas_;
    std::vector<double> betas_;
    std::vector<StepRecord> steps_;
    Vector u_tail_;
    Vector v_tail_;
    Index k_ = 0;
    Status status_ = Status::Running;
    Vanished vanished_ = Vanished::None;
    Index termination_step_ = 0;
};

/// Runs up to k_max steps (1 <= k_max <= n).
BidiagFactorization run(const LinearOperator& op, const Eigen::Ref<const Vector>& b, Index k_max,
                        const ReorthPolicy& policy, BidiagOptions options = {});

/// ||A V_k - U (B_k + C_k) - u_tail e_k^T||, the tail term only when u_{k+1} is absent.
double fundamental_residual(const BidiagFactorization& f, const LinearOperator& op);
/// ||A^T U - V_k (B_k^T + D_k) - alpha_{k+1} v_{k+1} e_last^T||.
double adjoint_residual(const BidiagFactorization& f, const LinearOperator& op);
/// ||beta_1 u_1 - b||.
double starting_residual(const BidiagFactorization& f, const Eigen::Ref<const Vector>& b);

/// Right-hand side builders used by the CLI and experiments.
Vector ones_vector(Index m);
Vector random_vector(Index m, std::uint64_t seed);

}  // namespace lbro

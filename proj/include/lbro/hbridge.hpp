#pragma once

#include <vector>

#include "lbro/bidiag.hpp"

namespace lbro {

/// Implicit Householder reflectors P_i = I - p_i p_i^T on R^{top+m} with
/// p_i = (-e_i; u_i), e_i the i-th unit vector of R^{top}. top = n+1 for
/// m > n and n for m = n.
class ReflectorChain {
public:
    ReflectorChain(Index top, const Eigen::Ref<const Matrix>& u_vectors);

    Index top() const noexcept { return top_; }
    Index dimension() const noexcept { return top_ + u_.rows(); }
    Index size() const noexcept { return u_.cols(); }
    const Matrix& vectors() const noexcept { return u_; }

    enum class Order {
        Forward,  ///< P_1 P_2 ... P_count x (P_count applied first)
        Reverse   ///< P_count ... P_1 x (P_1 applied first)
    };

    /// Applies the first `count` reflectors (all when count < 0).
    Vector apply(const Eigen::Ref<const Vector>& x, Order order, Index count = -1) const;

private:
    Index top_;
    Matrix u_;
};

/// Chain built from the left Lanczos vectors of a factorization, capped at `top` reflectors.
ReflectorChain make_chain(const BidiagFactorization& f, Index n);

Vector apply_chain(const ReflectorChain& chain, const Eigen::Ref<const Vector>& x, ReflectorChain::Order order);

/// X_k from (O; A V_k) + X_k = P_1...P_{k+1} (B_k; O).
struct BackwardErrorReport {
    Index k = 0;
    Vector column_norms;
    double norm_Xk = 0.0;
    double norm_A = 0.0;
    double normalized() const { return norm_A > 0.0 ? norm_Xk / norm_A : norm_Xk; }
};

/// Column j of X_k (1-based) depends only on the first j+1 reflectors, so it
/// is the same for every k >= j.
Vector bridge_column(const BidiagFactorization& f, const LinearOperator& op, Index j);

/// Columns of X_k stacked ((top+m) x k), computed in binary64.
Matrix compute_Xk_matrix(const BidiagFactorization& f, const LinearOperator& op);

/// ||X_k|| by dense SVD of the stack. `norm_a` <= 0 means compute ||A||.
BackwardErrorReport compute_Xk(const BidiagFactorization& f, const LinearOperator& op, double norm_a = 0.0);

/// Running ||X_j|| for j = 1, 2, ...: keeps X^T X and takes its largest eigenvalue.
class BackwardErrorTracker {
public:
    BackwardErrorTracker(const LinearOperator& op, double norm_a);

    /// Appends column j = current_k + 1 from the driver state and returns ||X_j||.
    double extend(const LanczosBidiagonalization& lb);
    Index k() const noexcept { return gram_.rows(); }
    double norm_a() const noexcept { return norm_a_; }

private:
    LinearOperator op64_;
    double norm_a_;
    std::vector<Vector> columns_;
    Matrix gram_;
};

/// Full-reorthogonalization run of k steps followed by ||X_k|| / ||A||.
double exact_equivalence_residual(const LinearOperator& op, const Eigen::Ref<const Vector>& b, Index k);

/// Structure of W_1...W_l, W_j = I - w_j w_j^T, w_j = (-e_j; q_j), for a matrix
/// Q with unit columns.
struct StructureReport {
    Index l = 0;
    Index r = 0;
    Matrix M;                    ///< strictly upper triangular part of Q^T Q
    Matrix S;                    ///< (I + M)^{-1} M
    double norm_M = 0.0;
    double norm_S = 0.0;
    double block_residual = 0.0; ///< max over the four blocks of ||product - formula||
    double slack_unit = 0.0;     ///< 1 - ||S||
    double slack_lower = 0.0;    ///< ||S|| - ||M|| / (1 + ||M||)
    double slack_upper = 0.0;    ///< 2 ||M|| - ||S||
};

/// Throws InvalidInput when a column norm is off 1 by more than 4 r u.
StructureReport structure_report(const Eigen::Ref<const Matrix>& Q);

}  // namespace lbro

#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "lbro/bidiag.hpp"

namespace lbro {

struct LsqrIterate {
    Index k = 0;
    double residual_estimate = 0.0;         ///< |phi_bar_{k+1}| = ||b - A x_k|| in exact arithmetic
    double normal_residual_estimate = 0.0;  ///< ||A^T r_k|| estimate
    double true_residual = 0.0;             ///< ||b - A x_k|| recomputed, NaN when not requested
    double oracle_gap = 0.0;                ///< ||x_k - V_k y_k|| / ||x_k||
    double nu_k = 0.0;                      ///< orthogonality level of V_k
};

struct LsqrOptions {
    double atol = 1e-12;
    std::optional<bool> true_residual;  ///< default: dense operators only
    bool oracle_gap = true;
    bool track_nu = true;
    BidiagOptions bidiag;
};

struct LsqrResult {
    Vector x;
    Index k = 0;
    bool converged = false;  ///< stopping test met (includes exact termination)
    Status status = Status::Running;
    std::vector<LsqrIterate> history;
};

/// Paige-Saunders LSQR on top of the bidiagonalization. Stops at k_max or when
/// ||A^T r_k|| <= atol ||A|| ||r_k|| or ||r_k|| <= atol (||A|| ||x_k|| + ||b||).
LsqrResult lsqr_solve(const LinearOperator& op, const Eigen::Ref<const Vector>& b, Index k_max,
                      const ReorthPolicy& policy, const LsqrOptions& options = {});

/// argmin_y ||B y - beta1 e_1|| by Givens QR and back substitution.
Vector projected_solve(const LowerBidiagonal& B, double beta1);

/// Gap between the recursive iterate and V_k projected_solve(B_k, beta_1)
/// after k steps (absolute when the iterate is zero).
double oracle_gap(const LinearOperator& op, const Eigen::Ref<const Vector>& b, const ReorthPolicy& policy, Index k);

/// k, residual_estimate, true_residual, oracle_gap, nu_k
void write_lsqr_csv(std::ostream& out, const LsqrResult& result);

}  // namespace lbro

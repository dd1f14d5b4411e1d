#pragma once

#include <span>
#include <string>
#include <vector>

#include "lbro/linops.hpp"

namespace lbro {

enum class ReorthKind { None, Full, OneSided, Partial, Semi };

/// Left = the u (range) vectors, Right = the v (domain) vectors.
enum class Side { Left, Right };

/// Which previous Lanczos vectors a new vector is orthogonalized against.
///
/// Partial follows the PROPACK convention: reorthogonalization is triggered
/// when an estimated inner product exceeds `delta`, and then covers every
/// index interval around the offenders whose estimates are at least `eta`,
/// widened by one neighbor on each side. The step after an event repeats the
/// same targets.
struct ReorthPolicy {
    ReorthKind kind = ReorthKind::Full;
    Side side = Side::Right;   ///< OneSided: the side that is reorthogonalized
    double eta = 1e-10;        ///< Partial: orthogonality level kept after an event
    double delta = 0.0;        ///< Partial: trigger level; 0 means sqrt(eps / k_max)
    double threshold = 0.0;    ///< Semi: trigger level
    bool include_local = true; ///< whether u_i (resp. v_i) is a target for u_{i+1} (v_{i+1})
    int passes = 2;            ///< classical Gram-Schmidt passes

    static ReorthPolicy none();
    static ReorthPolicy full(int passes = 2);
    static ReorthPolicy one_sided(Side side, int passes = 2);
    static ReorthPolicy partial(double eta = 1e-10, double delta = 0.0);
    static ReorthPolicy semi(double threshold);

    /// Throws InvalidInput for out-of-range parameters.
    void validate() const;
    std::string describe() const;
};

/// 0-based column indices, ascending.
using IndexSet = std::vector<Index>;

/// Running estimates of u_j^T u_new and v_j^T v_new for the newest vector on
/// each side, propagated by the coupled recurrence of the bidiagonalization.
/// The newest vector's own entry is 1.
struct OmegaEstimate {
    std::vector<double> left{1.0};
    std::vector<double> right{1.0};
    double floor = 0x1p-53;   ///< unit roundoff used for clamping
    double reset = 100 * 0x1p-53;  ///< value written for freshly reorthogonalized indices

    std::vector<double>& side(Side s) { return s == Side::Left ? left : right; }
    const std::vector<double>& side(Side s) const { return s == Side::Left ? left : right; }
    /// Largest |estimate| over previous vectors (excludes the newest itself).
    double max_previous(Side s) const;
};

/// Advances the estimates to the new vector on `side` produced at step `i`
/// (1-based). `alphas`/`betas` hold alpha_1.. and beta_1..; `new_norm` is the
/// pre-reorthogonalization norm (beta'_{i+1} for Left, alpha'_{i+1} for Right).
/// For Right, betas must already contain beta_{i+1}.
void omega_update(OmegaEstimate& omega, Side side, Index i, std::span<const double> alphas,
                  std::span<const double> betas, double new_norm, double norm_a_est);

/// Sets the estimates of `targets` (on the newest vector of `side`) to the reset level.
void omega_reset(OmegaEstimate& omega, Side side, const IndexSet& targets);

/// Target set among previous vectors 0..i-1 for the new vector on `side`.
/// `estimates` must hold at least i entries (the previous-vector estimates).
IndexSet select_targets(const ReorthPolicy& policy, Side side, Index i, std::span<const double> estimates);

struct Orthogonalized {
    Vector w;          ///< w with the target projections removed
    Vector coeffs;     ///< one entry per basis column; zero for non-targets
    Index inner_products = 0;
    double norm_before = 0.0;
    double norm_after = 0.0;
};

/// Classical Gram-Schmidt against basis columns `targets`, repeated `passes`
/// times; coefficients accumulate across passes.
Orthogonalized orthogonalize(const Eigen::Ref<const Vector>& w, const Eigen::Ref<const Matrix>& basis,
                             const IndexSet& targets, int passes, Precision precision = Precision::binary64);

/// Stateful driver for one factorization: owns the estimates, the pending
/// forced targets of the partial strategy, and the event counters.
class Reorthogonalizer {
public:
    Reorthogonalizer(ReorthPolicy policy, Precision precision, double norm_a_est, Index k_max);

    /// Updates the estimates for the new vector and returns its targets.
    IndexSet plan(Side side, Index i, std::span<const double> alphas, std::span<const double> betas,
                  double new_norm);
    /// Records that `targets` were applied to the new vector on `side`.
    void commit(Side side, const IndexSet& targets, Index inner_products);

    const ReorthPolicy& policy() const noexcept { return policy_; }
    const OmegaEstimate& omega() const noexcept { return omega_; }
    Index events(Side side) const noexcept { return side == Side::Left ? events_left_ : events_right_; }
    Index inner_products() const noexcept { return inner_products_; }

private:
    ReorthPolicy policy_;
    double norm_a_est_;
    OmegaEstimate omega_;
    IndexSet forced_left_;
    IndexSet forced_right_;
    Index events_left_ = 0;
    Index events_right_ = 0;
    Index inner_products_ = 0;
};

}  // namespace lbro

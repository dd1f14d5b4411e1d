#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lbro/bidiag.hpp"

namespace lbro {

/// How much of the singular vectors bidiag_svd accumulates.
enum class VectorMode {
    None,
    LastRow,  ///< only the last rows of H and Z (enough for residual estimates)
    Full
};

/// Compact SVD B = H diag(theta) Z^T of a lower bidiagonal matrix.
struct BidiagSvd {
    Vector theta;   ///< descending, nonnegative
    Matrix H;       ///< B.rows() x k (Full only)
    Matrix Z;       ///< k x k (Full only)
    Vector h_last;  ///< last row of H (LastRow and Full)
    Vector z_last;  ///< last row of Z (LastRow and Full)
};

/// Givens QR to upper bidiagonal form followed by implicit-shift QR sweeps
/// with zero-diagonal deflation. Ties keep the sweep order (stable sort).
/// The values are then polished by bisection on Sturm counts of the
/// Golub-Kahan tridiagonal of B, so theta is accurate to a few ulps.
/// Throws ConvergenceError if the sweeps do not converge.
BidiagSvd bidiag_svd(const LowerBidiagonal& B, VectorMode mode = VectorMode::Full);

/// Singular values of an upper bidiagonal matrix (diagonal d, superdiagonal e).
Vector upper_bidiag_singular_values(Vector d, Vector e);

/// Approximate singular triplets (theta_i, x_i = U h_i, y_i = V_k z_i).
struct RitzDecomposition {
    Index k = 0;
    BidiagSvd svd;
    Matrix X;
    Matrix Y;
    Vector residuals;  ///< max(||A y - theta x||, ||A^T x - theta y||), recomputed with the operator
};

RitzDecomposition ritz_triplets(const BidiagFactorization& f, const BidiagSvd& svd, const LinearOperator& op);

/// Which Ritz values to follow: the `count` largest or the `count` smallest.
struct WatchSpec {
    enum class End { Largest, Smallest };
    End end = End::Largest;
    Index count = 4;

    /// "largest:4", "smallest:2", or a bare count (largest).
    static WatchSpec parse(const std::string& text);
    std::string describe() const;
};

/// Ritz value index (1-based from the top) of watched position w at step k, or 0.
Index watched_index(const WatchSpec& watch, Index w, Index k);

struct GhostFlag {
    Index step = 0;
    Index first = 0;   ///< 1-based Ritz indices of the suspicious pair
    Index second = 0;
    double value = 0.0;
    double overlap = 0.0;  ///< |y_first^T y_second|
};

struct ConvergenceHistory {
    WatchSpec watch;
    double tol = 0.0;
    double norm_a = 0.0;
    std::vector<Index> steps;
    std::vector<std::vector<double>> values;     ///< [w][t], NaN while fewer than w values exist
    std::vector<std::vector<double>> residuals;  ///< [w][t]
    std::vector<Index> converged_at;             ///< first step with residual <= tol ||A||, 0 if never
    std::vector<bool> converged;                 ///< state at the last step
    std::vector<GhostFlag> ghosts;
    Vector final_values;                         ///< all Ritz values at the last step
    Index final_k = 0;
    Status status = Status::Running;

    double value(Index w, Index step) const;     ///< w 1-based, step 1-based
};

struct TrackOptions {
    double tol = 0.0;         ///< 0 means 1e-10 in binary64 and 1e-4 in binary32
    double norm_a = 0.0;      ///< 0 means spectral_norm(op)
    Index ghost_stride = 10;  ///< steps between ghost checks (the last step is always checked)
    BidiagOptions bidiag;
};

ConvergenceHistory track_convergence(const LinearOperator& op, const Eigen::Ref<const Vector>& b,
                                     const ReorthPolicy& policy, Index k_max, const WatchSpec& watch,
                                     const TrackOptions& options = {});

/// |s_i - s_j| at the last step for watched positions i, j (1-based).
/// Throws StateError unless both have converged.
double multiplicity_gap(const ConvergenceHistory& history, Index i, Index j);

/// k, s_watch_1.., res_watch_1..
void write_convergence_csv(std::ostream& out, const ConvergenceHistory& history);

}  // namespace lbro

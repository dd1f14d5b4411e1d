#include "lbro/svdapprox.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "lbro/errors.hpp"

namespace lbro {

namespace {

constexpr double kEps = 0x1p-53;

struct Rotation {
    double c = 1.0;
    double s = 0.0;
    double r = 0.0;
};

Rotation make_rotation(double y, double z) {
    const double r = std::hypot(y, z);
    if (r == 0.0) return {1.0, 0.0, 0.0};
    return {y / r, z / r, r};
}

// Columns (i, j) of m become (c m_i + s m_j, -s m_i + c m_j).
void rotate_cols(Matrix* m, Index i, Index j, double c, double s) {
    if (m == nullptr || m->size() == 0) return;
    for (Index t = 0; t < m->rows(); ++t) {
        const double a = (*m)(t, i);
        const double b = (*m)(t, j);
        (*m)(t, i) = c * a + s * b;
        (*m)(t, j) = -s * a + c * b;
    }
}

// B = P diag(d) W^T for upper bidiagonal B(d, e); left accumulates P, right W.
void bidiag_qr(Vector& d, Vector& e, Matrix* left, Matrix* right) {
    const Index n = d.size();
    if (n <= 1) return;
    double bnorm = 0.0;
    for (Index i = 0; i < n; ++i) bnorm = std::max(bnorm, std::abs(d[i]));
    for (Index i = 0; i + 1 < n; ++i) bnorm = std::max(bnorm, std::abs(e[i]));
    if (bnorm == 0.0) return;
    const double tol = 4.0 * kEps;
    const long long max_iter = 30LL * n * n + 100;
    long long iter = 0;

    Index q = n - 1;
    while (q > 0) {
        for (Index i = 0; i < q; ++i) {
            if (std::abs(e[i]) <= tol * (std::abs(d[i]) + std::abs(d[i + 1])) ||
                std::abs(e[i]) <= kEps * kEps * bnorm) {
                e[i] = 0.0;
            }
        }
        while (q > 0 && e[q - 1] == 0.0) --q;
        if (q == 0) break;
        Index p = q - 1;
        while (p > 0 && e[p - 1] != 0.0) --p;

        if (++iter > max_iter) {
            throw ConvergenceError("bidiag_svd: QR sweeps did not converge", std::abs(e[q - 1]));
        }

        // Negligible diagonal entry: rotate its off-diagonal neighbour away.
        Index zero = -1;
        for (Index i = p; i <= q; ++i) {
            if (std::abs(d[i]) <= kEps * bnorm) {
                zero = i;
                break;
            }
        }
        if (zero >= 0) {
            const Index i = zero;
            d[i] = 0.0;
            if (i < q) {
                double z = e[i];
                e[i] = 0.0;
                for (Index j = i + 1; j <= q; ++j) {
                    const Rotation g = make_rotation(d[j], z);
                    d[j] = g.r;
                    if (j < q) {
                        z = -g.s * e[j];
                        e[j] = g.c * e[j];
                    }
                    rotate_cols(left, j, i, g.c, g.s);
                }
            } else {
                double z = e[q - 1];
                e[q - 1] = 0.0;
                for (Index j = q - 1; j >= p; --j) {
                    const Rotation g = make_rotation(d[j], z);
                    d[j] = g.r;
                    if (j > p) {
                        z = -g.s * e[j - 1];
                        e[j - 1] = g.c * e[j - 1];
                    }
                    rotate_cols(right, j, q, g.c, g.s);
                }
            }
            continue;
        }

        // Wilkinson shift from the trailing 2x2 block of B^T B.
        const double dm = d[q - 1];
        const double em = e[q - 1];
        const double t11 = dm * dm + (q - 1 > p ? e[q - 2] * e[q - 2] : 0.0);
        const double t12 = dm * em;
        const double t22 = d[q] * d[q] + em * em;
        double mu = t22;
        if (t12 != 0.0) {
            const double delta = 0.5 * (t11 - t22);
            const double h = std::hypot(delta, t12);
            mu = t22 - t12 * t12 / (delta + (delta >= 0.0 ? h : -h));
        }

        double y = d[p] * d[p] - mu;
        double z = d[p] * e[p];
        for (Index i = p; i < q; ++i) {
            Rotation g = make_rotation(y, z);
            if (i > p) e[i - 1] = g.r;
            const double f = g.c * d[i] + g.s * e[i];
            e[i] = -g.s * d[i] + g.c * e[i];
            d[i] = f;
            const double bulge = g.s * d[i + 1];
            d[i + 1] = g.c * d[i + 1];
            rotate_cols(right, i, i + 1, g.c, g.s);

            g = make_rotation(d[i], bulge);
            d[i] = g.r;
            const double f2 = g.c * e[i] + g.s * d[i + 1];
            d[i + 1] = -g.s * e[i] + g.c * d[i + 1];
            e[i] = f2;
            if (i + 1 < q) {
                y = e[i];
                z = g.s * e[i + 1];
                e[i + 1] = g.c * e[i + 1];
            }
            rotate_cols(left, i, i + 1, g.c, g.s);
        }
    }
}

void negate_col(Matrix* m, Index j) {
    if (m != nullptr && m->size() > 0) m->col(j) = -m->col(j);
}

Matrix permute_cols(const Matrix& m, const std::vector<Index>& order) {
    if (m.size() == 0) return m;
    Matrix out(m.rows(), m.cols());
    for (std::size_t t = 0; t < order.size(); ++t) out.col(static_cast<Index>(t)) = m.col(order[t]);
    return out;
}

std::vector<Index> descending_order(const Vector& d) {
    std::vector<Index> order(static_cast<std::size_t>(d.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return d[a] > d[b]; });
    return order;
}


// Number of eigenvalues below x > 0 of the Golub-Kahan tridiagonal [0 B; B^T 0]
// with off-diagonals alpha_1, beta_2, alpha_2, ... (LDL^T pivot signs).
Index tgk_count_below(const Vector& c2, double x, double pivmin) {
    Index count = 0;
    double q = -x;
    if (q < 0.0) ++count;
    for (Index i = 0; i < c2.size(); ++i) {
        if (std::abs(q) < pivmin) q = -pivmin;
        q = -x - c2[i] / q;
        if (q < 0.0) ++count;
    }
    return count;
}

// Bisection polish of the QR values. theta is descending; the j-th largest
// value is bracketed by Sturm counts starting from a small window around it.
void refine_values(const LowerBidiagonal& B, Vector& theta) {
    const Index k = B.cols();
    Vector c2(B.diag.size() + B.sub.size());
    for (Index i = 0; i < k; ++i) {
        c2[2 * i] = B.diag[i] * B.diag[i];
        if (i < B.sub.size()) c2[2 * i + 1] = B.sub[i] * B.sub[i];
    }
    const double cmax = c2.size() > 0 ? c2.maxCoeff() : 0.0;
    if (cmax == 0.0) return;
    const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, cmax);
    double bound = 0.0;
    for (Index i = 0; i <= c2.size(); ++i) {
        const double left = i > 0 ? std::sqrt(c2[i - 1]) : 0.0;
        const double right = i < c2.size() ? std::sqrt(c2[i]) : 0.0;
        bound = std::max(bound, left + right);
    }
    // eigenvalues at or below zero: the k negatives plus the zero of a rectangular B
    const Index base = c2.size() + 1 - k;
    auto below = [&](double x) { return tgk_count_below(c2, x, pivmin) - base; };

    for (Index j = 0; j < k; ++j) {
        const Index rank = k - 1 - j;  // values strictly below sigma_j
        double w = 64.0 * kEps * bound;
        double lo = 0.0, hi = bound * (1.0 + 4.0 * kEps);
        for (int widen = 0; widen < 12; ++widen, w *= 16.0) {
            const double l = std::max(0.0, theta[j] - w);
            const double h = std::min(bound * (1.0 + 4.0 * kEps), theta[j] + w);
            if ((l == 0.0 || below(l) <= rank) && below(h) > rank) {
                lo = l;
                hi = h;
                break;
            }
        }
        for (int it = 0; it < 256; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (hi - lo <= 2.0 * kEps * hi || hi <= std::numeric_limits<double>::min() || mid <= lo || mid >= hi) break;
            if (below(mid) <= rank) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        theta[j] = 0.5 * (lo + hi);
    }
    for (Index j = k - 2; j >= 0; --j) theta[j] = std::max(theta[j], theta[j + 1]);
}

}  // namespace

Vector upper_bidiag_singular_values(Vector d, Vector e) {
    if (e.size() + 1 != d.size() && !(d.size() == 0 && e.size() == 0)) {
        throw DimensionError("upper_bidiag_singular_values: need n diagonal and n-1 superdiagonal entries");
    }
    bidiag_qr(d, e, nullptr, nullptr);
    d = d.cwiseAbs();
    std::stable_sort(d.data(), d.data() + d.size(), std::greater<double>());
    return d;
}

BidiagSvd bidiag_svd(const LowerBidiagonal& B, VectorMode mode) {
    const Index k = B.cols();
    const Index rows = B.rows();
    if (B.sub.size() != rows - 1 && k > 0) throw DimensionError("bidiag_svd: malformed bidiagonal");
    BidiagSvd out;
    if (k == 0) return out;
    if (!B.diag.allFinite() || !B.sub.allFinite()) throw InvalidInput("bidiag_svd: non-finite entries");

    // Givens QR: rotation i mixes rows i and i+1 and leaves R upper bidiagonal.
    Vector d(k), e(std::max<Index>(k - 1, 0));
    Matrix Q;
    Matrix last_row;
    if (mode == VectorMode::Full) Q = Matrix::Identity(rows, rows);
    if (mode != VectorMode::None) {
        last_row = Matrix::Zero(1, rows);
        last_row(0, rows - 1) = 1.0;
    }
    double rho_bar = B.diag[0];
    for (Index i = 0; i < k; ++i) {
        if (i + 1 < rows) {
            const Rotation g = make_rotation(rho_bar, B.sub[i]);
            d[i] = g.r;
            if (i + 1 < k) {
                e[i] = g.s * B.diag[i + 1];
                rho_bar = g.c * B.diag[i + 1];
            }
            if (mode == VectorMode::Full) rotate_cols(&Q, i, i + 1, g.c, g.s);
            if (mode != VectorMode::None) rotate_cols(&last_row, i, i + 1, g.c, g.s);
        } else {
            d[i] = rho_bar;
        }
    }

    Matrix left, right;
    if (mode == VectorMode::Full) {
        left = Q.leftCols(k);
        right = Matrix::Identity(k, k);
    } else if (mode == VectorMode::LastRow) {
        left = last_row.leftCols(k);
        right = Matrix::Zero(1, k);
        right(0, k - 1) = 1.0;
    }
    Matrix* lp = mode == VectorMode::None ? nullptr : &left;
    Matrix* rp = mode == VectorMode::None ? nullptr : &right;
    bidiag_qr(d, e, lp, rp);

    for (Index i = 0; i < k; ++i) {
        if (d[i] < 0.0) {
            d[i] = -d[i];
            negate_col(rp, i);
        }
    }
    const std::vector<Index> order = descending_order(d);
    out.theta.resize(k);
    for (Index t = 0; t < k; ++t) out.theta[t] = d[order[static_cast<std::size_t>(t)]];
    refine_values(B, out.theta);
    if (mode == VectorMode::Full) {
        out.H = permute_cols(left, order);
        out.Z = permute_cols(right, order);
        out.h_last = out.H.row(rows - 1).transpose();
        out.z_last = out.Z.row(k - 1).transpose();
    } else if (mode == VectorMode::LastRow) {
        out.h_last = permute_cols(left, order).row(0).transpose();
        out.z_last = permute_cols(right, order).row(0).transpose();
    }
    return out;
}

RitzDecomposition ritz_triplets(const BidiagFactorization& f, const BidiagSvd& svd, const LinearOperator& op) {
    if (svd.theta.size() != f.k || svd.H.cols() != f.k || svd.H.rows() != f.U.cols()) {
        throw DimensionError("ritz_triplets: decomposition does not match the factorization");
    }
    RitzDecomposition r;
    r.k = f.k;
    r.svd = svd;
    r.X = f.U * svd.H;
    r.Y = f.V.leftCols(f.k) * svd.Z;
    r.residuals.resize(f.k);
    for (Index i = 0; i < f.k; ++i) {
        const double s = svd.theta[i];
        const double a = (op.apply(r.Y.col(i)) - s * r.X.col(i)).norm();
        const double b = (op.apply_adjoint(r.X.col(i)) - s * r.Y.col(i)).norm();
        r.residuals[i] = std::max(a, b);
    }
    return r;
}

WatchSpec WatchSpec::parse(const std::string& text) {
    WatchSpec w;
    std::string head = text;
    std::string count;
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        head = text.substr(0, colon);
        count = text.substr(colon + 1);
    } else if (!text.empty() && std::isdigit(static_cast<unsigned char>(text[0]))) {
        head = "largest";
        count = text;
    }
    if (head == "largest") {
        w.end = End::Largest;
    } else if (head == "smallest") {
        w.end = End::Smallest;
    } else {
        throw InvalidInput("watch: expected largest[:j] or smallest[:j], got '" + text + "'");
    }
    if (!count.empty()) {
        try {
            std::size_t used = 0;
            const long long c = std::stoll(count, &used);
            if (used != count.size() || c < 1) throw InvalidInput("watch: bad count");
            w.count = static_cast<Index>(c);
        } catch (const std::logic_error&) {
            throw InvalidInput("watch: bad count in '" + text + "'");
        }
    }
    return w;
}

std::string WatchSpec::describe() const {
    return std::string(end == End::Largest ? "largest" : "smallest") + ":" + std::to_string(count);
}

Index watched_index(const WatchSpec& watch, Index w, Index k) {
    if (w < 1 || w > k) return 0;
    return watch.end == WatchSpec::End::Largest ? w : k - w + 1;
}

double ConvergenceHistory::value(Index w, Index step) const {
    if (w < 1 || w > static_cast<Index>(values.size())) throw DimensionError("history: watch position out of range");
    const auto it = std::find(steps.begin(), steps.end(), step);
    if (it == steps.end()) throw DimensionError("history: step not recorded");
    return values[static_cast<std::size_t>(w - 1)][static_cast<std::size_t>(it - steps.begin())];
}

ConvergenceHistory track_convergence(const LinearOperator& op, const Eigen::Ref<const Vector>& b,
                                     const ReorthPolicy& policy, Index k_max, const WatchSpec& watch,
                                     const TrackOptions& options) {
    ConvergenceHistory h;
    h.watch = watch;
    h.tol = options.tol > 0.0 ? options.tol : (op.precision() == Precision::binary32 ? 1e-4 : 1e-10);
    h.norm_a = options.norm_a > 0.0 ? options.norm_a : spectral_norm(op);
    const auto nw = static_cast<std::size_t>(watch.count);
    h.values.assign(nw, {});
    h.residuals.assign(nw, {});
    h.converged_at.assign(nw, 0);
    h.converged.assign(nw, false);

    BidiagOptions bo = options.bidiag;
    if (bo.norm_a_est <= 0.0) bo.norm_a_est = h.norm_a;
    bo.keep_pre_vectors = false;
    LanczosBidiagonalization lb(op, b, policy, k_max, bo);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double threshold = h.tol * h.norm_a;

    while (lb.running()) {
        const StepRecord& rec = lb.step();
        const Index k = lb.k();
        const LowerBidiagonal B = lb.B();
        const BidiagSvd svd = bidiag_svd(B, VectorMode::LastRow);
        Vector res(k);
        for (Index i = 0; i < k; ++i) {
            res[i] = B.square() ? rec.beta * std::abs(svd.z_last[i]) : rec.alpha * std::abs(svd.h_last[i]);
        }
        h.steps.push_back(k);
        for (Index w = 1; w <= watch.count; ++w) {
            const Index idx = watched_index(watch, w, k);
            const auto ws = static_cast<std::size_t>(w - 1);
            h.values[ws].push_back(idx ? svd.theta[idx - 1] : nan);
            h.residuals[ws].push_back(idx ? res[idx - 1] : nan);
            const bool conv = idx && res[idx - 1] <= threshold;
            if (conv && h.converged_at[ws] == 0) h.converged_at[ws] = k;
            h.converged[ws] = conv;
        }

        const bool last = !lb.running();
        if (!(last || (options.ghost_stride > 0 && k % options.ghost_stride == 0))) continue;
        // Two converged Ritz values that coincide but whose Ritz vectors are far
        // from orthogonal approximate the same singular vector twice.
        std::vector<std::pair<Index, Index>> pairs;
        for (Index i = 0; i < k; ++i) {
            if (res[i] > threshold) continue;
            for (Index j = i + 1; j < k; ++j) {
                if (res[j] <= threshold && std::abs(svd.theta[i] - svd.theta[j]) <= 10.0 * threshold) {
                    pairs.emplace_back(i, j);
                }
            }
        }
        if (pairs.empty()) continue;
        const BidiagSvd full = bidiag_svd(B, VectorMode::Full);
        const auto Vk = lb.V().leftCols(k);
        for (const auto& [i, j] : pairs) {
            const Vector yi = Vk * full.Z.col(i);
            const Vector yj = Vk * full.Z.col(j);
            const double overlap = std::abs(yi.dot(yj)) / (yi.norm() * yj.norm());
            if (overlap > 0.5) h.ghosts.push_back(GhostFlag{k, i + 1, j + 1, full.theta[i], overlap});
        }
    }
    h.final_k = lb.k();
    h.status = lb.status();
    if (lb.k() > 0) h.final_values = bidiag_svd(lb.B(), VectorMode::None).theta;
    return h;
}

double multiplicity_gap(const ConvergenceHistory& history, Index i, Index j) {
    const Index nw = static_cast<Index>(history.values.size());
    if (i < 1 || j < 1 || i > nw || j > nw) throw DimensionError("multiplicity_gap: watch position out of range");
    if (!history.converged[static_cast<std::size_t>(i - 1)] || !history.converged[static_cast<std::size_t>(j - 1)]) {
        throw StateError("multiplicity_gap: both Ritz values must have converged");
    }
    return std::abs(history.values[static_cast<std::size_t>(i - 1)].back() -
                    history.values[static_cast<std::size_t>(j - 1)].back());
}

void write_convergence_csv(std::ostream& out, const ConvergenceHistory& history) {
    const Index nw = static_cast<Index>(history.values.size());
    out << 'k';
    for (Index w = 1; w <= nw; ++w) out << ",s_watch_" << w;
    for (Index w = 1; w <= nw; ++w) out << ",res_watch_" << w;
    out << '\n' << std::setprecision(17);
    for (std::size_t t = 0; t < history.steps.size(); ++t) {
        out << history.steps[t];
        for (Index w = 0; w < nw; ++w) out << ',' << history.values[static_cast<std::size_t>(w)][t];
        for (Index w = 0; w < nw; ++w) out << ',' << history.residuals[static_cast<std::size_t>(w)][t];
        out << '\n';
    }
}

}  // namespace lbro

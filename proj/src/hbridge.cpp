#include "lbro/hbridge.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "lbro/errors.hpp"

namespace lbro {

ReflectorChain::ReflectorChain(Index top, const Eigen::Ref<const Matrix>& u_vectors) : top_(top), u_(u_vectors) {
    if (u_.cols() > top_) throw DimensionError("ReflectorChain: more reflectors than top dimensions");
}

namespace {

// z <- (I - p_i p_i^T) z with p_i = (-e_i; u_i), i 1-based.
void reflect(Eigen::Ref<Vector> z, const Eigen::Ref<const Vector>& u, Index i) {
    const double dot = -z[i - 1] + u.dot(z.tail(u.size()));
    z[i - 1] += dot;
    z.tail(u.size()) -= dot * u;
}

}  // namespace

Vector ReflectorChain::apply(const Eigen::Ref<const Vector>& x, Order order, Index count) const {
    if (x.size() != dimension()) {
        throw DimensionError("apply_chain: expected length " + std::to_string(dimension()) + ", got " +
                             std::to_string(x.size()));
    }
    const Index c = count < 0 ? size() : std::min(count, size());
    Vector z = x;
    if (order == Order::Forward) {
        for (Index i = c; i >= 1; --i) reflect(z, u_.col(i - 1), i);
    } else {
        for (Index i = 1; i <= c; ++i) reflect(z, u_.col(i - 1), i);
    }
    return z;
}

Vector apply_chain(const ReflectorChain& chain, const Eigen::Ref<const Vector>& x, ReflectorChain::Order order) {
    return chain.apply(x, order);
}

namespace {

Index top_dimension(Index m, Index n) { return m == n ? n : n + 1; }

// Column j (1-based) of X: P_1...P_c (alpha_j e_j + beta_{j+1} e_{j+1}; 0) - (0; A v_j).
Vector bridge_column_impl(Index top, const Eigen::Ref<const Matrix>& U, double alpha_j, double beta_next,
                          const Eigen::Ref<const Vector>& av, Index j) {
    const Index m = U.rows();
    const Index c = std::min({j + 1, U.cols(), top});
    Vector z = Vector::Zero(top + m);
    z[j - 1] = alpha_j;
    if (c >= j + 1) z[j] = beta_next;
    for (Index i = c; i >= 1; --i) reflect(z, U.col(i - 1), i);
    z.tail(m) -= av;
    return z;
}

LinearOperator as_binary64(const LinearOperator& op) {
    return op.precision() == Precision::binary64 ? op : op.with_precision(Precision::binary64);
}

}  // namespace

ReflectorChain make_chain(const BidiagFactorization& f, Index n) {
    const Index top = top_dimension(f.U.rows(), n);
    return ReflectorChain(top, f.U.leftCols(std::min(f.U.cols(), top)));
}

Vector bridge_column(const BidiagFactorization& f, const LinearOperator& op, Index j) {
    if (j < 1 || j > f.k) throw DimensionError("bridge_column: column index outside 1..k");
    if (op.rows() != f.U.rows() || op.cols() != f.V.rows()) throw DimensionError("bridge_column: operator shape");
    const Index top = top_dimension(op.rows(), op.cols());
    const double beta_next = j < static_cast<Index>(f.betas.size()) ? f.betas[static_cast<std::size_t>(j)] : 0.0;
    const Vector av = as_binary64(op).apply(f.V.col(j - 1));
    return bridge_column_impl(top, f.U, f.alphas[static_cast<std::size_t>(j - 1)], beta_next, av, j);
}

Matrix compute_Xk_matrix(const BidiagFactorization& f, const LinearOperator& op) {
    if (op.rows() != f.U.rows() || op.cols() != f.V.rows()) throw DimensionError("compute_Xk: operator shape");
    const LinearOperator a = as_binary64(op);
    const Index top = top_dimension(op.rows(), op.cols());
    Matrix X(top + op.rows(), f.k);
    for (Index j = 1; j <= f.k; ++j) {
        const double beta_next = j < static_cast<Index>(f.betas.size()) ? f.betas[static_cast<std::size_t>(j)] : 0.0;
        X.col(j - 1) =
            bridge_column_impl(top, f.U, f.alphas[static_cast<std::size_t>(j - 1)], beta_next, a.apply(f.V.col(j - 1)), j);
    }
    return X;
}

BackwardErrorReport compute_Xk(const BidiagFactorization& f, const LinearOperator& op, double norm_a) {
    if (f.k < 1) throw StateError("compute_Xk: factorization has no completed step");
    BackwardErrorReport rep;
    rep.k = f.k;
    const Matrix X = compute_Xk_matrix(f, op);
    rep.column_norms = X.colwise().norm().transpose();
    rep.norm_Xk = spectral_norm(X);
    rep.norm_A = norm_a > 0.0 ? norm_a : spectral_norm(op);
    return rep;
}

BackwardErrorTracker::BackwardErrorTracker(const LinearOperator& op, double norm_a)
    : op64_(as_binary64(op)), norm_a_(norm_a) {}

double BackwardErrorTracker::extend(const LanczosBidiagonalization& lb) {
    const Index top = top_dimension(op64_.rows(), op64_.cols());
    const auto U = lb.U();
    const auto V = lb.V();
    while (gram_.rows() < lb.k()) {
        const Index j = gram_.rows() + 1;
        const double beta_next = j < static_cast<Index>(lb.betas().size()) ? lb.betas()[static_cast<std::size_t>(j)] : 0.0;
        Vector x = bridge_column_impl(top, U, lb.alphas()[static_cast<std::size_t>(j - 1)], beta_next,
                                      op64_.apply(V.col(j - 1)), j);
        Matrix g(j, j);
        g.topLeftCorner(j - 1, j - 1) = gram_;
        for (Index t = 0; t + 1 < j; ++t) {
            const double d = columns_[static_cast<std::size_t>(t)].dot(x);
            g(t, j - 1) = d;
            g(j - 1, t) = d;
        }
        g(j - 1, j - 1) = x.squaredNorm();
        gram_ = std::move(g);
        columns_.push_back(std::move(x));
    }
    if (gram_.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram_, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double exact_equivalence_residual(const LinearOperator& op, const Eigen::Ref<const Vector>& b, Index k) {
    const BidiagFactorization f = run(op, b, k, ReorthPolicy::full());
    if (f.k == 0) return 0.0;
    return compute_Xk(f, op).normalized();
}

StructureReport structure_report(const Eigen::Ref<const Matrix>& Q) {
    const Index r = Q.rows();
    const Index l = Q.cols();
    if (l < 1 || l > r) throw DimensionError("structure_report: need 1 <= l <= r");
    const double u = unit_roundoff(Precision::binary64);
    for (Index j = 0; j < l; ++j) {
        if (std::abs(Q.col(j).norm() - 1.0) > 4.0 * static_cast<double>(r) * u) {
            throw InvalidInput("structure_report: column " + std::to_string(j + 1) + " is not of unit length");
        }
    }
    StructureReport rep;
    rep.l = l;
    rep.r = r;
    rep.M = Matrix(Q.transpose() * Q).triangularView<Eigen::StrictlyUpper>();
    const Matrix IpM = Matrix::Identity(l, l) + rep.M;
    rep.S = IpM.triangularView<Eigen::UnitUpper>().solve(rep.M);
    rep.norm_M = spectral_norm(rep.M);
    rep.norm_S = spectral_norm(rep.S);

    // W_1 ... W_l materialized on R^{l+r}.
    const Index dim = l + r;
    Matrix W = Matrix::Identity(dim, dim);
    Vector w(dim);
    for (Index j = 0; j < l; ++j) {
        w.setZero();
        w[j] = -1.0;
        w.tail(r) = Q.col(j);
        const Vector ww = W * w;
        W.noalias() -= ww * w.transpose();
    }
    const Matrix I_S = Matrix::Identity(l, l) - rep.S;
    const Matrix top_left = rep.S;
    const Matrix top_right = I_S * Q.transpose();
    const Matrix bottom_left = Q * I_S;
    const Matrix bottom_right = Matrix::Identity(r, r) - Q * I_S * Q.transpose();
    rep.block_residual = std::max({spectral_norm(W.topLeftCorner(l, l) - top_left),
                                   spectral_norm(W.topRightCorner(l, r) - top_right),
                                   spectral_norm(W.bottomLeftCorner(r, l) - bottom_left),
                                   spectral_norm(W.bottomRightCorner(r, r) - bottom_right)});
    rep.slack_unit = 1.0 - rep.norm_S;
    rep.slack_lower = rep.norm_S - rep.norm_M / (1.0 + rep.norm_M);
    rep.slack_upper = 2.0 * rep.norm_M - rep.norm_S;
    return rep;
}

}  // namespace lbro

#include "lbro/bidiag.hpp"

#include <cmath>
#include <random>

#include "lbro/errors.hpp"

namespace lbro {

std::string to_string(Status s) {
    switch (s) {
        case Status::Running: return "running";
        case Status::LuckyTermination: return "lucky";
        case Status::Completed: return "completed";
    }
    return "unknown";
}

Matrix LowerBidiagonal::to_dense() const {
    Matrix b = Matrix::Zero(rows(), cols());
    for (Index i = 0; i < cols(); ++i) b(i, i) = diag[i];
    for (Index i = 0; i < sub.size(); ++i) b(i + 1, i) = sub[i];
    return b;
}

LowerBidiagonal BidiagFactorization::B() const {
    LowerBidiagonal b;
    b.diag = Eigen::Map<const Vector>(alphas.data(), k);
    const Index nsub = U.cols() - 1;
    b.sub = nsub > 0 ? Vector(Eigen::Map<const Vector>(betas.data() + 1, nsub)) : Vector();
    return b;
}

double estimate_norm(const LinearOperator& op) { return spectral_norm(op, 1e-3); }

namespace {

double resolve_norm(const LinearOperator& op, const BidiagOptions& o) {
    if (o.norm_a_est > 0.0) return o.norm_a_est;
    return estimate_norm(op);
}

}  // namespace

LanczosBidiagonalization::LanczosBidiagonalization(const LinearOperator& op, const Eigen::Ref<const Vector>& b,
                                                   ReorthPolicy policy, Index k_max, BidiagOptions options)
    : op_(&op),
      precision_(op.precision()),
      norm_a_est_(resolve_norm(op, options)),
      tol_(options.term_tol > 0.0 ? options.term_tol : std::sqrt(unit_roundoff(op.precision()))),
      keep_pre_(options.keep_pre_vectors),
      k_max_(k_max),
      reorth_(policy, op.precision(), norm_a_est_, k_max) {
    if (b.size() != op.rows()) {
        throw DimensionError("bidiag: b has length " + std::to_string(b.size()) + ", operator has " +
                             std::to_string(op.rows()) + " rows");
    }
    if (!b.allFinite()) throw InvalidInput("bidiag: b has non-finite entries");
    if (k_max < 1 || k_max > op.cols()) {
        throw InvalidInput("bidiag: k_max must lie in [1, n]");
    }
    U_.resize(op.rows(), k_max + 1);
    V_.resize(op.cols(), k_max + 1);

    const Vector b0 = round_vec(b);
    const double beta1 = round_to(precision_, b0.norm());
    if (beta1 == 0.0) throw InvalidInput("bidiag: starting vector b is zero");
    betas_.push_back(beta1);
    U_.col(0) = round_vec(b0 / beta1);
    u_count_ = 1;

    Vector w = op.apply_adjoint(U_.col(0));
    const double alpha1 = round_to(precision_, w.norm());
    if (alpha1 <= tol_ * norm_a_est_) {
        v_tail_ = w;
        finish(Status::LuckyTermination, Vanished::Alpha);
        return;
    }
    alphas_.push_back(alpha1);
    V_.col(0) = round_vec(w / alpha1);
    v_count_ = 1;
}

Vector LanczosBidiagonalization::round_vec(Vector v) const {
    if (precision_ == Precision::binary32) {
        v = v.unaryExpr([](double x) { return round_to(Precision::binary32, x); });
    }
    return v;
}

void LanczosBidiagonalization::finish(Status s, Vanished w) {
    status_ = s;
    vanished_ = w;
    termination_step_ = k_;
}

const StepRecord& LanczosBidiagonalization::step() {
    if (!running()) throw StateError("bidiag: step called after the run stopped (" + to_string(status_) + ")");
    const Index i = k_ + 1;
    const LinearOperator& op = *op_;
    const bool square_end = op.rows() == op.cols() && i == op.cols();

    StepRecord rec;
    rec.step = i;

    // Left side: beta_{i+1} u_{i+1} = A v_i - alpha_i u_i - sum xi_{ji} u_j.
    Vector r = round_vec(op.apply(V_.col(i - 1)) - alphas_[static_cast<std::size_t>(i - 1)] * U_.col(i - 1));
    rec.beta_pre = round_to(precision_, r.norm());
    if (keep_pre_ && rec.beta_pre > 0.0) rec.u_pre = round_vec(r / rec.beta_pre);

    IndexSet targets;
    if (!square_end) {
        targets = reorth_.plan(Side::Left, i, alphas_, betas_, rec.beta_pre);
    }
    Orthogonalized left = orthogonalize(r, U_.leftCols(u_count_), targets, reorth_.policy().passes, precision_);
    reorth_.commit(Side::Left, targets, left.inner_products);
    rec.targets_u = targets;
    rec.cbar = left.coeffs;
    rec.inner_products += left.inner_products;
    rec.beta = left.norm_after;

    const bool beta_vanished = rec.beta <= tol_ * norm_a_est_;
    if (square_end || beta_vanished) {
        // m = n: U_n already spans R^m, so u_{n+1} is never formed.
        u_tail_ = left.w;
        k_ = i;
        steps_.push_back(std::move(rec));
        if (beta_vanished) {
            finish(Status::LuckyTermination, Vanished::Beta);
        } else {
            finish(Status::Completed, Vanished::None);
        }
        return steps_.back();
    }
    betas_.push_back(rec.beta);
    U_.col(u_count_++) = round_vec(left.w / rec.beta);

    // Right side: alpha_{i+1} v_{i+1} = A^T u_{i+1} - beta_{i+1} v_i - sum eta_{j,i+1} v_j.
    Vector s = round_vec(op.apply_adjoint(U_.col(i)) - rec.beta * V_.col(i - 1));
    rec.alpha_pre = round_to(precision_, s.norm());
    targets = reorth_.plan(Side::Right, i, alphas_, betas_, rec.alpha_pre);
    Orthogonalized right = orthogonalize(s, V_.leftCols(v_count_), targets, reorth_.policy().passes, precision_);
    reorth_.commit(Side::Right, targets, right.inner_products);
    rec.targets_v = targets;
    rec.dbar = right.coeffs;
    rec.inner_products += right.inner_products;
    rec.alpha = right.norm_after;
    k_ = i;

    if (rec.alpha <= tol_ * norm_a_est_) {
        v_tail_ = right.w;
        steps_.push_back(std::move(rec));
        finish(Status::LuckyTermination, Vanished::Alpha);
        return steps_.back();
    }
    alphas_.push_back(rec.alpha);
    V_.col(v_count_++) = round_vec(right.w / rec.alpha);
    steps_.push_back(std::move(rec));
    if (k_ == k_max_) finish(Status::Completed, Vanished::None);
    return steps_.back();
}

LowerBidiagonal LanczosBidiagonalization::B() const {
    LowerBidiagonal b;
    b.diag = Eigen::Map<const Vector>(alphas_.data(), k_);
    const Index nsub = u_count_ - 1;
    b.sub = nsub > 0 ? Vector(Eigen::Map<const Vector>(betas_.data() + 1, nsub)) : Vector();
    return b;
}

BidiagFactorization LanczosBidiagonalization::factorization() const {
    BidiagFactorization f;
    f.k = k_;
    f.alphas = alphas_;
    f.betas = betas_;
    f.U = U();
    f.V = V();
    f.C = Matrix::Zero(u_count_, k_);
    f.D = Matrix::Zero(k_, u_count_);
    for (const StepRecord& r : steps_) {
        const Index i = r.step;
        f.C.col(i - 1).head(i) = r.cbar.head(i);
        if (r.dbar.size() > 0 && i < u_count_) f.D.col(i).head(i) = r.dbar.head(i);
    }
    f.u_tail = u_tail_;
    f.v_tail = v_tail_;
    f.status = status_;
    f.vanished = vanished_;
    f.termination_step = termination_step_;
    f.norm_a_est = norm_a_est_;
    f.precision = precision_;
    f.steps = steps_;
    f.events_u = reorth_.events(Side::Left);
    f.events_v = reorth_.events(Side::Right);
    f.inner_products = reorth_.inner_products();
    return f;
}

BidiagFactorization run(const LinearOperator& op, const Eigen::Ref<const Vector>& b, Index k_max,
                        const ReorthPolicy& policy, BidiagOptions options) {
    LanczosBidiagonalization lb(op, b, policy, k_max, options);
    while (lb.running()) lb.step();
    return lb.factorization();
}

namespace {

Matrix apply_columns(const LinearOperator& op, const Eigen::Ref<const Matrix>& x, bool adjoint) {
    const LinearOperator a = op.precision() == Precision::binary64 ? op : op.with_precision(Precision::binary64);
    Matrix out(adjoint ? a.cols() : a.rows(), x.cols());
    for (Index j = 0; j < x.cols(); ++j) out.col(j) = adjoint ? a.apply_adjoint(x.col(j)) : a.apply(x.col(j));
    return out;
}

}  // namespace

double fundamental_residual(const BidiagFactorization& f, const LinearOperator& op) {
    if (f.k == 0) return 0.0;
    Matrix res = apply_columns(op, f.V.leftCols(f.k), false) - f.U * (f.B().to_dense() + f.C);
    if (f.U.cols() == f.k && f.u_tail.size() == res.rows()) res.col(f.k - 1) -= f.u_tail;
    return spectral_norm(res);
}

double adjoint_residual(const BidiagFactorization& f, const LinearOperator& op) {
    const Index uc = f.U.cols();
    Matrix res = apply_columns(op, f.U, true);
    if (f.k > 0) res -= f.V.leftCols(f.k) * (f.B().to_dense().transpose() + f.D);
    if (f.V.cols() > f.k) {
        res.col(uc - 1) -= f.alphas[static_cast<std::size_t>(f.k)] * f.V.col(f.k);
    } else if (f.v_tail.size() == res.rows()) {
        res.col(uc - 1) -= f.v_tail;
    }
    return spectral_norm(res);
}

double starting_residual(const BidiagFactorization& f, const Eigen::Ref<const Vector>& b) {
    return (f.beta1() * f.U.col(0) - b).norm();
}

Vector ones_vector(Index m) { return Vector::Ones(m); }

Vector random_vector(Index m, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    Vector v(m);
    for (Index i = 0; i < m; ++i) v[i] = normal(gen);
    return v;
}

}  // namespace lbro

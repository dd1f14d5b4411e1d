#include "lbro/linops.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/SVD>

#include "lbro/errors.hpp"

namespace lbro {

void require_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
    if (!m.allFinite()) {
        throw InvalidInput(std::string(what) + ": entries must be finite");
    }
}

namespace {

void require_finite_vector(const Eigen::Ref<const Vector>& v, const char* what) {
    if (!v.allFinite()) {
        throw InvalidInput(std::string(what) + ": input vector has non-finite entries");
    }
}

void check_shape(Index rows, Index cols) {
    if (rows < cols) {
        throw DimensionError("LinearOperator requires rows >= cols, got " + std::to_string(rows) + "x" +
                             std::to_string(cols));
    }
    if (cols < 1) {
        throw DimensionError("LinearOperator requires at least one column");
    }
}

}  // namespace

LinearOperator::LinearOperator(std::variant<RowMajorMatrix, SparseMatrix> storage, Precision precision)
    : storage_(std::move(storage)), precision_(precision) {
    std::visit(
        [this](auto& s) {
            rows_ = s.rows();
            cols_ = s.cols();
        },
        storage_);
    check_shape(rows_, cols_);
}

LinearOperator LinearOperator::dense(Matrix entries, Precision precision) {
    require_finite(entries, "dense operator");
    RowMajorMatrix stored = entries;
    if (precision == Precision::binary32) {
        stored = stored.unaryExpr([](double x) { return round_to(Precision::binary32, x); });
    }
    return LinearOperator(std::move(stored), precision);
}

LinearOperator LinearOperator::sparse(SparseMatrix entries, Precision precision) {
    entries.makeCompressed();
    for (Index k = 0; k < entries.nonZeros(); ++k) {
        double& v = entries.valuePtr()[k];
        if (!std::isfinite(v)) {
            throw InvalidInput("sparse operator: entries must be finite");
        }
        v = round_to(precision, v);
    }
    return LinearOperator(std::move(entries), precision);
}

std::int64_t LinearOperator::nonzeros() const noexcept {
    if (const auto* s = sparse_entries()) {
        return s->nonZeros();
    }
    return static_cast<std::int64_t>(rows_) * cols_;
}

Vector LinearOperator::apply(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != cols_) {
        throw DimensionError("matvec: expected length " + std::to_string(cols_) + ", got " +
                             std::to_string(x.size()));
    }
    require_finite_vector(x, "matvec");
    Vector y(rows_);
    if (const auto* d = dense_entries()) {
        for (Index i = 0; i < rows_; ++i) {
            const double* row = d->data() + i * cols_;
            double acc = 0.0;
            for (Index j = 0; j < cols_; ++j) {
                acc += row[j] * x[j];
            }
            y[i] = acc;
        }
    } else {
        const auto& s = *sparse_entries();
        const auto* outer = s.outerIndexPtr();
        const auto* inner = s.innerIndexPtr();
        const double* vals = s.valuePtr();
        for (Index i = 0; i < rows_; ++i) {
            double acc = 0.0;
            for (auto p = outer[i]; p < outer[i + 1]; ++p) {
                acc += vals[p] * x[inner[p]];
            }
            y[i] = acc;
        }
    }
    if (precision_ == Precision::binary32) {
        for (Index i = 0; i < rows_; ++i) y[i] = round_to(precision_, y[i]);
    }
    return y;
}

Vector LinearOperator::apply_adjoint(const Eigen::Ref<const Vector>& y) const {
    if (y.size() != rows_) {
        throw DimensionError("adjoint_matvec: expected length " + std::to_string(rows_) + ", got " +
                             std::to_string(y.size()));
    }
    require_finite_vector(y, "adjoint_matvec");
    // Row sweep in ascending i: every x[j] accumulates its terms in ascending i.
    Vector x = Vector::Zero(cols_);
    if (const auto* d = dense_entries()) {
        for (Index i = 0; i < rows_; ++i) {
            const double* row = d->data() + i * cols_;
            const double yi = y[i];
            for (Index j = 0; j < cols_; ++j) {
                x[j] += row[j] * yi;
            }
        }
    } else {
        const auto& s = *sparse_entries();
        const auto* outer = s.outerIndexPtr();
        const auto* inner = s.innerIndexPtr();
        const double* vals = s.valuePtr();
        for (Index i = 0; i < rows_; ++i) {
            const double yi = y[i];
            for (auto p = outer[i]; p < outer[i + 1]; ++p) {
                x[inner[p]] += vals[p] * yi;
            }
        }
    }
    if (precision_ == Precision::binary32) {
        for (Index j = 0; j < cols_; ++j) x[j] = round_to(precision_, x[j]);
    }
    return x;
}

LinearOperator LinearOperator::with_precision(Precision precision) const {
    if (const auto* d = dense_entries()) {
        return dense(Matrix(*d), precision);
    }
    return sparse(*sparse_entries(), precision);
}

Matrix LinearOperator::to_dense() const {
    if (const auto* d = dense_entries()) {
        return Matrix(*d);
    }
    return Matrix(*sparse_entries());
}

Vector singular_values(const Eigen::Ref<const Matrix>& m) {
    require_finite(m, "singular_values");
    if (m.size() == 0) {
        return Vector();
    }
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues();
}

double spectral_norm(const Eigen::Ref<const Matrix>& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    return singular_values(m)[0];
}

SvdFactors dense_svd(const Eigen::Ref<const Matrix>& m) {
    require_finite(m, "dense_svd");
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return SvdFactors{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

double spectral_norm(const LinearOperator& op, double tol, int max_iterations) {
    if (op.is_dense()) {
        const double s = spectral_norm(Matrix(*op.dense_entries()));
        if (s == 0.0) {
            throw InvalidInput("spectral_norm: operator is zero");
        }
        return s;
    }
    const LinearOperator a = op.precision() == Precision::binary64 ? op : op.with_precision(Precision::binary64);
    std::mt19937_64 gen(0x5eed5eedULL);
    std::normal_distribution<double> normal;
    Vector x(a.cols());
    for (Index j = 0; j < x.size(); ++j) x[j] = normal(gen);
    x.normalize();

    double previous = 0.0;
    double estimate = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        Vector y = a.apply(x);
        estimate = y.norm();
        if (estimate == 0.0) {
            throw InvalidInput("spectral_norm: operator is zero");
        }
        Vector z = a.apply_adjoint(y);
        const double zn = z.norm();
        x = z / zn;
        if (it > 0 && std::abs(estimate - previous) <= 0.1 * tol * estimate) {
            // One more product with the refined direction.
            return std::max(estimate, a.apply(x).norm());
        }
        previous = estimate;
    }
    throw ConvergenceError("spectral_norm: power iteration did not converge", estimate);
}

}  // namespace lbro

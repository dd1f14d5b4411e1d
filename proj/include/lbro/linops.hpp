#pragma once

#include <cstdint>
#include <variant>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "lbro/precision.hpp"

namespace lbro {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Throws InvalidInput when any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const Matrix>& m, const char* what);

/// A real m x n matrix (m >= n) seen through its products with vectors.
///
/// Both products accumulate in binary64 in ascending index order, so a dense
/// and a sparse operator holding the same entries return bit-identical
/// results. In binary32 mode the entries are rounded to binary32 on
/// construction and each output entry is rounded after accumulation.
///
/// Immutable after construction; safe to share between threads.
class LinearOperator {
public:
    static LinearOperator dense(Matrix entries, Precision precision = Precision::binary64);
    static LinearOperator sparse(SparseMatrix entries, Precision precision = Precision::binary64);

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }
    Precision precision() const noexcept { return precision_; }
    bool is_dense() const noexcept { return std::holds_alternative<RowMajorMatrix>(storage_); }
    std::int64_t nonzeros() const noexcept;

    /// A * x.
    Vector apply(const Eigen::Ref<const Vector>& x) const;
    /// A^T * y.
    Vector apply_adjoint(const Eigen::Ref<const Vector>& y) const;

    /// Same entries (re-rounded when narrowing to binary32) in another mode.
    LinearOperator with_precision(Precision precision) const;

    Matrix to_dense() const;
    const RowMajorMatrix* dense_entries() const noexcept { return std::get_if<RowMajorMatrix>(&storage_); }
    const SparseMatrix* sparse_entries() const noexcept { return std::get_if<SparseMatrix>(&storage_); }

private:
    LinearOperator(std::variant<RowMajorMatrix, SparseMatrix> storage, Precision precision);

    std::variant<RowMajorMatrix, SparseMatrix> storage_;
    Index rows_ = 0;
    Index cols_ = 0;
    Precision precision_ = Precision::binary64;
};

inline Vector matvec(const LinearOperator& op, const Eigen::Ref<const Vector>& x) { return op.apply(x); }
inline Vector adjoint_matvec(const LinearOperator& op, const Eigen::Ref<const Vector>& y) {
    return op.apply_adjoint(y);
}

/// Largest singular value of the operator. Dense operators go through a full
/// SVD; sparse ones through power iteration on A^T A from a fixed seed,
/// stopping when successive estimates agree to `tol` relative.
/// Throws ConvergenceError (with the last estimate) after `max_iterations`.
double spectral_norm(const LinearOperator& op, double tol = 1e-6, int max_iterations = 20000);

/// Spectral norm of a small dense matrix.
double spectral_norm(const Eigen::Ref<const Matrix>& m);

struct SvdFactors {
    Matrix U;      ///< rows x rows
    Vector sigma;  ///< min(rows, cols), descending
    Matrix V;      ///< cols x cols
};

/// Full SVD of a dense matrix. Singular values are sorted descending.
SvdFactors dense_svd(const Eigen::Ref<const Matrix>& m);

/// Singular values only, descending.
Vector singular_values(const Eigen::Ref<const Matrix>& m);

}  // namespace lbro

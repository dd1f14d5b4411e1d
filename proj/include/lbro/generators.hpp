#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lbro/linops.hpp"

namespace lbro {

/// Singular values used by the n x n test matrix with a doubled largest and
/// a doubled smallest singular value: 1, 1, 0.95, linspace(0.90, 0.15, n-6),
/// 0.1, 1e-4, 1e-4.
Vector section5_singular_values(Index n);

/// Symmetric orthogonal sine matrices. kind 1: sqrt(2/(n+1)) sin(ij pi/(n+1));
/// kind 2: 2/sqrt(2n+1) sin(2ij pi/(2n+1)), with 1-based i, j.
Matrix orthog_sine(Index n, int kind);

/// A = P diag(s) Q^T with P = orthog_sine(n, 1), Q = orthog_sine(n, 2).
/// Throws InvalidInput for n < 8.
Matrix generate_section5_matrix(Index n);

/// Standard normal entries from a seeded mt19937_64.
Matrix random_dense(Index m, Index n, std::uint64_t seed);

/// u v^T with standard normal u, v.
Matrix random_rank1(Index m, Index n, std::uint64_t seed);

/// Square diagonal matrix in coordinate form.
SparseMatrix diagonal_sparse(std::span<const double> values);

/// Sparse m x n matrix with exactly the prescribed singular values (up to
/// rounding): diag(sigma) mixed by `rotations` random Givens rotations on each
/// side. Fill stays modest because each rotation only merges two rows.
SparseMatrix sparse_with_spectrum(Index m, Index n, std::span<const double> sigma, Index rotations,
                                  std::uint64_t seed);

/// Geometrically graded spectrum from `norm` down to `norm / cond` with the
/// top of the spectrum spread out (exponent `grading` < 1 widens the top gaps).
Vector graded_spectrum(Index n, double norm, double cond, double grading = 0.6);

/// The four reference problems: file name, shape, norm and condition number.
struct CorpusEntry {
    std::string name;
    Index rows;
    Index cols;
    double norm;
    double cond;
    std::string description;
};

const std::vector<CorpusEntry>& corpus();
const CorpusEntry& corpus_entry(const std::string& name);

/// Size-, norm- and condition-matched sparse stand-in for a corpus matrix.
LinearOperator corpus_substitute(const std::string& name, Precision precision = Precision::binary64);

}  // namespace lbro

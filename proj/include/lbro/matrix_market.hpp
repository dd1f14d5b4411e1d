#pragma once

#include <iosfwd>
#include <string>

#include "lbro/linops.hpp"

namespace lbro {

/// Raw content of a Matrix Market file. Coordinate files become sparse
/// (symmetric storage expanded), array files become dense.
struct MatrixMarketData {
    Index rows = 0;
    Index cols = 0;
    bool dense = false;
    Matrix dense_entries;
    SparseMatrix sparse_entries;
};

/// Supports `matrix coordinate real|integer general|symmetric` and
/// `matrix array real|integer general`. Throws InvalidInput on malformed input.
MatrixMarketData parse_matrix_market(std::istream& in);
MatrixMarketData read_matrix_market_file(const std::string& path);

/// Reads a file and wraps it as an operator (rows >= cols required).
LinearOperator load_operator(const std::string& path, Precision precision = Precision::binary64);

/// Dense operators are written in array format, sparse ones in coordinate
/// format; values use 17 significant digits.
void write_matrix_market(std::ostream& out, const LinearOperator& op);
void write_matrix_market_array(std::ostream& out, const Eigen::Ref<const Matrix>& m);
void write_matrix_market_coordinate(std::ostream& out, const SparseMatrix& m);

}  // namespace lbro

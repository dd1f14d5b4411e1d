#include "lbro/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "lbro/errors.hpp"

namespace lbro {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool next_data_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '%') continue;
        return true;
    }
    return false;
}

}  // namespace

MatrixMarketData parse_matrix_market(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) {
        throw InvalidInput("matrix market: empty input");
    }
    std::istringstream hs(header);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix") {
        throw InvalidInput("matrix market: missing '%%MatrixMarket matrix' banner");
    }
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (field != "real" && field != "integer" && field != "double") {
        throw InvalidInput("matrix market: unsupported field '" + field + "'");
    }
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general") {
        throw InvalidInput("matrix market: unsupported symmetry '" + symmetry + "'");
    }

    std::string line;
    if (!next_data_line(in, line)) {
        throw InvalidInput("matrix market: missing size line");
    }
    std::istringstream size_line(line);
    MatrixMarketData out;
    if (format == "coordinate") {
        long long nnz = 0;
        if (!(size_line >> out.rows >> out.cols >> nnz) || out.rows < 0 || out.cols < 0 || nnz < 0) {
            throw InvalidInput("matrix market: bad coordinate size line");
        }
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
        for (long long k = 0; k < nnz; ++k) {
            if (!next_data_line(in, line)) {
                throw InvalidInput("matrix market: expected " + std::to_string(nnz) + " entries, got " +
                                   std::to_string(k));
            }
            std::istringstream es(line);
            long long i = 0, j = 0;
            double v = 0.0;
            if (!(es >> i >> j >> v)) {
                throw InvalidInput("matrix market: bad entry line '" + line + "'");
            }
            if (i < 1 || j < 1 || i > out.rows || j > out.cols) {
                throw InvalidInput("matrix market: index out of range in '" + line + "'");
            }
            trips.emplace_back(static_cast<Index>(i - 1), static_cast<Index>(j - 1), v);
            if (symmetric && i != j) {
                trips.emplace_back(static_cast<Index>(j - 1), static_cast<Index>(i - 1), v);
            }
        }
        out.sparse_entries.resize(out.rows, out.cols);
        out.sparse_entries.setFromTriplets(trips.begin(), trips.end());
        out.sparse_entries.makeCompressed();
    } else if (format == "array") {
        if (symmetric) {
            throw InvalidInput("matrix market: symmetric array format is not supported");
        }
        if (!(size_line >> out.rows >> out.cols) || out.rows < 0 || out.cols < 0) {
            throw InvalidInput("matrix market: bad array size line");
        }
        out.dense = true;
        out.dense_entries.resize(out.rows, out.cols);
        // Column-major order.
        for (Index j = 0; j < out.cols; ++j) {
            for (Index i = 0; i < out.rows; ++i) {
                if (!next_data_line(in, line)) {
                    throw InvalidInput("matrix market: array data ended early");
                }
                std::istringstream es(line);
                if (!(es >> out.dense_entries(i, j))) {
                    throw InvalidInput("matrix market: bad array value '" + line + "'");
                }
            }
        }
    } else {
        throw InvalidInput("matrix market: unsupported format '" + format + "'");
    }
    return out;
}

MatrixMarketData read_matrix_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open matrix file '" + path + "'");
    }
    return parse_matrix_market(in);
}

LinearOperator load_operator(const std::string& path, Precision precision) {
    MatrixMarketData data = read_matrix_market_file(path);
    if (data.dense) {
        return LinearOperator::dense(std::move(data.dense_entries), precision);
    }
    return LinearOperator::sparse(std::move(data.sparse_entries), precision);
}

void write_matrix_market_array(std::ostream& out, const Eigen::Ref<const Matrix>& m) {
    out << "%%MatrixMarket matrix array real general\n";
    out << m.rows() << ' ' << m.cols() << '\n';
    out << std::setprecision(17);
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) out << m(i, j) << '\n';
}

void write_matrix_market_coordinate(std::ostream& out, const SparseMatrix& m) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
    out << std::setprecision(17);
    for (Index i = 0; i < m.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(m, i); it; ++it)
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

void write_matrix_market(std::ostream& out, const LinearOperator& op) {
    if (const auto* d = op.dense_entries()) {
        write_matrix_market_array(out, Matrix(*d));
    } else {
        write_matrix_market_coordinate(out, *op.sparse_entries());
    }
}

}  // namespace lbro

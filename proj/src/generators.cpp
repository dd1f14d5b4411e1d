#include "lbro/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include "lbro/errors.hpp"

namespace lbro {

Vector section5_singular_values(Index n) {
    if (n < 8) {
        throw InvalidInput("section5 matrix needs n >= 8");
    }
    Vector s(n);
    s[0] = 1.0;
    s[1] = 1.0;
    s[2] = 0.95;
    // MATLAB linspace(0.90, 0.15, n-6): d1 + k*(d2-d1)/(count-1), last point exact.
    const Index count = n - 6;
    const double lo = 0.90;
    const double hi = 0.15;
    for (Index k = 0; k < count; ++k) {
        s[3 + k] = lo + static_cast<double>(k) * (hi - lo) / static_cast<double>(count - 1);
    }
    s[3 + count - 1] = hi;
    s[n - 3] = 0.1;
    s[n - 2] = 1e-4;
    s[n - 1] = 1e-4;
    return s;
}

Matrix orthog_sine(Index n, int kind) {
    Matrix q(n, n);
    const double pi = std::numbers::pi;
    if (kind == 1) {
        const double scale = std::sqrt(2.0 / static_cast<double>(n + 1));
        for (Index i = 1; i <= n; ++i)
            for (Index j = 1; j <= n; ++j)
                q(i - 1, j - 1) = scale * std::sin(static_cast<double>(i * j) * pi / static_cast<double>(n + 1));
    } else if (kind == 2) {
        const double scale = 2.0 / std::sqrt(static_cast<double>(2 * n + 1));
        for (Index i = 1; i <= n; ++i)
            for (Index j = 1; j <= n; ++j)
                q(i - 1, j - 1) =
                    scale * std::sin(2.0 * static_cast<double>(i * j) * pi / static_cast<double>(2 * n + 1));
    } else {
        throw InvalidInput("orthog_sine: kind must be 1 or 2");
    }
    return q;
}

Matrix generate_section5_matrix(Index n) {
    const Vector s = section5_singular_values(n);
    const Matrix p = orthog_sine(n, 1);
    const Matrix q = orthog_sine(n, 2);
    return p * s.asDiagonal() * q.transpose();
}

Matrix random_dense(Index m, Index n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    Matrix a(m, n);
    // Row-major fill order so the stream maps to entries independently of storage.
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j) a(i, j) = normal(gen);
    return a;
}

Matrix random_rank1(Index m, Index n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    Vector u(m), v(n);
    for (Index i = 0; i < m; ++i) u[i] = normal(gen);
    for (Index j = 0; j < n; ++j) v[j] = normal(gen);
    return u * v.transpose();
}

SparseMatrix diagonal_sparse(std::span<const double> values) {
    const auto n = static_cast<Index>(values.size());
    SparseMatrix d(n, n);
    std::vector<Eigen::Triplet<double>> trips;
    for (Index i = 0; i < n; ++i) trips.emplace_back(i, i, values[static_cast<std::size_t>(i)]);
    d.setFromTriplets(trips.begin(), trips.end());
    return d;
}

namespace {

using SparseRow = std::vector<std::pair<Index, double>>;  // sorted by column

void rotate_rows(SparseRow& a, SparseRow& b, double c, double s) {
    SparseRow na, nb;
    na.reserve(a.size() + b.size());
    nb.reserve(a.size() + b.size());
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() || ib < b.size()) {
        Index col;
        double va = 0.0, vb = 0.0;
        if (ib >= b.size() || (ia < a.size() && a[ia].first < b[ib].first)) {
            col = a[ia].first;
            va = a[ia++].second;
        } else if (ia >= a.size() || b[ib].first < a[ia].first) {
            col = b[ib].first;
            vb = b[ib++].second;
        } else {
            col = a[ia].first;
            va = a[ia++].second;
            vb = b[ib++].second;
        }
        na.emplace_back(col, c * va + s * vb);
        nb.emplace_back(col, -s * va + c * vb);
    }
    a = std::move(na);
    b = std::move(nb);
}

void random_rotations(std::vector<SparseRow>& rows, Index count, std::mt19937_64& gen) {
    const auto nrows = static_cast<Index>(rows.size());
    if (nrows < 2) return;
    std::uniform_int_distribution<Index> pick(0, nrows - 1);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (Index r = 0; r < count; ++r) {
        Index i = pick(gen);
        Index j = pick(gen);
        while (j == i) j = pick(gen);
        const double t = angle(gen);
        rotate_rows(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)], std::cos(t), std::sin(t));
    }
}

std::vector<SparseRow> transpose_rows(const std::vector<SparseRow>& rows, Index ncols) {
    std::vector<SparseRow> t(static_cast<std::size_t>(ncols));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (const auto& [col, v] : rows[i]) t[static_cast<std::size_t>(col)].emplace_back(static_cast<Index>(i), v);
    return t;
}

}  // namespace

SparseMatrix sparse_with_spectrum(Index m, Index n, std::span<const double> sigma, Index rotations,
                                  std::uint64_t seed) {
    if (m < n || static_cast<Index>(sigma.size()) != n) {
        throw DimensionError("sparse_with_spectrum: need m >= n and n singular values");
    }
    std::mt19937_64 gen(seed);
    // G * diag(sigma), then transpose: diag(sigma) * G^T.
    std::vector<SparseRow> rows(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)].emplace_back(i, sigma[static_cast<std::size_t>(i)]);
    random_rotations(rows, rotations, gen);
    rows = transpose_rows(rows, n);
    rows.resize(static_cast<std::size_t>(m));
    random_rotations(rows, rotations, gen);

    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (const auto& [col, v] : rows[i])
            if (v != 0.0) trips.emplace_back(static_cast<Index>(i), col, v);
    SparseMatrix a(m, n);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    return a;
}

Vector graded_spectrum(Index n, double norm, double cond, double grading) {
    Vector s(n);
    const double logc = std::log(cond);
    for (Index i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        s[i] = norm * std::exp(-logc * std::pow(t, grading));
    }
    return s;
}

const std::vector<CorpusEntry>& corpus() {
    static const std::vector<CorpusEntry> entries{
        {"nos3", 960, 960, 689.904, 37723.6, "structural problem"},
        {"well1850", 1850, 712, 1.79433, 111.313, "least squares problem"},
        {"lshp2614", 2614, 2614, 6.98798, 5197.35, "thermal problem"},
        {"c-23", 3969, 3969, 1089.71, 22795.9, "optimization problem"},
    };
    return entries;
}

const CorpusEntry& corpus_entry(const std::string& name) {
    for (const auto& e : corpus()) {
        if (e.name == name) return e;
    }
    throw InvalidInput("unknown corpus matrix: " + name);
}

LinearOperator corpus_substitute(const std::string& name, Precision precision) {
    const CorpusEntry& e = corpus_entry(name);
    std::uint64_t seed = 1469598103934665603ULL;
    for (char c : e.name) seed = (seed ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
    const Vector sigma = graded_spectrum(e.cols, e.norm, e.cond);
    return LinearOperator::sparse(
        sparse_with_spectrum(e.rows, e.cols, std::span<const double>(sigma.data(), static_cast<std::size_t>(sigma.size())),
                             e.rows, seed),
        precision);
}

}  // namespace lbro

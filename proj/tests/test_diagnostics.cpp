#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>
#include <gtest/gtest.h>

#include "lbro/bidiag.hpp"
#include "lbro/diagnostics.hpp"
#include "lbro/generators.hpp"

using namespace lbro;

namespace {

constexpr double kU = 0x1p-53;

// Brute-force ||SUT(I - Q^T Q)|| via Jacobi SVD, no shared code path.
double level_oracle(const Matrix& q) {
    Matrix g = -(q.transpose() * q);
    Matrix sut = Matrix::Zero(g.rows(), g.cols());
    for (Index j = 0; j < g.cols(); ++j)
        for (Index i = 0; i < j; ++i) sut(i, j) = g(i, j);
    return sut.size() ? Eigen::JacobiSVD<Matrix>(sut).singularValues()[0] : 0.0;
}

}  // namespace

TEST(OrthogonalityLevel, HandExamples) {
    EXPECT_EQ(orthogonality_level(Matrix::Identity(5, 3)), 0.0);
    Matrix q(2, 2);
    q << 1.0, 1.0 / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(orthogonality_level(q), 1.0 / std::sqrt(2.0), 1e-16);
    EXPECT_EQ(orthogonality_level(Matrix::Ones(4, 1)), 0.0);
}

TEST(OrthogonalityLevel, MatchesBruteForce) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Matrix q = random_dense(20, 7, seed);
        q.colwise().normalize();
        EXPECT_NEAR(orthogonality_level(q), level_oracle(q), 1e-12) << seed;
    }
}

TEST(OrthogonalityLevel, FullReorthOnLshp) {
    const LinearOperator op = corpus_substitute("lshp2614");
    const BidiagFactorization f = run(op, ones_vector(op.rows()), 100, ReorthPolicy::full());
    ASSERT_EQ(f.U.cols(), 101);
    EXPECT_LE(orthogonality_level(f.U), 1e-14);
}

TEST(PairwiseLevel, Examples) {
    const Matrix basis = Matrix::Identity(3, 3);
    const Vector q = Eigen::Vector3d(0.1, -0.5, 0.3);
    EXPECT_DOUBLE_EQ(pairwise_level(q, basis, false), 0.5);
    EXPECT_DOUBLE_EQ(pairwise_level(q, basis.leftCols(1), false), 0.1);
    EXPECT_DOUBLE_EQ(pairwise_level(q, basis, true), 0.5);
    EXPECT_DOUBLE_EQ(pairwise_level(q, basis.rightCols(2), true), 0.5);
    EXPECT_EQ(pairwise_level(q, basis.leftCols(1), true), 0.0);
}

TEST(PairwiseLevel, BoundedByLevel) {
    const LinearOperator op = corpus_substitute("nos3");
    const BidiagFactorization f = run(op, ones_vector(op.rows()), 40, ReorthPolicy::none());
    const Matrix v = f.V;
    const double level = orthogonality_level(v);
    for (Index j = 1; j < v.cols(); ++j)
        EXPECT_LE(pairwise_level(v.col(j), v.leftCols(j), false), level + 10 * kU) << j;
}

TEST(SingularValueWindow, Examples) {
    const SingularValueWindow id = singular_value_window(Matrix::Identity(4, 4));
    EXPECT_TRUE(id.holds());
    EXPECT_EQ(id.level, 0.0);

    Matrix q = Matrix::Identity(3, 2);
    q(1, 0) = 0.1;
    q.colwise().normalize();
    const SingularValueWindow w = singular_value_window(q);
    EXPECT_TRUE(w.applicable);
    EXPECT_TRUE(w.holds());
    EXPECT_LE(w.sigma_max, 1.0 + w.level);
    EXPECT_GE(w.sigma_min, std::sqrt(1.0 - 2.0 * w.level));

    Matrix same = Matrix::Zero(3, 2);
    same.col(0) = Eigen::Vector3d(1, 0, 0);
    same.col(1) = Eigen::Vector3d(1, 0, 0);
    EXPECT_FALSE(singular_value_window(same).applicable);
}

TEST(SingularValueWindow, HoldsForLanczosBases) {
    const LinearOperator op = corpus_substitute("nos3");
    for (const ReorthPolicy& p : {ReorthPolicy::none(), ReorthPolicy::partial(1e-10), ReorthPolicy::full()}) {
        const BidiagFactorization f = run(op, ones_vector(op.rows()), 50, p);
        for (const Matrix& q : {Matrix(f.U), Matrix(f.V)}) {
            const SingularValueWindow w = singular_value_window(q);
            if (w.applicable) EXPECT_TRUE(w.holds()) << p.describe();
        }
    }
}

TEST(LocalOrthogonality, FullReorthIsRoundoff) {
    const LinearOperator op = LinearOperator::dense(random_dense(60, 40, 3));
    const BidiagFactorization f = run(op, ones_vector(60), 30, ReorthPolicy::full());
    const std::vector<double> loc = local_orthogonality_trace(f);
    ASSERT_EQ(loc.size(), 30u);
    for (double v : loc) EXPECT_LE(v, 10 * kU * spectral_norm(op));
}

TEST(LocalOrthogonality, SemiWithoutLocalStep) {
    const LinearOperator op = LinearOperator::dense(random_dense(100, 80, 4));
    ReorthPolicy p = ReorthPolicy::semi(std::sqrt(kU));
    p.include_local = false;
    const BidiagFactorization f = run(op, ones_vector(100), 60, p);
    for (double v : local_orthogonality_trace(f)) EXPECT_LE(v, 100 * kU * spectral_norm(op));
}

TEST(LocalOrthogonality, NoneEarlySteps) {
    const LinearOperator op = corpus_substitute("nos3");
    const BidiagFactorization f = run(op, ones_vector(op.rows()), 5, ReorthPolicy::none());
    for (double v : local_orthogonality_trace(f)) EXPECT_LE(v, 100 * kU * spectral_norm(op));
}

TEST(Trace, LevelsAreMonotone) {
    const LinearOperator op = corpus_substitute("nos3");
    for (const ReorthPolicy& p : {ReorthPolicy::none(), ReorthPolicy::partial(1e-10), ReorthPolicy::full()}) {
        const TracedRun tr = traced_run(op, ones_vector(op.rows()), 60, p, TraceOptions{false, 0.0, {}});
        EXPECT_TRUE(tr.trace.monotone(1e-12)) << p.describe();
        ASSERT_EQ(tr.trace.rows.size(), 60u);
        for (std::size_t i = 0; i < tr.trace.rows.size(); ++i) EXPECT_EQ(tr.trace.rows[i].k, Index(i + 1));
    }
}

TEST(Trace, LevelsAgreeWithDirectComputation) {
    const LinearOperator op = LinearOperator::dense(random_dense(50, 30, 5));
    const TracedRun tr = traced_run(op, ones_vector(50), 20, ReorthPolicy::none());
    const BidiagFactorization& f = tr.factorization;
    for (const TraceRow& r : tr.trace.rows) {
        EXPECT_NEAR(r.mu, level_oracle(f.U.leftCols(r.k + 1)), 1e-13) << r.k;
        EXPECT_NEAR(r.nu, level_oracle(f.V.leftCols(r.k)), 1e-13) << r.k;
        EXPECT_LE(r.omega_u, r.mu + 10 * kU);
        EXPECT_LE(r.omega_v, r.nu + 10 * kU);
    }
}

TEST(Trace, CsvHeaderAndRows) {
    const LinearOperator op = LinearOperator::dense(random_dense(12, 8, 6));
    const TracedRun tr = traced_run(op, ones_vector(12), 4, ReorthPolicy::full());
    std::ostringstream out;
    write_trace_csv(out, tr.trace);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "k,mu,nu,omega_u,omega_v,local_u,norm_cbar,normXk_over_normA,reorth_events_u,reorth_events_v,"
                    "inner_products_count");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 10);
    }
    EXPECT_EQ(rows, 4);
}

TEST(GramTracker, MatchesDirectLevel) {
    const Matrix q = random_dense(15, 6, 7).colwise().normalized();
    GramTracker g;
    g.extend(q.leftCols(3));
    g.extend(q);
    EXPECT_EQ(g.size(), 6);
    EXPECT_NEAR(g.level(6), orthogonality_level(q), 1e-14);
    EXPECT_NEAR(g.level(3), orthogonality_level(q.leftCols(3)), 1e-14);
}

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "lbro/bidiag.hpp"
#include "lbro/errors.hpp"
#include "lbro/experiments.hpp"
#include "lbro/generators.hpp"
#include "lbro/svdapprox.hpp"

using namespace lbro;

namespace {

constexpr double kU = 0x1p-53;

LowerBidiagonal make_b(std::vector<double> d, std::vector<double> s) {
    LowerBidiagonal b;
    b.diag = Eigen::Map<Vector>(d.data(), static_cast<Index>(d.size()));
    b.sub = Eigen::Map<Vector>(s.data(), static_cast<Index>(s.size()));
    return b;
}

LowerBidiagonal random_b(Index k, bool square, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.1, 1.0);
    LowerBidiagonal b;
    b.diag.resize(k);
    b.sub.resize(square ? k - 1 : k);
    for (Index i = 0; i < b.diag.size(); ++i) b.diag[i] = unit(gen);
    for (Index i = 0; i < b.sub.size(); ++i) b.sub[i] = unit(gen);
    return b;
}

}  // namespace

TEST(BidiagSvd, OneColumnClosedForm) {
    const BidiagSvd s = bidiag_svd(make_b({3.0}, {4.0}));
    ASSERT_EQ(s.theta.size(), 1);
    EXPECT_DOUBLE_EQ(s.theta[0], 5.0);
    EXPECT_NEAR(std::abs(s.H(0, 0)), 0.6, 1e-15);
    EXPECT_NEAR(std::abs(s.H(1, 0)), 0.8, 1e-15);
    EXPECT_NEAR(std::abs(s.Z(0, 0)), 1.0, 1e-15);
}

TEST(BidiagSvd, DecoupledLimit) {
    const BidiagSvd s = bidiag_svd(make_b({2.0, 1.0, 3.0}, {0.0, 0.0}), VectorMode::None);
    EXPECT_EQ(s.theta, Eigen::Vector3d(3.0, 2.0, 1.0));
}

TEST(BidiagSvd, ReconstructionAndOrthogonality) {
    for (const bool square : {true, false}) {
        const LowerBidiagonal b = random_b(40, square, square ? 1 : 2);
        const BidiagSvd s = bidiag_svd(b);
        const Matrix dense = b.to_dense();
        EXPECT_LE((s.H * s.theta.asDiagonal() * s.Z.transpose() - dense).norm(), 100 * kU * s.theta[0]);
        EXPECT_LE((s.H.transpose() * s.H - Matrix::Identity(40, 40)).cwiseAbs().maxCoeff(), 100 * kU);
        EXPECT_LE((s.Z.transpose() * s.Z - Matrix::Identity(40, 40)).cwiseAbs().maxCoeff(), 100 * kU);
        for (Index i = 1; i < 40; ++i) EXPECT_GE(s.theta[i - 1], s.theta[i]);
        EXPECT_LE((s.theta - singular_values(dense)).cwiseAbs().maxCoeff(), 1e-14 * s.theta[0]);
    }
}

TEST(BidiagSvd, LastRowMatchesFull) {
    const LowerBidiagonal b = random_b(25, false, 3);
    const BidiagSvd full = bidiag_svd(b, VectorMode::Full);
    const BidiagSvd last = bidiag_svd(b, VectorMode::LastRow);
    EXPECT_EQ(last.theta, full.theta);
    EXPECT_LE((last.h_last.cwiseAbs() - full.h_last.cwiseAbs()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((last.z_last.cwiseAbs() - full.z_last.cwiseAbs()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(last.H.size(), 0);
}

TEST(BidiagSvd, UpperBidiagonalValues) {
    Vector d(2), e(1);
    d << 1.0, 1.0;
    e << 1.0;
    const Vector s = upper_bidiag_singular_values(d, e);
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    EXPECT_NEAR(s[0], phi, 1e-15);
    EXPECT_NEAR(s[1], 1.0 / phi, 1e-15);
}

TEST(WatchSpec, Parse) {
    EXPECT_EQ(WatchSpec::parse("largest:4").count, 4);
    EXPECT_EQ(WatchSpec::parse("smallest:2").end, WatchSpec::End::Smallest);
    EXPECT_EQ(WatchSpec::parse("3").count, 3);
    EXPECT_EQ(WatchSpec::parse("smallest").count, 4);
    EXPECT_EQ(WatchSpec::parse("smallest:2").describe(), "smallest:2");
    for (const char* bad : {"middle:2", "largest:0", "largest:x", "largest:2x"})
        EXPECT_THROW(WatchSpec::parse(bad), InvalidInput) << bad;
    WatchSpec s{WatchSpec::End::Smallest, 2};
    EXPECT_EQ(watched_index(s, 1, 10), 10);
    EXPECT_EQ(watched_index(s, 2, 10), 9);
    EXPECT_EQ(watched_index(s, 2, 1), 0);
}

TEST(Ritz, InterlacingAndInsideSpectrum) {
    const LinearOperator op = LinearOperator::dense(random_dense(40, 30, 4));
    const Vector sigma = singular_values(op.to_dense());
    Vector prev;
    for (Index k = 1; k <= 20; ++k) {
        const Vector t = bidiag_svd(run(op, ones_vector(40), k, ReorthPolicy::full()).B(), VectorMode::None).theta;
        for (Index i = 0; i < t.size(); ++i) {
            EXPECT_LE(t[i], sigma[0] * (1 + 1e-13));
            EXPECT_GE(t[i], sigma[sigma.size() - 1] * (1 - 1e-13) - 1e-13);
        }
        if (k > 1) {
            // theta^{(k)}_{i+1} <= theta^{(k-1)}_i <= theta^{(k)}_i
            for (Index i = 0; i < prev.size(); ++i) {
                EXPECT_LE(prev[i], t[i] + 1e-13) << k;
                EXPECT_GE(prev[i], t[i + 1] - 1e-13) << k;
            }
        }
        prev = t;
    }
}

TEST(Ritz, ResidualEstimateMatchesOperator) {
    const LinearOperator op = LinearOperator::dense(random_dense(50, 35, 5));
    const BidiagFactorization f = run(op, ones_vector(50), 20, ReorthPolicy::full());
    const BidiagSvd s = bidiag_svd(f.B());
    const RitzDecomposition r = ritz_triplets(f, s, op);
    // A y - theta x vanishes; the adjoint side leaves alpha_{k+1} |h_{k+1,i}|
    for (Index i = 0; i < 20; ++i) {
        const double est = f.alphas.size() > 20 ? f.alphas[20] * std::abs(s.h_last[i]) : 0.0;
        EXPECT_NEAR(r.residuals[i], est, 1e-12 * spectral_norm(op)) << i;
    }
}

TEST(Convergence, MultiplicityGapNeedsConvergence) {
    const LinearOperator op = LinearOperator::dense(random_dense(30, 20, 6));
    const ConvergenceHistory h = track_convergence(op, ones_vector(30), ReorthPolicy::full(), 3, WatchSpec{});
    EXPECT_THROW(multiplicity_gap(h, 3, 4), StateError);
    EXPECT_THROW(multiplicity_gap(h, 0, 1), DimensionError);
    EXPECT_TRUE(std::isnan(h.values[3][0]));
}

TEST(Convergence, FullReorthFindsDoubledValueWithoutGhosts) {
    const LinearOperator op = LinearOperator::sparse(Matrix(generate_section5_matrix(200)).sparseView());
    const ConvergenceHistory h =
        track_convergence(op, ones_vector(200), ReorthPolicy::full(), 80, WatchSpec{WatchSpec::End::Largest, 4});
    EXPECT_TRUE(h.ghosts.empty());
    ASSERT_TRUE(h.converged[0] && h.converged[1]);
    EXPECT_LE(std::abs(h.values[0].back() - 1.0), 1e-13);
    EXPECT_LE(multiplicity_gap(h, 1, 2), 1e-13);
    std::ostringstream csv;
    write_convergence_csv(csv, h);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
              "k,s_watch_1,s_watch_2,s_watch_3,s_watch_4,res_watch_1,res_watch_2,res_watch_3,res_watch_4");
}

TEST(Convergence, ConvergedValuesAreSingularValues) {
    const LinearOperator op = corpus_substitute("nos3");
    const Vector sigma = singular_values(op.to_dense());
    const ConvergenceHistory h =
        track_convergence(op, ones_vector(op.rows()), ReorthPolicy::partial(1e-10), 100, WatchSpec{});
    for (std::size_t w = 0; w < h.converged.size(); ++w) {
        if (!h.converged[w]) continue;
        const double v = h.values[w].back();
        const double dist = (sigma.array() - v).abs().minCoeff();
        EXPECT_LE(dist, 1e-8 * sigma[0]) << w;
    }
}

TEST(Table2, SmallerRunScales) {
    const Table2Values t = table2_values(Precision::binary64, 200, 60, 120);
    EXPECT_LE(t.rel_err_s1, 1e-13);
    EXPECT_LE(t.gap_s1_s2, 1e-13);
    EXPECT_GE(t.s1, t.s2);
    EXPECT_LE(std::max(t.rel_err_s_min, kU), 1e-6);
}

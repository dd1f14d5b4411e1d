#include <cmath>
#include <vector>

#include <Eigen/QR>
#include <gtest/gtest.h>

#include "lbro/bidiag.hpp"
#include "lbro/diagnostics.hpp"
#include "lbro/errors.hpp"
#include "lbro/generators.hpp"
#include "lbro/reorth.hpp"

using namespace lbro;

namespace {

constexpr double kU = 0x1p-53;

IndexSet targets(const ReorthPolicy& p, Side s, Index i, std::vector<double> est) {
    return select_targets(p, s, i, std::span<const double>(est.data(), est.size()));
}

}  // namespace

TEST(SelectTargets, FullAndNone) {
    EXPECT_EQ(targets(ReorthPolicy::full(), Side::Left, 3, {0, 0, 0}), (IndexSet{0, 1, 2}));
    ReorthPolicy nl = ReorthPolicy::full();
    nl.include_local = false;
    EXPECT_EQ(targets(nl, Side::Left, 3, {0, 0, 0}), (IndexSet{0, 1}));
    EXPECT_TRUE(targets(ReorthPolicy::none(), Side::Right, 5, {1, 1, 1, 1, 1}).empty());
    EXPECT_TRUE(targets(ReorthPolicy::full(), Side::Left, 0, {}).empty());
}

TEST(SelectTargets, OneSided) {
    const ReorthPolicy v = ReorthPolicy::one_sided(Side::Right);
    EXPECT_EQ(targets(v, Side::Right, 2, {0, 0}), (IndexSet{0, 1}));
    EXPECT_TRUE(targets(v, Side::Left, 2, {0, 0}).empty());
}

TEST(SelectTargets, SemiIsAllOrNothing) {
    const ReorthPolicy s = ReorthPolicy::semi(1e-8);
    EXPECT_TRUE(targets(s, Side::Left, 3, {1e-12, 5e-9, 1e-10}).empty());
    EXPECT_EQ(targets(s, Side::Left, 3, {1e-12, 5e-8, 1e-10}), (IndexSet{0, 1, 2}));
}

TEST(SelectTargets, PartialIntervalWithNeighbours) {
    const ReorthPolicy p = ReorthPolicy::partial(1e-10);
    EXPECT_EQ(targets(p, Side::Left, 3, {1e-14, 3e-10, 2e-9}), (IndexSet{0, 1, 2}));
    EXPECT_TRUE(targets(p, Side::Left, 3, {1e-14, 3e-11, 2e-11}).empty());
    // offender in the middle of a long run of small estimates
    std::vector<double> est(10, 1e-15);
    est[5] = 1e-9;
    est[6] = 2e-10;
    EXPECT_EQ(targets(p, Side::Right, 10, est), (IndexSet{4, 5, 6, 7}));
    // a trigger level above eta: intervals still extend down to eta
    const ReorthPolicy q = ReorthPolicy::partial(1e-10, 1e-8);
    std::vector<double> e2(8, 1e-15);
    e2[2] = 1e-9;
    EXPECT_TRUE(targets(q, Side::Left, 8, e2).empty());
    e2[3] = 2e-8;
    EXPECT_EQ(targets(q, Side::Left, 8, e2), (IndexSet{1, 2, 3, 4}));
}

TEST(Policy, Validation) {
    EXPECT_THROW(ReorthPolicy::partial(0.0).validate(), InvalidInput);
    EXPECT_THROW(ReorthPolicy::partial(1e-10, 2.0).validate(), InvalidInput);
    EXPECT_THROW(ReorthPolicy::semi(0.0).validate(), InvalidInput);
    EXPECT_THROW(ReorthPolicy::full(3).validate(), InvalidInput);
    EXPECT_NO_THROW(ReorthPolicy::partial().validate());
    EXPECT_NE(ReorthPolicy::partial(1e-10).describe().find("partial"), std::string::npos);
}

TEST(Orthogonalize, HandExample) {
    const Vector w = Eigen::Vector2d(1.0, 1.0) / std::sqrt(2.0);
    const Matrix basis = Matrix::Identity(2, 1);
    const Orthogonalized o = orthogonalize(w, basis, {0}, 1);
    EXPECT_DOUBLE_EQ(o.w[0], 0.0);
    EXPECT_DOUBLE_EQ(o.w[1], 1.0 / std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(o.coeffs[0], 1.0 / std::sqrt(2.0));
    EXPECT_EQ(o.inner_products, 1);
}

TEST(Orthogonalize, EmptyTargetsLeaveVector) {
    const Vector w = random_vector(6, 3);
    const Matrix basis = random_dense(6, 3, 4);
    const Orthogonalized o = orthogonalize(w, basis, {}, 2);
    EXPECT_EQ(o.w, w);
    EXPECT_EQ(o.coeffs, Vector::Zero(3));
    EXPECT_EQ(o.inner_products, 0);
}

TEST(Orthogonalize, TwoPassesReachRoundoff) {
    const Matrix q = Eigen::HouseholderQR<Matrix>(random_dense(6, 3, 8)).householderQ() * Matrix::Identity(6, 3);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Vector w = random_vector(6, seed);
        const Orthogonalized o = orthogonalize(w, q, {0, 1, 2}, 2);
        EXPECT_LE((q.transpose() * o.w).cwiseAbs().maxCoeff(), 1e-15 * o.w.norm());
        // projections removed: recomputing them gives roundoff-level values
        EXPECT_LE((q.transpose() * o.w).cwiseAbs().maxCoeff(), std::sqrt(kU) * w.norm());
        // coefficients reconstruct the removed part
        EXPECT_LE((w - o.w - q * o.coeffs).norm(), 10 * kU * w.norm());
    }
}

TEST(Orthogonalize, Errors) {
    EXPECT_THROW(orthogonalize(Vector::Ones(3), Matrix::Identity(4, 2), {0}, 1), DimensionError);
    EXPECT_THROW(orthogonalize(Vector::Ones(4), Matrix::Identity(4, 2), {2}, 1), DimensionError);
}

TEST(PolicyEffects, NoneLeavesCoefficientsZero) {
    const LinearOperator op = LinearOperator::dense(random_dense(30, 20, 2));
    const BidiagFactorization f = run(op, ones_vector(30), 15, ReorthPolicy::none());
    EXPECT_EQ(f.C.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(f.D.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(f.events_u + f.events_v, 0);
}

TEST(PolicyEffects, RightOnlyLeavesCZero) {
    const LinearOperator op = LinearOperator::dense(random_dense(30, 20, 2));
    const BidiagFactorization f = run(op, ones_vector(30), 15, ReorthPolicy::one_sided(Side::Right));
    EXPECT_EQ(f.C.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT(f.D.cwiseAbs().maxCoeff(), 0.0);
}

TEST(PolicyEffects, FullKeepsRoundoffLevel) {
    const LinearOperator op = corpus_substitute("nos3");
    const TracedRun tr = traced_run(op, ones_vector(op.rows()), 60, ReorthPolicy::full(), TraceOptions{false, 0.0, {}});
    for (const TraceRow& r : tr.trace.rows) {
        const double k = static_cast<double>(r.k);
        EXPECT_LE(r.mu, 10 * (k + 1) * kU) << r.k;
        EXPECT_LE(r.nu_next, 10 * (k + 1) * kU) << r.k;
    }
}

TEST(PolicyEffects, PartialIsCheaperThanFull) {
    const LinearOperator op = corpus_substitute("lshp2614");
    const BidiagFactorization full = run(op, ones_vector(op.rows()), 100, ReorthPolicy::full());
    const TracedRun part = traced_run(op, ones_vector(op.rows()), 100, ReorthPolicy::partial(1e-10),
                                      TraceOptions{false, 0.0, {}});
    EXPECT_LT(part.factorization.inner_products, full.inner_products);
    EXPECT_GT(part.factorization.events_u + part.factorization.events_v, 0);
    for (const TraceRow& r : part.trace.rows) EXPECT_LE(std::max(r.mu, r.nu), 1e-8) << r.k;
}

TEST(Omega, EstimatesFollowTrueLevelsWithoutReorth) {
    // With no reorthogonalization the recurrence should see the loss of
    // orthogonality coming: the estimate is within a few orders of the truth.
    const LinearOperator op = corpus_substitute("nos3");
    LanczosBidiagonalization lb(op, ones_vector(op.rows()), ReorthPolicy::none(), 60);
    while (lb.running()) lb.step();
    const OmegaEstimate& w = lb.reorthogonalizer().omega();
    const double est = w.max_previous(Side::Right);
    const double truth = pairwise_level(lb.V().col(lb.v_count() - 1), lb.V().leftCols(lb.v_count()), true);
    EXPECT_GT(truth, 1e-6);
    EXPECT_GT(est, 1e-3 * truth);
    EXPECT_LT(est, 1e3 * std::max(truth, 1e-12));
}

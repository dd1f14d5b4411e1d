#include "lbro/reorth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lbro/errors.hpp"

namespace lbro {

ReorthPolicy ReorthPolicy::none() {
    ReorthPolicy p;
    p.kind = ReorthKind::None;
    return p;
}

ReorthPolicy ReorthPolicy::full(int passes) {
    ReorthPolicy p;
    p.kind = ReorthKind::Full;
    p.passes = passes;
    return p;
}

ReorthPolicy ReorthPolicy::one_sided(Side side, int passes) {
    ReorthPolicy p;
    p.kind = ReorthKind::OneSided;
    p.side = side;
    p.passes = passes;
    return p;
}

ReorthPolicy ReorthPolicy::partial(double eta, double delta) {
    ReorthPolicy p;
    p.kind = ReorthKind::Partial;
    p.eta = eta;
    p.delta = delta;
    return p;
}

ReorthPolicy ReorthPolicy::semi(double threshold) {
    ReorthPolicy p;
    p.kind = ReorthKind::Semi;
    p.threshold = threshold;
    return p;
}

void ReorthPolicy::validate() const {
    if (passes != 1 && passes != 2) {
        throw InvalidInput("reorthogonalization passes must be 1 or 2");
    }
    if (kind == ReorthKind::Partial) {
        if (!(eta > 0.0 && eta < 1.0)) throw InvalidInput("partial reorthogonalization: eta must lie in (0, 1)");
        if (!(delta >= 0.0 && delta < 1.0)) throw InvalidInput("partial reorthogonalization: delta must lie in [0, 1)");
    }
    if (kind == ReorthKind::Semi && !(threshold > 0.0 && threshold < 1.0)) {
        throw InvalidInput("semiorthogonalization: threshold must lie in (0, 1)");
    }
}

std::string ReorthPolicy::describe() const {
    std::ostringstream os;
    switch (kind) {
        case ReorthKind::None: os << "none"; break;
        case ReorthKind::Full: os << "full"; break;
        case ReorthKind::OneSided: os << (side == Side::Left ? "onesided-u" : "onesided-v"); break;
        case ReorthKind::Partial: os << "partial(eta=" << eta << ")"; break;
        case ReorthKind::Semi: os << "semi(threshold=" << threshold << ")"; break;
    }
    if (!include_local) os << ",no-local";
    if (kind != ReorthKind::None) os << ",passes=" << passes;
    return os.str();
}

double OmegaEstimate::max_previous(Side s) const {
    const auto& e = side(s);
    double m = 0.0;
    for (std::size_t j = 0; j + 1 < e.size(); ++j) m = std::max(m, std::abs(e[j]));
    return m;
}

namespace {

double signed_bump(double x, double d) { return x >= 0.0 ? x + d : x - d; }

double clamp_magnitude(double x, double lo) {
    const double a = std::clamp(std::abs(x), lo, 1.0);
    return x < 0.0 ? -a : a;
}

// 1-based accessors with zero outside the recorded range; beta_1 is the
// starting-vector norm and never enters the recurrence.
struct Coeffs {
    std::span<const double> alphas;
    std::span<const double> betas;
    double alpha(Index j) const {
        return j >= 1 && static_cast<std::size_t>(j) <= alphas.size() ? alphas[static_cast<std::size_t>(j - 1)] : 0.0;
    }
    double beta(Index j) const {
        return j >= 2 && static_cast<std::size_t>(j) <= betas.size() ? betas[static_cast<std::size_t>(j - 1)] : 0.0;
    }
};

}  // namespace

void omega_update(OmegaEstimate& omega, Side side, Index i, std::span<const double> alphas,
                  std::span<const double> betas, double new_norm, double norm_a_est) {
    if (i < 1) throw InvalidInput("omega_update: step index must be >= 1");
    if (new_norm <= 0.0) return;
    const Coeffs c{alphas, betas};
    const double eps1 = omega.reset;
    auto& mu = omega.left;
    auto& nu = omega.right;
    const auto ui = static_cast<std::size_t>(i);

    if (side == Side::Left) {
        // u_j^T u_{i+1} from u_j^T u_i (mu) and v_j^T v_i (nu), j = 1..i.
        if (mu.size() != ui || nu.size() != ui) throw StateError("omega_update: estimates out of step (left)");
        std::vector<double> next(ui + 1);
        const double local = std::hypot(c.alpha(i), c.beta(i));
        for (Index j = 1; j <= i; ++j) {
            const std::size_t jj = static_cast<std::size_t>(j - 1);
            const double nu_prev = j >= 2 ? nu[jj - 1] : 0.0;
            double t = c.alpha(j) * nu[jj] + c.beta(j) * nu_prev - c.alpha(i) * mu[jj];
            const double d = eps1 * (local + std::hypot(c.alpha(j), c.beta(j)) + norm_a_est);
            next[jj] = clamp_magnitude(signed_bump(t, d) / new_norm, omega.floor);
        }
        next[ui] = 1.0;
        mu = std::move(next);
    } else {
        // v_j^T v_{i+1} from u_j^T u_{i+1} (mu, already advanced) and v_j^T v_i (nu).
        if (mu.size() != ui + 1 || nu.size() != ui) throw StateError("omega_update: estimates out of step (right)");
        std::vector<double> next(ui + 1);
        const double beta_new = c.beta(i + 1);
        const double local = std::hypot(new_norm, beta_new);
        for (Index j = 1; j <= i; ++j) {
            const std::size_t jj = static_cast<std::size_t>(j - 1);
            double t = c.alpha(j) * mu[jj] + c.beta(j + 1) * mu[jj + 1] - beta_new * nu[jj];
            const double d = eps1 * (std::hypot(c.alpha(j), c.beta(j + 1)) + local + norm_a_est);
            next[jj] = clamp_magnitude(signed_bump(t, d) / new_norm, omega.floor);
        }
        next[ui] = 1.0;
        nu = std::move(next);
    }
}

void omega_reset(OmegaEstimate& omega, Side side, const IndexSet& targets) {
    auto& e = omega.side(side);
    for (Index j : targets) {
        if (static_cast<std::size_t>(j) + 1 < e.size()) e[static_cast<std::size_t>(j)] = omega.reset;
    }
}

IndexSet select_targets(const ReorthPolicy& policy, Side side, Index i, std::span<const double> estimates) {
    IndexSet out;
    if (i < 1) return out;
    auto all = [&] {
        IndexSet s;
        for (Index j = 0; j < i; ++j) s.push_back(j);
        return s;
    };
    auto max_est = [&] {
        double m = 0.0;
        for (Index j = 0; j < i && static_cast<std::size_t>(j) < estimates.size(); ++j)
            m = std::max(m, std::abs(estimates[static_cast<std::size_t>(j)]));
        return m;
    };

    switch (policy.kind) {
        case ReorthKind::None:
            break;
        case ReorthKind::Full:
            out = all();
            break;
        case ReorthKind::OneSided:
            if (side == policy.side) out = all();
            break;
        case ReorthKind::Semi:
            if (max_est() > policy.threshold) out = all();
            break;
        case ReorthKind::Partial: {
            if (static_cast<Index>(estimates.size()) < i) {
                throw DimensionError("select_targets: need one estimate per previous vector");
            }
            const double delta = policy.delta > 0.0 ? policy.delta : policy.eta;
            if (max_est() <= delta) break;
            std::vector<char> chosen(static_cast<std::size_t>(i), 0);
            auto est = [&](Index j) { return std::abs(estimates[static_cast<std::size_t>(j)]); };
            for (Index j = 0; j < i; ++j) {
                if (est(j) < delta || chosen[static_cast<std::size_t>(j)]) continue;
                Index lo = j, hi = j;
                while (lo > 0 && est(lo - 1) >= policy.eta) --lo;
                while (hi + 1 < i && est(hi + 1) >= policy.eta) ++hi;
                lo = std::max<Index>(0, lo - 1);
                hi = std::min<Index>(i - 1, hi + 1);
                for (Index t = lo; t <= hi; ++t) chosen[static_cast<std::size_t>(t)] = 1;
            }
            for (Index j = 0; j < i; ++j)
                if (chosen[static_cast<std::size_t>(j)]) out.push_back(j);
            break;
        }
    }
    if (!policy.include_local && !out.empty() && out.back() == i - 1) out.pop_back();
    return out;
}

Orthogonalized orthogonalize(const Eigen::Ref<const Vector>& w, const Eigen::Ref<const Matrix>& basis,
                             const IndexSet& targets, int passes, Precision precision) {
    if (w.size() != basis.rows()) throw DimensionError("orthogonalize: vector and basis lengths differ");
    for (Index j : targets) {
        if (j < 0 || j >= basis.cols()) throw DimensionError("orthogonalize: target index outside basis");
    }
    Orthogonalized out;
    out.w = w;
    out.coeffs = Vector::Zero(basis.cols());
    out.norm_before = round_to(precision, w.norm());
    if (!targets.empty()) {
        Vector proj(static_cast<Index>(targets.size()));
        Vector update(w.size());
        for (int pass = 0; pass < passes; ++pass) {
            for (std::size_t t = 0; t < targets.size(); ++t) {
                proj[static_cast<Index>(t)] = round_to(precision, basis.col(targets[t]).dot(out.w));
            }
            update.setZero();
            for (std::size_t t = 0; t < targets.size(); ++t) {
                update.noalias() += proj[static_cast<Index>(t)] * basis.col(targets[t]);
            }
            out.w -= update;
            if (precision == Precision::binary32) {
                out.w = out.w.unaryExpr([](double x) { return round_to(Precision::binary32, x); });
            }
            for (std::size_t t = 0; t < targets.size(); ++t) {
                double& c = out.coeffs[targets[t]];
                c = round_to(precision, c + proj[static_cast<Index>(t)]);
            }
            out.inner_products += static_cast<Index>(targets.size());
        }
    }
    out.norm_after = round_to(precision, out.w.norm());
    return out;
}

Reorthogonalizer::Reorthogonalizer(ReorthPolicy policy, Precision precision, double norm_a_est, Index k_max)
    : policy_(policy), norm_a_est_(norm_a_est) {
    policy_.validate();
    const double u = unit_roundoff(precision);
    omega_.floor = u;
    omega_.reset = 100.0 * u;
    if (policy_.kind == ReorthKind::Partial && policy_.delta == 0.0) {
        const double eps = 2.0 * u;
        policy_.delta = std::sqrt(eps / static_cast<double>(std::max<Index>(1, k_max)));
        if (policy_.delta < policy_.eta) policy_.delta = policy_.eta;
    }
}

IndexSet Reorthogonalizer::plan(Side side, Index i, std::span<const double> alphas, std::span<const double> betas,
                                double new_norm) {
    omega_update(omega_, side, i, alphas, betas, new_norm, norm_a_est_);
    const auto& est = omega_.side(side);
    IndexSet targets = select_targets(policy_, side, i, std::span<const double>(est.data(), est.size()));
    if (policy_.kind == ReorthKind::Partial) {
        IndexSet& forced = side == Side::Left ? forced_left_ : forced_right_;
        const bool triggered = !targets.empty();
        if (!forced.empty()) {
            IndexSet merged;
            std::set_union(targets.begin(), targets.end(), forced.begin(), forced.end(), std::back_inserter(merged));
            targets = std::move(merged);
            if (!policy_.include_local && !targets.empty() && targets.back() == i - 1) targets.pop_back();
        }
        forced = triggered ? targets : IndexSet{};
    }
    return targets;
}

void Reorthogonalizer::commit(Side side, const IndexSet& targets, Index inner_products) {
    if (targets.empty()) return;
    omega_reset(omega_, side, targets);
    (side == Side::Left ? events_left_ : events_right_) += 1;
    inner_products_ += inner_products;
}

}  // namespace lbro

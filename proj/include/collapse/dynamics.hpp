// The two measurement dynamics: unitary (Everett) evolution and projective
// (Copenhagen) collapse, with ensemble bookkeeping, seeded outcome sampling
// and the conservation auditor that exposes their disagreement.
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "collapse/qcore.hpp"

namespace collapse {

// One post-collapse branch.
struct Branch {
    double probability;
    StateVec state;
};

// Probability-weighted set of post-collapse states. Probabilities sum to 1;
// branches below kBranchCutoff are dropped at construction.
class Ensemble {
  public:
    explicit Ensemble(std::vector<Branch> branches)
        : branches_(std::move(branches)) {
        double total = 0.0;
        for (const auto& b : branches_) {
            if (b.probability < 0.0)
                throw std::invalid_argument("Ensemble: negative probability");
            if (!b.state.is_normalized())
                throw std::invalid_argument("Ensemble: unnormalized branch state");
            total += b.probability;
        }
        if (std::abs(total - 1.0) > kStateTol)
            throw std::invalid_argument("Ensemble: probabilities sum to " +
                                        std::to_string(total));
    }

    const std::vector<Branch>& branches() const { return branches_; }
    std::size_t size() const { return branches_.size(); }
    const Branch& branch(std::size_t i) const { return branches_.at(i); }

  private:
    std::vector<Branch> branches_;
};

namespace detail {

// Complete orthogonal family check. Completeness (ΣP = I) is always checked
// elementwise. Idempotence/orthogonality uses exact products for small
// dimensions, an elementwise fast path when every projector is diagonal
// (all families built in this library are), and seeded matvec probes for
// large non-diagonal families where k² dense products would be wasteful.
inline void check_projector_family(std::span<const Operator> projectors,
                                   std::size_t dim) {
    if (projectors.empty())
        throw std::invalid_argument("projector family: empty");
    for (const auto& p : projectors) {
        if (p.dim() != dim)
            throw std::invalid_argument("projector family: dimension mismatch");
        if (!p.hermitian_flag())
            throw std::invalid_argument("projector family: non-hermitian member");
    }

    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) {
            cplx s(0.0);
            for (const auto& p : projectors) s += p.at(r, c);
            if (r == c) s -= cplx(1.0);
            if (std::abs(s) > kStateTol)
                throw std::invalid_argument("projector family: does not sum to identity");
        }

    bool all_diagonal = true;
    for (const auto& p : projectors) {
        for (std::size_t r = 0; r < dim && all_diagonal; ++r)
            for (std::size_t c = 0; c < dim; ++c)
                if (r != c && std::abs(p.at(r, c)) > kStateTol) {
                    all_diagonal = false;
                    break;
                }
        if (!all_diagonal) break;
    }

    if (all_diagonal) {
        for (std::size_t i = 0; i < projectors.size(); ++i)
            for (std::size_t j = i; j < projectors.size(); ++j)
                for (std::size_t k = 0; k < dim; ++k) {
                    cplx prod = projectors[i].at(k, k) * projectors[j].at(k, k);
                    cplx want = (i == j) ? projectors[i].at(k, k) : cplx(0.0);
                    if (std::abs(prod - want) > kStateTol)
                        throw std::invalid_argument(
                            "projector family: not orthogonal idempotents");
                }
        return;
    }

    if (dim <= 256) {
        for (std::size_t i = 0; i < projectors.size(); ++i)
            for (std::size_t j = i; j < projectors.size(); ++j) {
                Operator prod = projectors[i].multiply(projectors[j]);
                for (std::size_t r = 0; r < dim; ++r)
                    for (std::size_t c = 0; c < dim; ++c) {
                        cplx want = (i == j) ? projectors[i].at(r, c) : cplx(0.0);
                        if (std::abs(prod.at(r, c) - want) > kStateTol)
                            throw std::invalid_argument(
                                "projector family: not orthogonal idempotents");
                    }
            }
        return;
    }

    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int probe = 0; probe < 3; ++probe) {
        std::vector<cplx> v(dim);
        for (auto& x : v) x = cplx(unit(rng), unit(rng));
        double scale = std::sqrt(vec_norm_sq(v));
        for (auto& x : v) x /= scale;
        std::vector<std::vector<cplx>> pv;
        pv.reserve(projectors.size());
        for (const auto& p : projectors) pv.push_back(matvec(p, v));
        for (std::size_t i = 0; i < projectors.size(); ++i)
            for (std::size_t j = i; j < projectors.size(); ++j) {
                auto pij = matvec(projectors[i], pv[j]);
                for (std::size_t k = 0; k < dim; ++k) {
                    cplx want = (i == j) ? pv[i][k] : cplx(0.0);
                    if (std::abs(pij[k] - want) > 1e-8)
                        throw std::invalid_argument(
                            "projector family: not orthogonal idempotents");
                }
            }
    }
}

// 53-bit uniform in [0, 1), built from raw generator output so the mapping
// is identical on every platform.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Unitary (Everett) step: U|ψ⟩.
inline StateVec evolve_everett(const Operator& u, const StateVec& psi) {
    if (!u.unitary_flag())
        throw std::invalid_argument("evolve_everett: operator is not unitary");
    if (!psi.is_normalized())
        throw std::invalid_argument("evolve_everett: state is not normalized");
    return apply(u, psi).normalized();
}

// Projective (Copenhagen) collapse: branch i has probability ⟨ψ|Pᵢ|ψ⟩ and
// state Pᵢ|ψ⟩/‖Pᵢ|ψ⟩‖; zero-probability branches are dropped.
inline Ensemble collapse_ensemble(const StateVec& psi,
                                  std::span<const Operator> projectors) {
    if (!psi.is_normalized())
        throw std::invalid_argument("collapse_ensemble: state is not normalized");
    detail::check_projector_family(projectors, psi.dim());
    std::vector<Branch> branches;
    for (const auto& p : projectors) {
        StateVec image = apply(p, psi);
        double prob = image.norm_sq();
        if (prob < kBranchCutoff) continue;
        branches.push_back({prob, image.normalized()});
    }
    return Ensemble(std::move(branches));
}

// Branch probabilities in projector order, including dropped-by-collapse
// zero branches (used by samplers and reports).
inline std::vector<double> outcome_probabilities(
    const StateVec& psi, std::span<const Operator> projectors) {
    detail::check_projector_family(projectors, psi.dim());
    std::vector<double> probs;
    probs.reserve(projectors.size());
    for (const auto& p : projectors) probs.push_back(apply(p, psi).norm_sq());
    return probs;
}

// Deterministic seeded sampler over a fixed outcome distribution. Replay with
// the same seed reproduces the same outcome sequence; parallel harnesses give
// worker k the seed root ⊕ k.
class OutcomeSampler {
  public:
    OutcomeSampler(std::vector<double> probabilities, std::uint64_t seed)
        : cdf_(std::move(probabilities)), rng_(seed) {
        double run = 0.0;
        for (auto& c : cdf_) {
            run += c;
            c = run;
        }
        if (std::abs(run - 1.0) > kStateTol)
            throw std::invalid_argument("OutcomeSampler: probabilities sum to " +
                                        std::to_string(run));
    }

    std::size_t draw() {
        double u = detail::uniform_unit(rng_);
        for (std::size_t i = 0; i < cdf_.size(); ++i)
            if (u < cdf_[i]) return i;
        return cdf_.size() - 1;
    }

    std::vector<std::int64_t> draw_counts(std::int64_t n_samples) {
        std::vector<std::int64_t> counts(cdf_.size(), 0);
        for (std::int64_t s = 0; s < n_samples; ++s) ++counts[draw()];
        return counts;
    }

  private:
    std::vector<double> cdf_;
    std::mt19937_64 rng_;
};

// Monte Carlo view of the collapse rule: one outcome drawn from the Born
// distribution by a seeded deterministic generator.
inline std::pair<std::size_t, StateVec> collapse_sample(
    const StateVec& psi, std::span<const Operator> projectors,
    std::uint64_t seed) {
    auto probs = outcome_probabilities(psi, projectors);
    OutcomeSampler sampler(probs, seed);
    std::size_t outcome = sampler.draw();
    return {outcome, apply(projectors[outcome], psi).normalized()};
}

// Outcome frequencies over n_samples draws with one seeded generator.
inline std::vector<std::int64_t> sample_counts(const StateVec& psi,
                                               std::span<const Operator> projectors,
                                               std::int64_t n_samples,
                                               std::uint64_t seed) {
    OutcomeSampler sampler(outcome_probabilities(psi, projectors), seed);
    return sampler.draw_counts(n_samples);
}

// Σ pᵢ ⟨A⟩ over branches.
inline double ensemble_expectation(const Ensemble& e, const Operator& a) {
    if (!a.hermitian_flag())
        throw std::invalid_argument("ensemble_expectation: non-hermitian observable");
    double total = 0.0;
    for (const auto& b : e.branches())
        total += b.probability * expectation(a, b.state);
    return total;
}

// Expectation of one observable before the process, after the unitary
// (Everett) and after collapse of the evolved state (Copenhagen).
struct AuditReport {
    std::string observable;
    double expectation_before = 0.0;
    double expectation_after_everett = 0.0;
    double expectation_after_copenhagen = 0.0;

    double delta() const {
        return expectation_after_everett - expectation_after_copenhagen;
    }
};

inline AuditReport conservation_audit(const Operator& u,
                                      std::span<const Operator> projectors,
                                      const Operator& a, const StateVec& psi,
                                      std::string observable_name = "observable") {
    AuditReport report;
    report.observable = std::move(observable_name);
    report.expectation_before = expectation(a, psi);
    StateVec evolved = evolve_everett(u, psi);
    report.expectation_after_everett = expectation(a, evolved);
    report.expectation_after_copenhagen =
        ensemble_expectation(collapse_ensemble(evolved, projectors), a);
    return report;
}

}  // namespace collapse

// Wires the core, spin, observer and dynamics layers into the three
// experiment protocols and the retrodiction engine, producing reports.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "collapse/dynamics.hpp"
#include "collapse/observer.hpp"
#include "collapse/qcore.hpp"
#include "collapse/spin.hpp"

namespace collapse {

// Default RNG seed for reproducible runs; overridable via --seed or the
// COLLAPSE_LAB_SEED environment variable.
inline constexpr std::uint64_t kDefaultSeed = 0xC011A95E5EEDull;

enum class Interpretation { everett, copenhagen, both };

inline std::string to_string(Interpretation i) {
    switch (i) {
        case Interpretation::everett: return "everett";
        case Interpretation::copenhagen: return "copenhagen";
        case Interpretation::both: return "both";
    }
    return "?";
}

inline Interpretation parse_interpretation(const std::string& s) {
    if (s == "everett") return Interpretation::everett;
    if (s == "copenhagen") return Interpretation::copenhagen;
    if (s == "both") return Interpretation::both;
    throw std::invalid_argument("unknown interpretation '" + s + "'");
}

enum class ElectronInitial { plus_z, minus_z, plus_x, minus_x };

inline std::string to_string(ElectronInitial e) {
    switch (e) {
        case ElectronInitial::plus_z: return "+z";
        case ElectronInitial::minus_z: return "-z";
        case ElectronInitial::plus_x: return "+x";
        case ElectronInitial::minus_x: return "-x";
    }
    return "?";
}

inline ElectronInitial parse_electron_initial(const std::string& s) {
    if (s == "+z") return ElectronInitial::plus_z;
    if (s == "-z") return ElectronInitial::minus_z;
    if (s == "+x") return ElectronInitial::plus_x;
    if (s == "-x") return ElectronInitial::minus_x;
    throw std::invalid_argument("unknown electron state '" + s +
                                "' (expected +z, -z, +x or -x)");
}

inline const StateVec& electron_state(ElectronInitial e) {
    switch (e) {
        case ElectronInitial::plus_z: return ket_plus_z();
        case ElectronInitial::minus_z: return ket_minus_z();
        case ElectronInitial::plus_x: return ket_plus_x();
        case ElectronInitial::minus_x: return ket_minus_x();
    }
    throw std::invalid_argument("electron_state: bad enum");
}

enum class ObservedBranch { m_plus_plus, m_plus_minus };

inline std::string to_string(ObservedBranch b) {
    return b == ObservedBranch::m_plus_plus ? "M_++" : "M_+-";
}

inline ObservedBranch parse_observed_branch(const std::string& s) {
    if (s == "M++" || s == "M_++") return ObservedBranch::m_plus_plus;
    if (s == "M+-" || s == "M_+-") return ObservedBranch::m_plus_minus;
    throw std::invalid_argument("unknown branch '" + s +
                                "' (expected M++ or M+-)");
}

// One retrodicted prior-state component.
struct RetrodictionFinding {
    std::string stage;  // pre_second_measurement | pre_first_measurement
    std::string state;  // ket text, e.g. "|-x⟩|M_+⟩"
    double probability = 0.0;
    bool false_memory = false;
    std::string tag;  // ok | false-memory | primed-pre-state
};

struct PhaseSweepPoint {
    double phi = 0.0;
    double false_memory_overlap_sq = 0.0;
};

struct SampledOutcomes {
    std::int64_t samples = 0;
    std::vector<double> frequencies;  // aligned with the outcome labels
};

using InputValue = std::variant<std::string, double, std::int64_t>;

struct ExperimentReport {
    std::string experiment;
    std::vector<std::pair<std::string, InputValue>> inputs;
    Interpretation interpretation = Interpretation::both;
    std::string observable;

    std::optional<double> everett;
    std::optional<double> copenhagen;

    // recomputed, never stored
    std::optional<double> delta() const {
        if (everett && copenhagen) return *everett - *copenhagen;
        return std::nullopt;
    }

    std::vector<std::string> outcome_labels;
    std::vector<double> outcome_probs;
    bool count_distribution = false;  // labels are 0..N -> serialize as array

    std::optional<SampledOutcomes> sampled;
    std::optional<AuditReport> audit;
    std::vector<RetrodictionFinding> findings;
    std::vector<PhaseSweepPoint> phase_sweep;

    // audit runs only: worst |before − everett| over random physical inputs
    std::optional<double> max_conservation_violation;

    std::uint64_t seed = kDefaultSeed;
    double runtime_seconds = 0.0;
};

namespace detail {

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_ =
        std::chrono::steady_clock::now();
};

inline bool wants_everett(Interpretation i) {
    return i != Interpretation::copenhagen;
}

inline bool wants_copenhagen(Interpretation i) {
    return i != Interpretation::everett;
}

}  // namespace detail

// ----- §-style protocol 1: electron measure-and-flip -------------------------

// Bob measures the x-spin of an incoming electron with the conditional
// flip device; Alice then reads the expectation of Bob's J_z. Everett keeps
// the entangled superposition, Copenhagen collapses onto a memory branch.
inline ExperimentReport run_electron_experiment(
    ElectronInitial initial, Interpretation interpretation, double j0,
    std::int64_t samples = 0, std::uint64_t seed = kDefaultSeed) {
    detail::Stopwatch timer;
    ObserverRegister reg = ObserverRegister::single_measurement(j0);
    Operator device = device_unitary(DeviceKind::measure_and_flip_x, reg);
    StateVec psi0 = tensor_state(electron_state(initial), reg.ket(MemoryLabel::baseline()));
    Operator bob_jz = tensor_op(Operator::identity(2), reg.jz());

    ExperimentReport report;
    report.experiment = "electron";
    report.inputs = {{"initial", to_string(initial)}, {"j0", j0}};
    report.interpretation = interpretation;
    report.observable = "observer J_z";
    report.seed = seed;

    StateVec evolved = evolve_everett(device, psi0);
    if (detail::wants_everett(interpretation))
        report.everett = expectation(bob_jz, evolved);

    if (detail::wants_copenhagen(interpretation)) {
        auto projectors = memory_projector_family(reg);
        Ensemble ensemble = collapse_ensemble(evolved, projectors);
        report.copenhagen = ensemble_expectation(ensemble, bob_jz);

        auto probs = outcome_probabilities(evolved, projectors);
        std::vector<std::size_t> kept;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] <= kBranchCutoff) continue;
            kept.push_back(i);
            report.outcome_labels.push_back(reg.labels()[i].text());
            report.outcome_probs.push_back(probs[i]);
        }
        if (samples > 0) {
            auto counts = sample_counts(evolved, projectors, samples, seed);
            SampledOutcomes mc;
            mc.samples = samples;
            for (std::size_t i : kept)
                mc.frequencies.push_back(static_cast<double>(counts[i]) /
                                         static_cast<double>(samples));
            report.sampled = std::move(mc);
        }
    }

    if (interpretation == Interpretation::both)
        report.audit =
            conservation_audit(device, memory_projector_family(reg),
                               total_jz(reg), psi0, "total J_z");

    report.runtime_seconds = timer.seconds();
    return report;
}

// ----- protocol 2: N right-circular photons -----------------------------------

// Alice sends N right-circularly polarized photons (total spin N); Bob
// counts horizontal photons. Reports Bob's final spin expectation as the
// baseline n_b plus the photon spin transferred under each dynamics:
// the uncollapsed beam carries N, the collapsed fixed-count mixture 0.
inline ExperimentReport run_photon_experiment(
    std::int64_t n_photons, Interpretation interpretation, double n_b,
    std::int64_t samples = 0, std::uint64_t seed = kDefaultSeed) {
    if (n_photons < 1)
        throw std::invalid_argument("run_photon_experiment: N must be >= 1");
    detail::Stopwatch timer;

    ExperimentReport report;
    report.experiment = "photons";
    report.inputs = {{"n", n_photons}, {"nb", n_b}};
    report.interpretation = interpretation;
    report.observable = "observer total spin";
    report.seed = seed;

    double photon_spin_everett = 0.0;
    double photon_spin_copenhagen = 0.0;
    std::vector<double> distribution;

    if (n_photons <= kDenseMaxPhotons) {
        int n = static_cast<int>(n_photons);
        StateVec beam = ket_r_power(n);
        Operator spin_total = total_spin_op(n);
        auto projectors = fixed_count_projector_family(n);
        photon_spin_everett = expectation(spin_total, beam);
        Ensemble ensemble = collapse_ensemble(beam, projectors);
        photon_spin_copenhagen = ensemble_expectation(ensemble, spin_total);
        distribution = outcome_probabilities(beam, projectors);
    } else {
        // The fixed-count theorem makes the large-N path analytic: every
        // collapse outcome has zero spin expectation while the uncollapsed
        // beam keeps one unit per photon.
        photon_spin_everett = static_cast<double>(n_photons);
        photon_spin_copenhagen = 0.0;
        distribution = fast_count_distribution(n_photons);
    }

    if (detail::wants_everett(interpretation))
        report.everett = n_b + photon_spin_everett;
    if (detail::wants_copenhagen(interpretation)) {
        report.copenhagen = n_b + photon_spin_copenhagen;
        report.count_distribution = true;
        report.outcome_probs = distribution;
        report.outcome_labels.reserve(distribution.size());
        for (std::size_t i = 0; i < distribution.size(); ++i)
            report.outcome_labels.push_back(std::to_string(i));
        if (samples > 0) {
            OutcomeSampler sampler(distribution, seed);
            auto counts = sampler.draw_counts(samples);
            SampledOutcomes mc;
            mc.samples = samples;
            mc.frequencies.reserve(counts.size());
            for (auto c : counts)
                mc.frequencies.push_back(static_cast<double>(c) /
                                         static_cast<double>(samples));
            report.sampled = std::move(mc);
        }
    }

    if (interpretation == Interpretation::both) {
        AuditReport audit;
        audit.observable = "photon total spin";
        audit.expectation_before = photon_spin_everett;
        audit.expectation_after_everett = photon_spin_everett;
        audit.expectation_after_copenhagen = photon_spin_copenhagen;
        report.audit = audit;
    }

    report.runtime_seconds = timer.seconds();
    return report;
}

// ----- false-memory classification --------------------------------------------

// True iff the component is a product of an electron eigenstate (in the
// most recent measurement's basis) and a memory label whose last remembered
// outcome disagrees with that eigenstate's sign. Components that are not
// such products are rejected.
inline bool classify_false_memory(const StateVec& component,
                                  const ObserverRegister& reg,
                                  const std::string& measurement_history) {
    if (component.dim() != 2 * reg.dim())
        throw std::invalid_argument(
            "classify_false_memory: component is not on electron x register");

    // locate the single occupied memory label
    std::size_t memory_index = reg.dim();
    cplx electron_part[2] = {cplx(0.0), cplx(0.0)};
    for (std::size_t m = 0; m < reg.dim(); ++m) {
        cplx up = component.amp(m);                 // (+z, m)
        cplx down = component.amp(reg.dim() + m);   // (−z, m)
        if (std::norm(up) + std::norm(down) <= kStateTol) continue;
        if (memory_index != reg.dim())
            throw std::invalid_argument(
                "classify_false_memory: component spans several memory labels");
        memory_index = m;
        electron_part[0] = up;
        electron_part[1] = down;
    }
    if (memory_index == reg.dim())
        throw std::invalid_argument("classify_false_memory: null component");

    const MemoryLabel& memory = reg.labels()[memory_index];
    if (measurement_history.empty() || memory.transcript.empty()) return false;

    char basis = measurement_history.back();
    double p_plus = 0.0;
    if (basis == 'x') {
        p_plus = std::norm((electron_part[0] + electron_part[1]) /
                           std::sqrt(2.0));
    } else if (basis == 'z') {
        p_plus = std::norm(electron_part[0]);
    } else {
        throw std::invalid_argument(
            "classify_false_memory: history symbols must be x or z");
    }
    double total = std::norm(electron_part[0]) + std::norm(electron_part[1]);
    bool electron_plus;
    if (p_plus >= total * (1.0 - kStateTol))
        electron_plus = true;
    else if (p_plus <= total * kStateTol)
        electron_plus = false;
    else
        throw std::invalid_argument(
            "classify_false_memory: electron factor is not an eigenstate of "
            "the last measured basis");

    char remembered = memory.transcript.back();
    return electron_plus != (remembered == '+');
}

// ----- protocol 3: retrospective Born rule ------------------------------------

namespace detail {

struct RetrodictionSetup {
    ObserverRegister reg;
    Operator u1;
    Operator u2;

    static RetrodictionSetup make() {
        ObserverRegister reg = ObserverRegister::two_measurement(0.0);
        Operator u1 = device_unitary(DeviceKind::measure_x, reg);
        Operator u2 = device_unitary(DeviceKind::measure_z, reg);
        return {std::move(reg), std::move(u1), std::move(u2)};
    }
};

// Decomposes a state in the electron-x ⊗ memory product basis and emits one
// finding per component above the branch cutoff.
inline std::vector<RetrodictionFinding> decompose_findings(
    const StateVec& psi, const ObserverRegister& reg, const std::string& stage,
    const std::string& history) {
    std::vector<RetrodictionFinding> findings;
    double total = 0.0;
    for (int sign = 0; sign < 2; ++sign) {
        const StateVec& electron = sign == 0 ? ket_plus_x() : ket_minus_x();
        for (const auto& memory : reg.labels()) {
            StateVec basis_component = product_ket(electron, reg, memory);
            double p = std::norm(inner(basis_component, psi));
            if (p <= kBranchCutoff) continue;
            RetrodictionFinding f;
            f.stage = stage;
            f.state = BasisLabel::joined(BasisLabel(sign == 0 ? "+x" : "-x"),
                                         BasisLabel(memory.text()))
                          .ket();
            f.probability = p;
            if (memory.primed) {
                f.false_memory = false;
                f.tag = "primed-pre-state";
            } else {
                f.false_memory = classify_false_memory(basis_component, reg, history);
                f.tag = f.false_memory ? "false-memory" : "ok";
            }
            findings.push_back(std::move(f));
            total += p;
        }
    }
    if (std::abs(total - 1.0) > kStateTol)
        throw std::runtime_error(
            "retrodiction: component probabilities sum to " +
            std::to_string(total));
    return findings;
}

}  // namespace detail

inline StateVec observed_branch_state(ObservedBranch branch,
                                      const ObserverRegister& reg) {
    if (branch == ObservedBranch::m_plus_plus)
        return product_ket(ket_plus_z(), reg, MemoryLabel::remembered("++"));
    return product_ket(ket_minus_z(), reg, MemoryLabel::remembered("+-"));
}

// Starting from an observed post-measurement branch, runs the inverse
// unitaries to enumerate Bob's possible earlier states with their Born
// probabilities, flagging false-memory components.
inline ExperimentReport run_retrodiction(ObservedBranch branch) {
    detail::Stopwatch timer;
    auto setup = detail::RetrodictionSetup::make();

    ExperimentReport report;
    report.experiment = "retrodict";
    report.inputs = {{"branch", to_string(branch)}};
    report.interpretation = Interpretation::copenhagen;
    report.observable = "retrodicted prior-state probabilities";

    StateVec observed = observed_branch_state(branch, setup.reg);
    StateVec pre_second = evolve_everett(setup.u2.adjoint(), observed);
    auto stage1 = detail::decompose_findings(pre_second, setup.reg,
                                             "pre_second_measurement", "x");

    StateVec pre_first = evolve_everett(setup.u1.adjoint(), pre_second);
    auto stage2 = detail::decompose_findings(pre_first, setup.reg,
                                             "pre_first_measurement", "");

    report.findings = std::move(stage1);
    report.findings.insert(report.findings.end(), stage2.begin(), stage2.end());
    report.runtime_seconds = timer.seconds();
    return report;
}

// Overlap of the inverse-evolved phase-twisted Everett state with the
// false-memory component |−x⟩|M_+⟩: |(1 − e^{iφ})/2|² = sin²(φ/2).
inline double retrodict_phase_overlap(double phi) {
    static const auto setup = detail::RetrodictionSetup::make();
    StateVec plus = product_ket(ket_plus_z(), setup.reg,
                                MemoryLabel::remembered("++"));
    StateVec minus = product_ket(ket_minus_z(), setup.reg,
                                 MemoryLabel::remembered("+-"));
    std::vector<cplx> amps(plus.dim());
    cplx phase = std::exp(cplx(0.0, phi));
    for (std::size_t i = 0; i < amps.size(); ++i)
        amps[i] = (plus.amp(i) + phase * minus.amp(i)) / std::sqrt(2.0);
    StateVec twisted(plus.space_ptr(), std::move(amps));
    StateVec retrodicted = evolve_everett(setup.u2.adjoint(), twisted);
    StateVec false_memory = product_ket(ket_minus_x(), setup.reg,
                                        MemoryLabel::remembered("+"));
    return std::norm(inner(false_memory, retrodicted));
}

inline std::vector<PhaseSweepPoint> retrodict_phase_sweep(
    const std::vector<double>& grid) {
    std::vector<PhaseSweepPoint> points;
    points.reserve(grid.size());
    for (double phi : grid)
        points.push_back({phi, retrodict_phase_overlap(phi)});
    return points;
}

// ----- conservation audit runner ----------------------------------------------

// Random normalized electron state tensored with |M_B⟩: the physical
// subspace of the measure-and-flip device.
inline StateVec random_physical_input(const ObserverRegister& reg,
                                      std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    cplx alpha(gauss(rng), gauss(rng));
    cplx beta(gauss(rng), gauss(rng));
    double scale = std::sqrt(std::norm(alpha) + std::norm(beta));
    std::vector<cplx> amps = {
        (alpha * ket_plus_x().amp(0) + beta * ket_minus_x().amp(0)) / scale,
        (alpha * ket_plus_x().amp(1) + beta * ket_minus_x().amp(1)) / scale};
    StateVec electron(electron_space(), std::move(amps));
    return tensor_state(electron, reg.ket(MemoryLabel::baseline()));
}

// Audits conservation of total J_z through the measure-and-flip device under
// both dynamics, optionally sweeping random physical inputs for the worst
// Everett-side violation.
inline ExperimentReport run_audit_experiment(ElectronInitial initial, double j0,
                                             std::int64_t trials = 0,
                                             std::uint64_t seed = kDefaultSeed) {
    detail::Stopwatch timer;
    ObserverRegister reg = ObserverRegister::single_measurement(j0);
    Operator device = device_unitary(DeviceKind::measure_and_flip_x, reg);
    Operator jz_total = total_jz(reg);
    auto projectors = memory_projector_family(reg);

    ExperimentReport report;
    report.experiment = "audit";
    report.inputs = {{"initial", to_string(initial)},
                     {"j0", j0},
                     {"trials", trials}};
    report.interpretation = Interpretation::both;
    report.observable = "total J_z";
    report.seed = seed;

    StateVec psi0 = tensor_state(electron_state(initial),
                                 reg.ket(MemoryLabel::baseline()));
    report.audit = conservation_audit(device, projectors, jz_total, psi0,
                                      "total J_z");
    report.everett = report.audit->expectation_after_everett;
    report.copenhagen = report.audit->expectation_after_copenhagen;

    if (trials > 0) {
        std::mt19937_64 rng(seed);
        double worst = 0.0;
        for (std::int64_t t = 0; t < trials; ++t) {
            StateVec input = random_physical_input(reg, rng);
            double before = expectation(jz_total, input);
            double after = expectation(jz_total, evolve_everett(device, input));
            worst = std::max(worst, std::abs(after - before));
        }
        report.max_conservation_violation = worst;
    }

    report.runtime_seconds = timer.seconds();
    return report;
}

}  // namespace collapse

// Finite-dimensional observer registers labeled by measurement-memory
// transcripts, the observer angular-momentum operator, and the measurement
// device unitaries acting on electron ⊗ register.
#pragma once

#include <string>
#include <vector>

#include "collapse/qcore.hpp"
#include "collapse/spin.hpp"

namespace collapse {

// Memory transcript: the outcome signs the observer remembers, in order.
// Primed labels (M'_B) are pre-image states that never appear in physical
// initial conditions.
struct MemoryLabel {
    std::string transcript;  // over {+, -}
    bool primed = false;

    std::string text() const {
        std::string base = transcript.empty() ? "M_B" : "M_" + transcript;
        if (primed) base.insert(1, "'");
        return base;
    }

    static MemoryLabel baseline() { return {}; }
    static MemoryLabel primed_baseline() { return {"", true}; }
    static MemoryLabel remembered(std::string transcript) {
        for (char c : transcript)
            if (c != '+' && c != '-')
                throw std::invalid_argument(
                    "MemoryLabel: transcript symbols must be + or -");
        return {std::move(transcript), false};
    }

    bool operator==(const MemoryLabel&) const = default;
};

// Ordered register of memory labels with a baseline angular momentum j0.
//
// The operator J_z on the register is j0·I plus the coupling
// (1/2)(|M_+⟩⟨M_−| + |M_−⟩⟨M_+|) when both single-outcome labels are
// present. That is the smallest hermitian operator reproducing
// ⟨M_±|J_z|M_±⟩ = j0 together with j0 ± 1/2 on (|M_+⟩ ± |M_−⟩)/√2.
class ObserverRegister {
  public:
    ObserverRegister(std::vector<MemoryLabel> labels, double j0)
        : labels_(std::move(labels)),
          j0_(j0),
          space_(make_space(labels_)),
          jz_(make_jz(labels_, j0, *space_)) {
        bool has_baseline = false;
        for (const auto& l : labels_)
            if (l == MemoryLabel::baseline()) has_baseline = true;
        if (!has_baseline)
            throw std::invalid_argument("ObserverRegister: missing M_B");
    }

    // {M_B, M_+, M_−}: enough for the single x-measurement protocol.
    static ObserverRegister single_measurement(double j0) {
        return ObserverRegister({MemoryLabel::baseline(),
                                 MemoryLabel::remembered("+"),
                                 MemoryLabel::remembered("-")},
                                j0);
    }

    // {M_B, M'_B, M_+, M_−, M_++, M_+−}: the two-measurement retrodiction setup.
    static ObserverRegister two_measurement(double j0) {
        return ObserverRegister({MemoryLabel::baseline(),
                                 MemoryLabel::primed_baseline(),
                                 MemoryLabel::remembered("+"),
                                 MemoryLabel::remembered("-"),
                                 MemoryLabel::remembered("++"),
                                 MemoryLabel::remembered("+-")},
                                j0);
    }

    const std::vector<MemoryLabel>& labels() const { return labels_; }
    double j0() const { return j0_; }
    const SpacePtr& space() const { return space_; }
    std::size_t dim() const { return space_->dim(); }
    const Operator& jz() const { return jz_; }

    std::size_t index_of(const MemoryLabel& label) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == label) return i;
        throw std::invalid_argument("ObserverRegister: no label " + label.text());
    }

    bool has(const MemoryLabel& label) const {
        for (const auto& l : labels_)
            if (l == label) return true;
        return false;
    }

    StateVec ket(const MemoryLabel& label) const {
        return StateVec::basis_state(space_, index_of(label));
    }

  private:
    static SpacePtr make_space(const std::vector<MemoryLabel>& labels) {
        std::vector<BasisLabel> basis;
        basis.reserve(labels.size());
        for (const auto& l : labels) basis.emplace_back(l.text());
        return Space::make(std::move(basis));  // rejects duplicates
    }

    static Operator make_jz(const std::vector<MemoryLabel>& labels, double j0,
                            const Space& space) {
        std::size_t d = space.dim();
        std::vector<cplx> m(d * d, cplx(0.0));
        for (std::size_t i = 0; i < d; ++i) m[i * d + i] = cplx(j0);
        std::size_t plus = d, minus = d;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == MemoryLabel::remembered("+")) plus = i;
            if (labels[i] == MemoryLabel::remembered("-")) minus = i;
        }
        if (plus < d && minus < d) {
            m[plus * d + minus] = cplx(0.5);
            m[minus * d + plus] = cplx(0.5);
        }
        return Operator::hermitian(d, std::move(m));
    }

    std::vector<MemoryLabel> labels_;
    double j0_;
    SpacePtr space_;
    Operator jz_;
};

enum class DeviceKind {
    measure_and_flip_x,  // record x-spin, flip +1/2 results to −1/2
    measure_x,           // record x-spin, electron x-eigenstates unchanged
    measure_z,           // record z-spin, electron z-eigenstates unchanged
};

inline SpacePtr electron_register_space(const ObserverRegister& reg) {
    return Space::product(*electron_space(), *reg.space());
}

// |electron⟩ ⊗ |memory⟩ on the product space.
inline StateVec product_ket(const StateVec& electron, const ObserverRegister& reg,
                            const MemoryLabel& memory) {
    return tensor_state(electron, reg.ket(memory));
}

namespace detail {

// Register-side transition map for one electron eigenstate of a recording
// measurement, completed to a unitary on the register alone. Assembling the
// device as Σ_s |s⟩⟨s| ⊗ V_s keeps the measured electron basis exactly
// unchanged, including on the completion directions.
inline Operator register_block(const ObserverRegister& reg,
                               const std::vector<std::pair<MemoryLabel, MemoryLabel>>&
                                   transitions) {
    IsometrySpec spec;
    spec.space = reg.space();
    for (const auto& [from, to] : transitions)
        spec.pairs.emplace_back(reg.ket(from), reg.ket(to));
    return complete_isometry(spec);
}

}  // namespace detail

// Builds the measurement-device unitary on electron ⊗ register.
//
// measure_and_flip_x extends the two committed product pairs on the full
// space; the recording devices are assembled block-by-block in the measured
// electron basis.
inline Operator device_unitary(DeviceKind kind, const ObserverRegister& reg) {
    const MemoryLabel mb = MemoryLabel::baseline();
    const MemoryLabel mpb = MemoryLabel::primed_baseline();
    const MemoryLabel mp = MemoryLabel::remembered("+");
    const MemoryLabel mm = MemoryLabel::remembered("-");
    const MemoryLabel mpp = MemoryLabel::remembered("++");
    const MemoryLabel mpm = MemoryLabel::remembered("+-");

    auto require = [&](const MemoryLabel& l) {
        if (!reg.has(l))
            throw std::invalid_argument("device_unitary: register lacks " +
                                        l.text());
    };

    switch (kind) {
        case DeviceKind::measure_and_flip_x: {
            require(mp);
            require(mm);
            IsometrySpec spec;
            spec.space = electron_register_space(reg);
            // |+x⟩|M_B⟩ → |−x⟩|M_+⟩ ; |−x⟩|M_B⟩ → |−x⟩|M_−⟩
            spec.pairs.emplace_back(product_ket(ket_plus_x(), reg, mb),
                                    product_ket(ket_minus_x(), reg, mp));
            spec.pairs.emplace_back(product_ket(ket_minus_x(), reg, mb),
                                    product_ket(ket_minus_x(), reg, mm));
            return complete_isometry(spec);
        }
        case DeviceKind::measure_x: {
            require(mp);
            require(mm);
            require(mpb);
            // +x block: M_B → M_+ ; −x block: M_B → M_−, M'_B → M_+
            Operator v_plus = detail::register_block(reg, {{mb, mp}});
            Operator v_minus = detail::register_block(reg, {{mb, mm}, {mpb, mp}});
            Operator u = tensor_op(Operator::outer(ket_plus_x(), ket_plus_x()), v_plus) +
                         tensor_op(Operator::outer(ket_minus_x(), ket_minus_x()), v_minus);
            return Operator::unitary(u.dim(), u.entries());
        }
        case DeviceKind::measure_z: {
            require(mp);
            require(mpp);
            require(mpm);
            // +z block: M_+ → M_++ ; −z block: M_+ → M_+−
            Operator v_plus = detail::register_block(reg, {{mp, mpp}});
            Operator v_minus = detail::register_block(reg, {{mp, mpm}});
            Operator u = tensor_op(Operator::outer(ket_plus_z(), ket_plus_z()), v_plus) +
                         tensor_op(Operator::outer(ket_minus_z(), ket_minus_z()), v_minus);
            return Operator::unitary(u.dim(), u.entries());
        }
    }
    throw std::invalid_argument("device_unitary: unknown kind");
}

// J_z of electron plus observer: J_z ⊗ I + I ⊗ jz.
inline Operator total_jz(const ObserverRegister& reg) {
    return tensor_op(electron_jz(), Operator::identity(reg.dim())) +
           tensor_op(Operator::identity(2), reg.jz());
}

// Projector family {I ⊗ |m⟩⟨m|}: the observer-memory measurement Alice uses
// to resolve Copenhagen branches.
inline std::vector<Operator> memory_projector_family(const ObserverRegister& reg) {
    std::vector<Operator> fam;
    fam.reserve(reg.dim());
    for (std::size_t i = 0; i < reg.dim(); ++i) {
        std::vector<double> diag(reg.dim(), 0.0);
        diag[i] = 1.0;
        fam.push_back(tensor_op(Operator::identity(2),
                                Operator::diagonal_real(std::move(diag))));
    }
    return fam;
}

}  // namespace collapse

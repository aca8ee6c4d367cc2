// Core linear algebra over labeled finite-dimensional Hilbert spaces:
// basis labels, state vectors, dense operators, tensor products and
// completion of partially specified isometries into full unitaries.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace collapse {

using cplx = std::complex<double>;

// Tolerances used across the library. Construction-time checks are tighter
// than state-level checks; dimensions stay small enough that rounding never
// approaches either bound.
inline constexpr double kConstructTol = 1e-12;  // hermitian / unitary flags
inline constexpr double kStateTol = 1e-10;      // norms, orthonormality
inline constexpr double kBranchCutoff = 1e-12;  // zero-probability branches

// A basis label is an ordered tuple of factor labels. Single-space labels
// hold one part ("+z", "M_+", "HVH"); product-space labels concatenate the
// parts of their factors.
class BasisLabel {
  public:
    BasisLabel() = default;
    explicit BasisLabel(std::string atom) : parts_{std::move(atom)} {}
    explicit BasisLabel(std::vector<std::string> parts)
        : parts_(std::move(parts)) {}

    static BasisLabel joined(const BasisLabel& a, const BasisLabel& b) {
        std::vector<std::string> parts = a.parts_;
        parts.insert(parts.end(), b.parts_.begin(), b.parts_.end());
        return BasisLabel(std::move(parts));
    }

    const std::vector<std::string>& parts() const { return parts_; }

    // "+z" or "+z,M_B" (space bookkeeping and error messages)
    std::string text() const {
        std::string out;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (i > 0) out += ',';
            out += parts_[i];
        }
        return out;
    }

    // "|+z⟩|M_B⟩" (report-facing)
    std::string ket() const {
        std::string out;
        for (const auto& p : parts_) {
            out += "|";
            out += p;
            out += "⟩";
        }
        return out;
    }

    bool operator==(const BasisLabel&) const = default;

  private:
    std::vector<std::string> parts_;
};

// Ordered list of distinct basis labels. States and spaces are immutable
// after construction; spaces are shared by pointer to keep copies cheap.
class Space {
  public:
    explicit Space(std::vector<BasisLabel> labels) : labels_(std::move(labels)) {
        if (labels_.empty())
            throw std::invalid_argument("Space: empty label list");
        for (std::size_t i = 0; i < labels_.size(); ++i)
            for (std::size_t j = i + 1; j < labels_.size(); ++j)
                if (labels_[i] == labels_[j])
                    throw std::invalid_argument("Space: duplicate label '" +
                                                labels_[i].text() + "'");
    }

    static std::shared_ptr<const Space> make(std::vector<BasisLabel> labels) {
        return std::make_shared<const Space>(std::move(labels));
    }

    static std::shared_ptr<const Space> make_atoms(
        const std::vector<std::string>& atoms) {
        std::vector<BasisLabel> labels;
        labels.reserve(atoms.size());
        for (const auto& a : atoms) labels.emplace_back(a);
        return make(std::move(labels));
    }

    // Product space: labels are tuples in row-major (first factor slowest)
    // order, matching the Kronecker convention used by tensor_state/tensor_op.
    static std::shared_ptr<const Space> product(const Space& a, const Space& b) {
        std::vector<BasisLabel> labels;
        labels.reserve(a.dim() * b.dim());
        for (std::size_t i = 0; i < a.dim(); ++i)
            for (std::size_t j = 0; j < b.dim(); ++j)
                labels.push_back(BasisLabel::joined(a.label(i), b.label(j)));
        return make(std::move(labels));
    }

    std::size_t dim() const { return labels_.size(); }
    const BasisLabel& label(std::size_t i) const { return labels_.at(i); }
    const std::vector<BasisLabel>& labels() const { return labels_; }

    std::optional<std::size_t> index_of(const BasisLabel& l) const {
        auto it = std::find(labels_.begin(), labels_.end(), l);
        if (it == labels_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - labels_.begin());
    }

    bool operator==(const Space& rhs) const { return labels_ == rhs.labels_; }

  private:
    std::vector<BasisLabel> labels_;
};

using SpacePtr = std::shared_ptr<const Space>;

namespace detail {

inline double vec_norm_sq(std::span<const cplx> v) {
    double s = 0.0;
    for (const auto& a : v) s += std::norm(a);
    return s;
}

}  // namespace detail

// State vector over a labeled space. The public constructor enforces unit
// norm; `raw` builds an intermediate unnormalized stage that must be
// normalized explicitly before it enters dynamics.
class StateVec {
  public:
    StateVec(SpacePtr space, std::vector<cplx> amps)
        : StateVec(std::move(space), std::move(amps), /*check=*/true) {}

    static StateVec raw(SpacePtr space, std::vector<cplx> amps) {
        return StateVec(std::move(space), std::move(amps), /*check=*/false);
    }

    static StateVec basis_state(SpacePtr space, std::size_t index) {
        if (index >= space->dim())
            throw std::invalid_argument("basis_state: index out of range");
        std::vector<cplx> amps(space->dim(), cplx(0.0));
        amps[index] = cplx(1.0);
        return StateVec(std::move(space), std::move(amps), /*check=*/false);
    }

    const Space& space() const { return *space_; }
    const SpacePtr& space_ptr() const { return space_; }
    std::size_t dim() const { return amps_.size(); }
    const std::vector<cplx>& amps() const { return amps_; }
    cplx amp(std::size_t i) const { return amps_.at(i); }

    cplx amp(const BasisLabel& label) const {
        auto idx = space_->index_of(label);
        if (!idx)
            throw std::invalid_argument("StateVec: unknown label '" +
                                        label.text() + "'");
        return amps_[*idx];
    }

    double norm_sq() const { return detail::vec_norm_sq(amps_); }
    double norm() const { return std::sqrt(norm_sq()); }
    bool is_normalized(double tol = kStateTol) const {
        return std::abs(norm_sq() - 1.0) <= tol;
    }

    // Explicit normalization step; rejects null vectors.
    StateVec normalized() const {
        double n = norm();
        if (n < kBranchCutoff)
            throw std::invalid_argument("StateVec: cannot normalize null vector");
        std::vector<cplx> amps = amps_;
        for (auto& a : amps) a /= n;
        return StateVec(space_, std::move(amps), /*check=*/false);
    }

    StateVec scaled(cplx factor) const {
        std::vector<cplx> amps = amps_;
        for (auto& a : amps) a *= factor;
        return StateVec(space_, std::move(amps), /*check=*/false);
    }

  private:
    StateVec(SpacePtr space, std::vector<cplx> amps, bool check)
        : space_(std::move(space)), amps_(std::move(amps)) {
        if (!space_) throw std::invalid_argument("StateVec: null space");
        if (amps_.size() != space_->dim())
            throw std::invalid_argument("StateVec: amplitude count " +
                                        std::to_string(amps_.size()) +
                                        " does not match space dim " +
                                        std::to_string(space_->dim()));
        if (check && std::abs(detail::vec_norm_sq(amps_) - 1.0) > kStateTol)
            throw std::invalid_argument(
                "StateVec: amplitudes are not normalized (use raw() + "
                "normalized() for staged construction)");
    }

    SpacePtr space_;
    std::vector<cplx> amps_;
};

// Dense square complex matrix with hermitian/unitary flags fixed and
// verified at construction.
class Operator {
  public:
    static Operator dense(std::size_t dim, std::vector<cplx> entries) {
        return Operator(dim, std::move(entries), false, false);
    }

    static Operator hermitian(std::size_t dim, std::vector<cplx> entries) {
        Operator op(dim, std::move(entries), true, false);
        op.verify_hermitian();
        return op;
    }

    static Operator unitary(std::size_t dim, std::vector<cplx> entries) {
        Operator op(dim, std::move(entries), false, true);
        op.verify_unitary();
        return op;
    }

    static Operator with_flags(std::size_t dim, std::vector<cplx> entries,
                               bool hermitian, bool unitary) {
        Operator op(dim, std::move(entries), hermitian, unitary);
        if (hermitian) op.verify_hermitian();
        if (unitary) op.verify_unitary();
        return op;
    }

    static Operator identity(std::size_t dim) {
        std::vector<cplx> m(dim * dim, cplx(0.0));
        for (std::size_t i = 0; i < dim; ++i) m[i * dim + i] = cplx(1.0);
        return Operator(dim, std::move(m), true, true);
    }

    static Operator diagonal_real(std::vector<double> diag) {
        std::size_t dim = diag.size();
        std::vector<cplx> m(dim * dim, cplx(0.0));
        for (std::size_t i = 0; i < dim; ++i) m[i * dim + i] = cplx(diag[i]);
        return Operator(dim, std::move(m), true, false);
    }

    // |ket⟩⟨bra| on a common space.
    static Operator outer(const StateVec& ket, const StateVec& bra) {
        if (!(ket.space() == bra.space()))
            throw std::invalid_argument("outer: space mismatch");
        std::size_t d = ket.dim();
        std::vector<cplx> m(d * d);
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c)
                m[r * d + c] = ket.amp(r) * std::conj(bra.amp(c));
        return Operator(d, std::move(m), false, false);
    }

    std::size_t dim() const { return dim_; }
    const std::vector<cplx>& entries() const { return m_; }
    cplx at(std::size_t r, std::size_t c) const { return m_[r * dim_ + c]; }
    bool hermitian_flag() const { return hermitian_; }
    bool unitary_flag() const { return unitary_; }

    Operator adjoint() const {
        std::vector<cplx> m(dim_ * dim_);
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t c = 0; c < dim_; ++c)
                m[c * dim_ + r] = std::conj(m_[r * dim_ + c]);
        return Operator(dim_, std::move(m), hermitian_, unitary_);
    }

    Operator operator+(const Operator& rhs) const {
        require_same_dim(rhs);
        std::vector<cplx> m(m_);
        for (std::size_t i = 0; i < m.size(); ++i) m[i] += rhs.m_[i];
        return Operator(dim_, std::move(m), hermitian_ && rhs.hermitian_, false);
    }

    Operator operator-(const Operator& rhs) const {
        require_same_dim(rhs);
        std::vector<cplx> m(m_);
        for (std::size_t i = 0; i < m.size(); ++i) m[i] -= rhs.m_[i];
        return Operator(dim_, std::move(m), hermitian_ && rhs.hermitian_, false);
    }

    Operator scaled_real(double s) const {
        std::vector<cplx> m(m_);
        for (auto& e : m) e *= s;
        return Operator(dim_, std::move(m), hermitian_, false);
    }

    Operator multiply(const Operator& rhs) const {
        require_same_dim(rhs);
        std::vector<cplx> m(dim_ * dim_, cplx(0.0));
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t k = 0; k < dim_; ++k) {
                cplx a = m_[r * dim_ + k];
                if (a == cplx(0.0)) continue;
                for (std::size_t c = 0; c < dim_; ++c)
                    m[r * dim_ + c] += a * rhs.m_[k * dim_ + c];
            }
        return Operator(dim_, std::move(m), false, unitary_ && rhs.unitary_);
    }

    // max |(A†A − I)_ij|, useful for audits of constructed unitaries
    double unitarity_defect() const {
        double worst = 0.0;
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t c = 0; c < dim_; ++c) {
                cplx s(0.0);
                for (std::size_t k = 0; k < dim_; ++k)
                    s += std::conj(m_[k * dim_ + r]) * m_[k * dim_ + c];
                if (r == c) s -= cplx(1.0);
                worst = std::max(worst, std::abs(s));
            }
        return worst;
    }

  private:
    Operator(std::size_t dim, std::vector<cplx> m, bool hermitian, bool unitary)
        : dim_(dim), m_(std::move(m)), hermitian_(hermitian), unitary_(unitary) {
        if (dim_ == 0) throw std::invalid_argument("Operator: zero dimension");
        if (m_.size() != dim_ * dim_)
            throw std::invalid_argument("Operator: entry count does not match dim");
    }

    void require_same_dim(const Operator& rhs) const {
        if (dim_ != rhs.dim_)
            throw std::invalid_argument("Operator: dimension mismatch " +
                                        std::to_string(dim_) + " vs " +
                                        std::to_string(rhs.dim_));
    }

    void verify_hermitian() const {
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t c = r; c < dim_; ++c)
                if (std::abs(m_[r * dim_ + c] - std::conj(m_[c * dim_ + r])) >
                    kConstructTol)
                    throw std::invalid_argument(
                        "Operator: hermitian flag set but entries are not "
                        "conjugate-symmetric");
    }

    void verify_unitary() const {
        if (unitarity_defect() > kConstructTol)
            throw std::invalid_argument(
                "Operator: unitary flag set but U†U deviates from identity");
    }

    std::size_t dim_;
    std::vector<cplx> m_;
    bool hermitian_;
    bool unitary_;
};

namespace detail {

inline std::vector<cplx> matvec(const Operator& op, std::span<const cplx> v) {
    std::size_t d = op.dim();
    std::vector<cplx> out(d, cplx(0.0));
    const auto& m = op.entries();
    for (std::size_t r = 0; r < d; ++r) {
        cplx s(0.0);
        const cplx* row = m.data() + r * d;
        for (std::size_t c = 0; c < d; ++c) s += row[c] * v[c];
        out[r] = s;
    }
    return out;
}

}  // namespace detail

// ----- tensor products ------------------------------------------------------

inline StateVec tensor_state(const StateVec& a, const StateVec& b) {
    auto space = Space::product(a.space(), b.space());
    std::vector<cplx> amps(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j)
            amps[i * b.dim() + j] = a.amp(i) * b.amp(j);
    return StateVec::raw(std::move(space), std::move(amps));
}

inline Operator tensor_op(const Operator& a, const Operator& b) {
    std::size_t da = a.dim(), db = b.dim(), d = da * db;
    std::vector<cplx> m(d * d);
    for (std::size_t ra = 0; ra < da; ++ra)
        for (std::size_t ca = 0; ca < da; ++ca) {
            cplx f = a.at(ra, ca);
            for (std::size_t rb = 0; rb < db; ++rb)
                for (std::size_t cb = 0; cb < db; ++cb)
                    m[(ra * db + rb) * d + (ca * db + cb)] = f * b.at(rb, cb);
        }
    return Operator::with_flags(d, std::move(m),
                                a.hermitian_flag() && b.hermitian_flag(),
                                a.unitary_flag() && b.unitary_flag());
}

// ----- apply / inner / expectation ------------------------------------------

// Matrix-vector product. The result keeps the input's space and is returned
// as a raw construction stage: it is normalized only when U is unitary.
inline StateVec apply(const Operator& op, const StateVec& psi) {
    if (op.dim() != psi.dim())
        throw std::invalid_argument("apply: operator dim " +
                                    std::to_string(op.dim()) +
                                    " does not match state dim " +
                                    std::to_string(psi.dim()));
    auto out = StateVec::raw(psi.space_ptr(), detail::matvec(op, psi.amps()));
    if (op.unitary_flag() && !out.is_normalized())
        throw std::runtime_error("apply: unitary operator broke normalization");
    return out;
}

inline cplx inner(const StateVec& a, const StateVec& b) {
    if (!(a.space() == b.space()))
        throw std::invalid_argument("inner: states live on different spaces");
    cplx s(0.0);
    for (std::size_t i = 0; i < a.dim(); ++i)
        s += std::conj(a.amp(i)) * b.amp(i);
    return s;
}

// ⟨ψ|A|ψ⟩ for hermitian A and normalized ψ. The imaginary residue is checked
// against kStateTol and dropped.
inline double expectation(const Operator& a, const StateVec& psi) {
    if (!a.hermitian_flag())
        throw std::invalid_argument("expectation: operator is not hermitian");
    if (a.dim() != psi.dim())
        throw std::invalid_argument("expectation: dimension mismatch");
    if (!psi.is_normalized())
        throw std::invalid_argument("expectation: state is not normalized");
    auto av = detail::matvec(a, psi.amps());
    cplx s(0.0);
    for (std::size_t i = 0; i < psi.dim(); ++i)
        s += std::conj(psi.amp(i)) * av[i];
    if (std::abs(s.imag()) > kStateTol)
        throw std::runtime_error(
            "expectation: imaginary residue above tolerance");
    return s.real();
}

// ----- isometry completion ---------------------------------------------------

// Partially specified inner-product-preserving map on a common space.
// Inputs must be mutually orthonormal, and so must outputs; this is exactly
// the condition for a unitary extension to exist.
struct IsometrySpec {
    SpacePtr space;
    std::vector<std::pair<StateVec, StateVec>> pairs;

    void validate() const {
        if (!space) throw std::invalid_argument("IsometrySpec: null space");
        if (pairs.size() > space->dim())
            throw std::invalid_argument(
                "IsometrySpec: more pairs than space dimension");
        for (const auto& [in, out] : pairs) {
            if (!(in.space() == *space) || !(out.space() == *space))
                throw std::invalid_argument("IsometrySpec: pair off the spec space");
        }
        auto check_orthonormal = [&](bool input_side) {
            for (std::size_t i = 0; i < pairs.size(); ++i)
                for (std::size_t j = i; j < pairs.size(); ++j) {
                    const StateVec& u = input_side ? pairs[i].first : pairs[i].second;
                    const StateVec& v = input_side ? pairs[j].first : pairs[j].second;
                    cplx g = inner(u, v);
                    cplx want = (i == j) ? cplx(1.0) : cplx(0.0);
                    if (std::abs(g - want) > kStateTol)
                        throw std::invalid_argument(
                            input_side
                                ? "IsometrySpec: inputs are not orthonormal"
                                : "IsometrySpec: outputs are not orthonormal");
                }
        };
        check_orthonormal(true);
        check_orthonormal(false);
    }
};

namespace detail {

// Extends an orthonormal set to a full basis by processing the standard
// basis vectors in label order: project out the committed directions,
// keep survivors, and fix each new column's phase so its first nonzero
// entry is real positive. Deterministic by construction.
inline std::vector<std::vector<cplx>> extend_to_basis(
    std::size_t dim, const std::vector<std::vector<cplx>>& committed) {
    constexpr double kRankTol = 1e-8;
    std::vector<std::vector<cplx>> basis = committed;
    for (std::size_t j = 0; j < dim && basis.size() < dim; ++j) {
        std::vector<cplx> w(dim, cplx(0.0));
        w[j] = cplx(1.0);
        // two modified Gram-Schmidt passes keep the defect near machine eps
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : basis) {
                cplx proj(0.0);
                for (std::size_t k = 0; k < dim; ++k)
                    proj += std::conj(u[k]) * w[k];
                for (std::size_t k = 0; k < dim; ++k) w[k] -= proj * u[k];
            }
        double n = std::sqrt(vec_norm_sq(w));
        if (n < kRankTol) continue;
        for (auto& x : w) x /= n;
        for (std::size_t k = 0; k < dim; ++k) {
            if (std::abs(w[k]) > kRankTol) {
                cplx phase = std::conj(w[k]) / std::abs(w[k]);
                for (auto& x : w) x *= phase;
                break;
            }
        }
        basis.push_back(std::move(w));
    }
    if (basis.size() != dim)
        throw std::runtime_error("extend_to_basis: failed to span the space");
    return basis;
}

}  // namespace detail

// Deterministic unitary extension of an isometry spec: committed pairs are
// reproduced exactly (within kStateTol) and the complement is filled by
// ordered orthonormalization on both sides.
inline Operator complete_isometry(const IsometrySpec& spec) {
    spec.validate();
    std::size_t d = spec.space->dim();
    std::vector<std::vector<cplx>> ins, outs;
    ins.reserve(spec.pairs.size());
    outs.reserve(spec.pairs.size());
    for (const auto& [in, out] : spec.pairs) {
        ins.push_back(in.amps());
        outs.push_back(out.amps());
    }
    auto in_basis = detail::extend_to_basis(d, ins);
    auto out_basis = detail::extend_to_basis(d, outs);
    // U = Σ_k |out_k⟩⟨in_k|
    std::vector<cplx> m(d * d, cplx(0.0));
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t r = 0; r < d; ++r) {
            cplx vr = out_basis[k][r];
            if (vr == cplx(0.0)) continue;
            for (std::size_t c = 0; c < d; ++c)
                m[r * d + c] += vr * std::conj(in_basis[k][c]);
        }
    Operator u = Operator::unitary(d, std::move(m));
    for (const auto& [in, out] : spec.pairs) {
        auto mapped = apply(u, in);
        double dev = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            dev = std::max(dev, std::abs(mapped.amp(i) - out.amp(i)));
        if (dev > kStateTol)
            throw std::runtime_error(
                "complete_isometry: committed pair not reproduced");
    }
    return u;
}

}  // namespace collapse

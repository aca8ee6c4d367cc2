// Concrete spin-1/2 and photon-polarization states and operators, the
// N-photon total spin operator and its fixed-count combinatorics.
//
// Units follow the source conventions: the photon spin operator S has
// eigenvalues ±1 (right/left circular), the electron J_z has eigenvalues
// ±1/2. Photon slots are ordered and distinguishable; basis strings over
// {H, V} map to indices with H = 0 and V = 1, leftmost symbol most
// significant.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "collapse/qcore.hpp"

namespace collapse {

inline constexpr int kDenseMaxPhotons = 12;   // 2^12 dense matrices
inline constexpr std::int64_t kFastMaxPhotons = 1'000'000;

// ----- electron --------------------------------------------------------------

// Electron states are stored in the z-basis, which keeps J_z diagonal;
// |±x⟩ = (|+z⟩ ± |−z⟩)/√2 are derived constants.
inline const SpacePtr& electron_space() {
    static const SpacePtr space = Space::make_atoms({"+z", "-z"});
    return space;
}

inline const StateVec& ket_plus_z() {
    static const StateVec k = StateVec::basis_state(electron_space(), 0);
    return k;
}

inline const StateVec& ket_minus_z() {
    static const StateVec k = StateVec::basis_state(electron_space(), 1);
    return k;
}

inline const StateVec& ket_plus_x() {
    static const StateVec k(electron_space(),
                            {cplx(1.0 / std::sqrt(2.0)), cplx(1.0 / std::sqrt(2.0))});
    return k;
}

inline const StateVec& ket_minus_x() {
    static const StateVec k(electron_space(),
                            {cplx(1.0 / std::sqrt(2.0)), cplx(-1.0 / std::sqrt(2.0))});
    return k;
}

// J_z in units of ħ: diag(+1/2, −1/2).
inline const Operator& electron_jz() {
    static const Operator op = Operator::diagonal_real({0.5, -0.5});
    return op;
}

// ----- single photon ----------------------------------------------------------

inline const SpacePtr& photon_space() {
    static const SpacePtr space = Space::make_atoms({"H", "V"});
    return space;
}

inline const StateVec& ket_h() {
    static const StateVec k = StateVec::basis_state(photon_space(), 0);
    return k;
}

inline const StateVec& ket_v() {
    static const StateVec k = StateVec::basis_state(photon_space(), 1);
    return k;
}

// |R⟩ = (|H⟩ + i|V⟩)/√2, |L⟩ = (|H⟩ − i|V⟩)/√2
inline const StateVec& ket_r() {
    static const StateVec k(photon_space(),
                            {cplx(1.0 / std::sqrt(2.0)),
                             cplx(0.0, 1.0 / std::sqrt(2.0))});
    return k;
}

inline const StateVec& ket_l() {
    static const StateVec k(photon_space(),
                            {cplx(1.0 / std::sqrt(2.0)),
                             cplx(0.0, -1.0 / std::sqrt(2.0))});
    return k;
}

// S = [[0, −i], [i, 0]]: S|H⟩ = i|V⟩, S|V⟩ = −i|H⟩, S|R⟩ = |R⟩, S|L⟩ = −|L⟩.
inline const Operator& photon_spin() {
    static const Operator op = Operator::hermitian(
        2, {cplx(0.0), cplx(0.0, -1.0), cplx(0.0, 1.0), cplx(0.0)});
    return op;
}

// ----- N-photon basis strings -------------------------------------------------

// Length-N polarization string over {H, V} with its index mapping.
struct PhotonBasisString {
    std::string symbols;

    static PhotonBasisString from_index(int n_photons, std::size_t index) {
        PhotonBasisString s;
        s.symbols.resize(static_cast<std::size_t>(n_photons));
        for (int k = 0; k < n_photons; ++k)
            s.symbols[static_cast<std::size_t>(k)] =
                (index >> (n_photons - 1 - k)) & 1 ? 'V' : 'H';
        return s;
    }

    std::size_t index() const {
        std::size_t i = 0;
        for (char c : symbols) {
            i <<= 1;
            if (c == 'V')
                i |= 1;
            else if (c != 'H')
                throw std::invalid_argument(
                    "PhotonBasisString: symbol outside {H,V}");
        }
        return i;
    }

    int h_count() const {
        int n = 0;
        for (char c : symbols) n += (c == 'H');
        return n;
    }
};

inline int string_h_count(std::size_t index, int n_photons) {
    int v = 0;
    for (int k = 0; k < n_photons; ++k) v += (index >> k) & 1;
    return n_photons - v;
}

inline void require_photon_count(int n_photons) {
    if (n_photons < 1 || n_photons > kDenseMaxPhotons)
        throw std::invalid_argument(
            "dense photon path supports 1 <= N <= " +
            std::to_string(kDenseMaxPhotons) + ", got " +
            std::to_string(n_photons));
}

inline SpacePtr photon_string_space(int n_photons) {
    require_photon_count(n_photons);
    std::vector<BasisLabel> labels;
    std::size_t dim = std::size_t{1} << n_photons;
    labels.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i)
        labels.emplace_back(PhotonBasisString::from_index(n_photons, i).symbols);
    return Space::make(std::move(labels));
}

// |R⟩^⊗N on the string-labeled space: amp(i) = 2^{−N/2} · i^{#V(i)}.
inline StateVec ket_r_power(int n_photons) {
    require_photon_count(n_photons);
    std::size_t dim = std::size_t{1} << n_photons;
    double scale = std::pow(0.5, 0.5 * n_photons);
    static const cplx i_pow[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
    std::vector<cplx> amps(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        int v = n_photons - string_h_count(i, n_photons);
        amps[i] = scale * i_pow[v % 4];
    }
    return StateVec(photon_string_space(n_photons), std::move(amps));
}

// ----- total spin operator ----------------------------------------------------

// S_N = Σ_j I⊗…⊗S⊗…⊗I. Matrix elements connect strings at Hamming
// distance one: ⟨r|S_N|c⟩ = +i when the flipped slot goes H→V and −i when
// it goes V→H. Filled directly so no Kronecker temporaries are allocated.
inline Operator total_spin_op(int n_photons) {
    require_photon_count(n_photons);
    std::size_t dim = std::size_t{1} << n_photons;
    std::vector<cplx> m(dim * dim, cplx(0.0));
    for (std::size_t c = 0; c < dim; ++c)
        for (int b = 0; b < n_photons; ++b) {
            std::size_t r = c ^ (std::size_t{1} << b);
            m[r * dim + c] = ((c >> b) & 1) ? cplx(0.0, -1.0) : cplx(0.0, 1.0);
        }
    return Operator::hermitian(dim, std::move(m));
}

// Action of S_N on a state without materializing the 2^N × 2^N matrix.
inline StateVec apply_total_spin(const StateVec& psi) {
    std::size_t dim = psi.dim();
    int n_photons = 0;
    while ((std::size_t{1} << n_photons) < dim) ++n_photons;
    if ((std::size_t{1} << n_photons) != dim)
        throw std::invalid_argument(
            "apply_total_spin: dimension is not a power of two");
    std::vector<cplx> out(dim, cplx(0.0));
    for (std::size_t i = 0; i < dim; ++i) {
        cplx a = psi.amp(i);
        if (a == cplx(0.0)) continue;
        for (int b = 0; b < n_photons; ++b) {
            std::size_t j = i ^ (std::size_t{1} << b);
            // slot at bit b: H→V contributes +i, V→H contributes −i
            out[j] += ((i >> b) & 1) ? cplx(0.0, -1.0) * a : cplx(0.0, 1.0) * a;
        }
    }
    return StateVec::raw(psi.space_ptr(), std::move(out));
}

// Orthogonal projector onto basis strings with exactly n horizontal photons.
// Diagonal in the H/V string basis; rank C(N, n).
inline Operator fixed_count_projector(int n_photons, int n_horizontal) {
    require_photon_count(n_photons);
    if (n_horizontal < 0 || n_horizontal > n_photons)
        throw std::invalid_argument("fixed_count_projector: n out of range");
    std::size_t dim = std::size_t{1} << n_photons;
    std::vector<double> diag(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
        if (string_h_count(i, n_photons) == n_horizontal) diag[i] = 1.0;
    return Operator::diagonal_real(std::move(diag));
}

inline std::vector<Operator> fixed_count_projector_family(int n_photons) {
    std::vector<Operator> fam;
    fam.reserve(static_cast<std::size_t>(n_photons) + 1);
    for (int n = 0; n <= n_photons; ++n)
        fam.push_back(fixed_count_projector(n_photons, n));
    return fam;
}

// ----- the fixed-count zero-expectation theorem -------------------------------

// Decomposition of S_N|ψ⟩ by horizontal count for a fixed-count input ψ.
// S flips single slots, so the image is supported on counts n−1 and n+1
// and is therefore orthogonal to ψ.
struct CountShiftRecord {
    int input_count = 0;
    std::map<int, double> weight_by_count;  // squared norm of each count sector
    cplx overlap;                           // ⟨ψ|S_N|ψ⟩
    bool support_shifted = false;           // support ⊆ {n−1, n+1}
};

inline CountShiftRecord sn_maps_count_shift(const StateVec& psi) {
    std::size_t dim = psi.dim();
    int n_photons = 0;
    while ((std::size_t{1} << n_photons) < dim) ++n_photons;
    if ((std::size_t{1} << n_photons) != dim)
        throw std::invalid_argument(
            "sn_maps_count_shift: dimension is not a power of two");

    int fixed = -1;
    for (std::size_t i = 0; i < dim; ++i) {
        if (std::norm(psi.amp(i)) <= kBranchCutoff) continue;
        int n = string_h_count(i, n_photons);
        if (fixed < 0)
            fixed = n;
        else if (n != fixed)
            throw std::invalid_argument(
                "sn_maps_count_shift: state is not fixed-count");
    }
    if (fixed < 0)
        throw std::invalid_argument("sn_maps_count_shift: null state");

    StateVec image = apply_total_spin(psi);
    CountShiftRecord rec;
    rec.input_count = fixed;
    for (std::size_t i = 0; i < dim; ++i) {
        double w = std::norm(image.amp(i));
        if (w <= kBranchCutoff) continue;
        rec.weight_by_count[string_h_count(i, n_photons)] += w;
    }
    rec.support_shifted = true;
    for (const auto& [count, weight] : rec.weight_by_count) {
        (void)weight;
        if (count != fixed - 1 && count != fixed + 1) rec.support_shifted = false;
    }
    rec.overlap = inner(psi, image);
    if (!rec.support_shifted || std::abs(rec.overlap) > kStateTol)
        throw std::runtime_error(
            "sn_maps_count_shift: count-shift invariant violated");
    return rec;
}

// ----- large-N count statistics -----------------------------------------------

inline double count_log_probability(std::int64_t n_photons, std::int64_t n) {
    if (n < 0 || n > n_photons)
        throw std::invalid_argument("count_log_probability: n out of range");
    return std::lgamma(static_cast<double>(n_photons) + 1.0) -
           std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(n_photons - n) + 1.0) -
           static_cast<double>(n_photons) * std::log(2.0);
}

// Outcome distribution of the horizontal-count measurement on |R⟩^⊗N:
// Binomial(N, 1/2). Pascal's triangle keeps every entry an exact dyadic
// rational while C(N, n) fits in a double (N ≤ 49); the lgamma route covers
// the rest.
inline std::vector<double> fast_count_distribution(std::int64_t n_photons) {
    if (n_photons < 1 || n_photons > kFastMaxPhotons)
        throw std::invalid_argument("fast_count_distribution: N out of range");
    std::vector<double> p(static_cast<std::size_t>(n_photons) + 1);
    if (n_photons <= 49) {
        std::vector<double> c(p.size(), 0.0);
        c[0] = 1.0;
        for (std::int64_t row = 1; row <= n_photons; ++row)
            for (std::int64_t k = row; k >= 1; --k) c[k] += c[k - 1];
        double scale = std::pow(0.5, static_cast<double>(n_photons));
        for (std::size_t n = 0; n < p.size(); ++n) p[n] = c[n] * scale;
    } else {
        for (std::size_t n = 0; n < p.size(); ++n)
            p[n] = std::exp(count_log_probability(n_photons,
                                                  static_cast<std::int64_t>(n)));
    }
    return p;
}

}  // namespace collapse

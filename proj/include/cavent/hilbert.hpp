#pragma once

// Composite Hilbert-space bookkeeping for one multi-level atom tensored with
// a set of photon-truncated cavity modes: basis enumeration, state vectors,
// inner products and reduced density matrices.
//
// Basis ordering contract (relied on by serialization and all tests):
// level-major, then mode occupations in lexicographic order with the LAST
// mode varying fastest.  For levels {a,b} and two modes with n_max=1:
//   |a,0,0> |a,0,1> |a,1,0> |a,1,1> |b,0,0> |b,0,1> |b,1,0> |b,1,1>

#include <algorithm>
#include <complex>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cavent/errors.hpp"

namespace cavent {

using Complex = std::complex<double>;
using LevelId = std::string;
using ModeId = std::string;

struct AtomSpec {
    std::vector<LevelId> levels; // order fixes the basis index of each level
};

struct ModeSpec {
    ModeId id;
    int n_max = 2; // maximum photon number; occupation runs 0..n_max
};

// One cavity-mode coupling |upper><lower| a + h.c. with vacuum Rabi frequency g.
struct Coupling {
    ModeId mode;
    LevelId upper;
    LevelId lower;
    double g = 0.0; // rad per time unit, hbar = 1
};

struct SystemSpec {
    AtomSpec atom;
    std::vector<ModeSpec> modes;
    std::vector<Coupling> couplings;

    int level_index(const LevelId& level) const {
        for (std::size_t i = 0; i < atom.levels.size(); ++i)
            if (atom.levels[i] == level) return static_cast<int>(i);
        return -1;
    }

    int mode_index(const ModeId& mode) const {
        for (std::size_t i = 0; i < modes.size(); ++i)
            if (modes[i].id == mode) return static_cast<int>(i);
        return -1;
    }

    std::vector<std::size_t> couplings_on_mode(const ModeId& mode) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < couplings.size(); ++i)
            if (couplings[i].mode == mode) out.push_back(i);
        return out;
    }

    // Throws SpecError on duplicate ids, dangling references or bad ranges.
    void validate() const {
        if (atom.levels.size() < 2)
            throw SpecError("atom needs at least 2 levels, got " +
                            std::to_string(atom.levels.size()));
        for (std::size_t i = 0; i < atom.levels.size(); ++i) {
            if (atom.levels[i].empty()) throw SpecError("empty level id");
            for (std::size_t j = i + 1; j < atom.levels.size(); ++j)
                if (atom.levels[i] == atom.levels[j])
                    throw SpecError("duplicate level id '" + atom.levels[i] + "'");
        }
        for (std::size_t i = 0; i < modes.size(); ++i) {
            if (modes[i].id.empty()) throw SpecError("empty mode id");
            if (modes[i].n_max < 1)
                throw SpecError("mode '" + modes[i].id + "': n_max must be >= 1");
            for (std::size_t j = i + 1; j < modes.size(); ++j)
                if (modes[i].id == modes[j].id)
                    throw SpecError("duplicate mode id '" + modes[i].id + "'");
        }
        for (std::size_t i = 0; i < couplings.size(); ++i) {
            const Coupling& c = couplings[i];
            if (mode_index(c.mode) < 0)
                throw SpecError("coupling references unknown mode '" + c.mode + "'");
            if (level_index(c.upper) < 0)
                throw SpecError("coupling references unknown level '" + c.upper + "'");
            if (level_index(c.lower) < 0)
                throw SpecError("coupling references unknown level '" + c.lower + "'");
            if (c.upper == c.lower)
                throw SpecError("coupling on mode '" + c.mode +
                                "' must connect two distinct levels");
            if (c.g < 0.0)
                throw SpecError("coupling on mode '" + c.mode + "': g must be >= 0");
            for (std::size_t j = i + 1; j < couplings.size(); ++j) {
                const Coupling& d = couplings[j];
                if (c.mode == d.mode && c.upper == d.upper && c.lower == d.lower)
                    throw SpecError("duplicate coupling (" + c.mode + "," + c.upper +
                                    "," + c.lower + ")");
            }
        }
    }
};

// One composite basis ket: atomic level plus per-mode photon occupations.
struct BasisState {
    LevelId level;
    std::vector<int> photons; // one entry per mode, in SystemSpec mode order
};

class Basis {
public:
    explicit Basis(SystemSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        radix_.reserve(spec_.modes.size());
        for (const ModeSpec& m : spec_.modes) radix_.push_back(m.n_max + 1);
        mode_block_ = 1;
        for (int r : radix_) mode_block_ *= r;
        dim_ = static_cast<int>(spec_.atom.levels.size()) * mode_block_;
    }

    int dim() const { return dim_; }
    const SystemSpec& spec() const { return spec_; }

    int index_of(const BasisState& s) const {
        int lvl = spec_.level_index(s.level);
        if (lvl < 0) throw SpecError("unknown level '" + s.level + "'");
        if (s.photons.size() != radix_.size())
            throw SpecError("basis state has " + std::to_string(s.photons.size()) +
                            " occupations, system has " + std::to_string(radix_.size()) +
                            " modes");
        int idx = lvl * mode_block_;
        int stride = mode_block_;
        for (std::size_t j = 0; j < radix_.size(); ++j) {
            if (s.photons[j] < 0 || s.photons[j] >= radix_[j])
                throw SpecError("occupation " + std::to_string(s.photons[j]) +
                                " outside truncation of mode '" + spec_.modes[j].id + "'");
            stride /= radix_[j];
            idx += s.photons[j] * stride;
        }
        return idx;
    }

    BasisState state_at(int idx) const {
        if (idx < 0 || idx >= dim_) throw Error("basis index out of range");
        BasisState s;
        s.level = spec_.atom.levels[static_cast<std::size_t>(idx / mode_block_)];
        int rem = idx % mode_block_;
        s.photons.resize(radix_.size());
        for (std::size_t j = radix_.size(); j-- > 0;) {
            s.photons[j] = rem % radix_[j];
            rem /= radix_[j];
        }
        return s;
    }

    // Atomic level of basis index, without materializing the BasisState.
    int level_of(int idx) const { return idx / mode_block_; }

    int occupation_of(int idx, int mode) const {
        int rem = idx % mode_block_;
        int stride = mode_block_;
        for (int j = 0; j <= mode; ++j) stride /= radix_[j];
        return (rem / stride) % radix_[mode];
    }

    std::string label(int idx) const {
        BasisState s = state_at(idx);
        std::string out = "|" + s.level;
        for (int n : s.photons) out += "," + std::to_string(n);
        return out + ">";
    }

    bool same_space(const Basis& other) const {
        return spec_.atom.levels == other.spec_.atom.levels && radix_ == other.radix_ &&
               [&] {
                   for (std::size_t j = 0; j < spec_.modes.size(); ++j)
                       if (spec_.modes[j].id != other.spec_.modes[j].id) return false;
                   return true;
               }();
    }

private:
    SystemSpec spec_;
    std::vector<int> radix_;
    int mode_block_ = 1;
    int dim_ = 0;
};

using BasisPtr = std::shared_ptr<const Basis>;

inline BasisPtr make_basis(SystemSpec spec) {
    return std::make_shared<Basis>(std::move(spec));
}

// All L * prod(n_max+1) kets in the documented order.
inline std::vector<BasisState> build_basis(const SystemSpec& spec) {
    Basis b(spec);
    std::vector<BasisState> out;
    out.reserve(static_cast<std::size_t>(b.dim()));
    for (int i = 0; i < b.dim(); ++i) out.push_back(b.state_at(i));
    return out;
}

// Normalized complex amplitudes over a composite basis.  Always unit norm:
// the public constructor rescales its input, the `unchecked` path (used by
// unitary evolution, so that norm drift stays observable) only verifies.
class StateVector {
public:
    StateVector(BasisPtr basis, Eigen::VectorXcd amplitudes)
        : basis_(std::move(basis)), amps_(std::move(amplitudes)) {
        if (!basis_) throw Error("null basis");
        if (amps_.size() != basis_->dim())
            throw BasisMismatchError("amplitude vector has wrong dimension");
        double n = amps_.norm();
        if (n < 1e-14) throw Error("state has zero norm");
        amps_ /= n;
    }

    static StateVector unchecked(BasisPtr basis, Eigen::VectorXcd amplitudes) {
        StateVector s;
        s.basis_ = std::move(basis);
        s.amps_ = std::move(amplitudes);
        if (!s.basis_ || s.amps_.size() != s.basis_->dim())
            throw BasisMismatchError("amplitude vector has wrong dimension");
        if (std::abs(s.amps_.norm() - 1.0) > 1e-9)
            throw Error("state norm violates 1e-9 invariant");
        return s;
    }

    const Eigen::VectorXcd& amplitudes() const { return amps_; }
    const Basis& basis() const { return *basis_; }
    const BasisPtr& basis_ptr() const { return basis_; }
    double norm() const { return amps_.norm(); }

    Complex amplitude(const BasisState& ket) const {
        return amps_[basis_->index_of(ket)];
    }

    double population(const BasisState& ket) const { return std::norm(amplitude(ket)); }

private:
    StateVector() = default;
    BasisPtr basis_;
    Eigen::VectorXcd amps_;
};

// Builds a normalized state from (ket, amplitude) components; duplicates sum.
inline StateVector state_from_components(
    const BasisPtr& basis, std::span<const std::pair<BasisState, Complex>> components) {
    if (!basis) throw Error("null basis");
    if (components.empty()) throw Error("no components given");
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(basis->dim());
    for (const auto& [ket, amp] : components) amps[basis->index_of(ket)] += amp;
    if (amps.norm() < 1e-14) throw Error("components sum to zero norm");
    return StateVector(basis, std::move(amps));
}

inline StateVector state_from_components(
    const BasisPtr& basis, std::initializer_list<std::pair<BasisState, Complex>> components) {
    return state_from_components(
        basis, std::span<const std::pair<BasisState, Complex>>(components.begin(),
                                                               components.size()));
}

// Basis ket |level, photons...> as a StateVector.
inline StateVector basis_ket(const BasisPtr& basis, const BasisState& ket) {
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(basis->dim());
    amps[basis->index_of(ket)] = 1.0;
    return StateVector(basis, std::move(amps));
}

// <x|y>, conjugate-linear in the first argument.
inline Complex inner_product(const StateVector& x, const StateVector& y) {
    if (x.basis_ptr() != y.basis_ptr() && !x.basis().same_space(y.basis()))
        throw BasisMismatchError("inner product between different bases");
    return x.amplitudes().dot(y.amplitudes()); // Eigen's dot conjugates the left side
}

// Hermitian PSD matrix over a kept-subsystem basis.  `dims` lists the kept
// subsystem dimensions in order (atom first when kept, then modes in spec
// order); the matrix index is mixed-radix over dims with the last entry fastest.
struct DensityMatrix {
    Eigen::MatrixXcd matrix;
    std::vector<int> dims;

    double trace() const { return matrix.trace().real(); }
};

// Which subsystems to keep in a partial trace.
struct Subsystems {
    bool atom = false;
    std::vector<ModeId> modes;
};

inline DensityMatrix partial_trace(const StateVector& state, const Subsystems& keep) {
    const Basis& b = state.basis();
    const SystemSpec& spec = b.spec();
    const std::size_t n_modes = spec.modes.size();

    std::vector<bool> keep_mode(n_modes, false);
    for (const ModeId& id : keep.modes) {
        int mi = spec.mode_index(id);
        if (mi < 0) throw SpecError("partial_trace: unknown mode '" + id + "'");
        keep_mode[static_cast<std::size_t>(mi)] = true;
    }
    if (!keep.atom && keep.modes.empty())
        throw Error("partial_trace: empty subsystem selector");

    std::vector<int> kept_dims;
    if (keep.atom) kept_dims.push_back(static_cast<int>(spec.atom.levels.size()));
    for (std::size_t j = 0; j < n_modes; ++j)
        if (keep_mode[j]) kept_dims.push_back(spec.modes[j].n_max + 1);

    int d_keep = 1;
    for (int d : kept_dims) d_keep *= d;
    const int d_full = b.dim();
    const int d_tr = d_full / d_keep;

    // slices(tau, k) = psi[(k, tau)]; rho = slices^T * conj(slices)
    Eigen::MatrixXcd slices = Eigen::MatrixXcd::Zero(d_tr, d_keep);
    for (int idx = 0; idx < d_full; ++idx) {
        int k = 0;
        int tau = 0;
        if (keep.atom)
            k = b.level_of(idx);
        else
            tau = b.level_of(idx);
        for (std::size_t j = 0; j < n_modes; ++j) {
            int n = b.occupation_of(idx, static_cast<int>(j));
            int r = spec.modes[j].n_max + 1;
            if (keep_mode[j])
                k = k * r + n;
            else
                tau = tau * r + n;
        }
        slices(tau, k) = state.amplitudes()[idx];
    }
    DensityMatrix rho;
    rho.matrix = slices.transpose() * slices.conjugate();
    rho.dims = std::move(kept_dims);
    return rho;
}

// Reduced state over all modes (atom traced out).
inline DensityMatrix mode_marginal(const StateVector& state) {
    Subsystems keep;
    for (const ModeSpec& m : state.basis().spec().modes) keep.modes.push_back(m.id);
    return partial_trace(state, keep);
}

inline double max_hermiticity_defect(const Eigen::MatrixXcd& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

} // namespace cavent

#pragma once

// Interaction-picture Hamiltonian assembly and exact unitary evolution via
// Hermitian eigendecomposition, plus the closed-form two-mode solution used
// as an independent oracle throughout the test suite.
//
// Conventions (hbar = 1, evolution operator exp(-iHt)):
//  * a cavity coupling contributes  g (a|u><l| + a^dag |l><u|), so a vacuum
//    one-excitation pair oscillates as cos(g t) / -i sin(g t);
//  * a classical drive with Rabi frequency Omega contributes
//    (Omega/2)(e^{i theta}|u><l| + e^{-i theta}|l><u|), so a pulse of
//    duration pi/Omega transfers |l> -> -i e^{i theta}|u> with unit
//    probability (a "pi pulse").

#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cavent/errors.hpp"
#include "cavent/hilbert.hpp"

namespace cavent {

// Classical laser drive between two atomic levels.
struct DriveTerm {
    LevelId upper;
    LevelId lower;
    double rabi = 0.0;  // Omega, rad per time unit
    double phase = 0.0; // theta, radians
};

using HamiltonianMatrix = Eigen::MatrixXcd;

inline HamiltonianMatrix build_hamiltonian(const Basis& basis,
                                           std::span<const std::size_t> active_couplings,
                                           std::span<const DriveTerm> drives) {
    const SystemSpec& spec = basis.spec();
    const int d = basis.dim();
    HamiltonianMatrix h = HamiltonianMatrix::Zero(d, d);

    for (std::size_t ci : active_couplings) {
        if (ci >= spec.couplings.size())
            throw SpecError("unknown coupling id " + std::to_string(ci));
        const Coupling& c = spec.couplings[ci];
        const int mode = spec.mode_index(c.mode);
        const int lower = spec.level_index(c.lower);
        const int upper = spec.level_index(c.upper);
        for (int idx = 0; idx < d; ++idx) {
            if (basis.level_of(idx) != lower) continue;
            int n = basis.occupation_of(idx, mode);
            if (n < 1) continue; // annihilation kills the vacuum
            BasisState s = basis.state_at(idx);
            s.level = spec.atom.levels[static_cast<std::size_t>(upper)];
            s.photons[static_cast<std::size_t>(mode)] = n - 1;
            int row = basis.index_of(s);
            double amp = c.g * std::sqrt(static_cast<double>(n));
            h(row, idx) += amp;
            h(idx, row) += amp;
        }
    }

    for (const DriveTerm& dr : drives) {
        const int lower = spec.level_index(dr.lower);
        const int upper = spec.level_index(dr.upper);
        if (lower < 0 || upper < 0)
            throw SpecError("drive references unknown level '" +
                            (lower < 0 ? dr.lower : dr.upper) + "'");
        if (lower == upper) throw SpecError("drive must connect two distinct levels");
        if (dr.rabi < 0.0) throw SpecError("drive Rabi frequency must be >= 0");
        const Complex up = 0.5 * dr.rabi * std::exp(Complex(0.0, dr.phase));
        for (int idx = 0; idx < d; ++idx) {
            if (basis.level_of(idx) != lower) continue;
            BasisState s = basis.state_at(idx);
            s.level = spec.atom.levels[static_cast<std::size_t>(upper)];
            int row = basis.index_of(s);
            h(row, idx) += up;
            h(idx, row) += std::conj(up);
        }
    }
    return h;
}

namespace detail {

// Connected components of the nonzero pattern of H.  Evolution then
// eigendecomposes each block separately; for protocol Hamiltonians the
// blocks are two- or three-dimensional, which keeps large mode chains cheap.
inline std::vector<int> component_labels(const HamiltonianMatrix& h) {
    const int d = static_cast<int>(h.rows());
    std::vector<int> parent(static_cast<std::size_t>(d));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (h(i, j) != Complex(0.0, 0.0)) {
                int a = find(i), b = find(j);
                if (a != b) parent[static_cast<std::size_t>(a)] = b;
            }
    std::vector<int> label(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) label[static_cast<std::size_t>(i)] = find(i);
    return label;
}

} // namespace detail

// exp(-iHt)|psi>, exact up to rounding.  H must be Hermitian to 1e-12.
inline StateVector evolve(const StateVector& state, const HamiltonianMatrix& h, double t) {
    const int d = static_cast<int>(h.rows());
    if (h.cols() != d || d != state.basis().dim())
        throw BasisMismatchError("Hamiltonian dimension does not match state");
    if (t < 0.0) throw Error("evolution duration must be >= 0");
    if (max_hermiticity_defect(h) > 1e-12) throw Error("Hamiltonian is not Hermitian");

    const std::vector<int> label = detail::component_labels(h);
    Eigen::VectorXcd out = state.amplitudes();

    std::vector<int> members;
    std::vector<bool> done(static_cast<std::size_t>(d), false);
    for (int root = 0; root < d; ++root) {
        if (done[static_cast<std::size_t>(root)]) continue;
        members.clear();
        for (int i = root; i < d; ++i)
            if (label[static_cast<std::size_t>(i)] == label[static_cast<std::size_t>(root)] &&
                !done[static_cast<std::size_t>(i)]) {
                members.push_back(i);
                done[static_cast<std::size_t>(i)] = true;
            }
        const int k = static_cast<int>(members.size());
        if (k == 1) {
            int i = members[0];
            double e = h(i, i).real();
            if (e != 0.0) out[i] *= std::exp(Complex(0.0, -e * t));
            continue;
        }
        Eigen::MatrixXcd block(k, k);
        Eigen::VectorXcd v(k);
        for (int r = 0; r < k; ++r) {
            v[r] = state.amplitudes()[members[static_cast<std::size_t>(r)]];
            for (int c = 0; c < k; ++c)
                block(r, c) = h(members[static_cast<std::size_t>(r)],
                                members[static_cast<std::size_t>(c)]);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block);
        Eigen::VectorXcd phases =
            (Complex(0.0, -t) * es.eigenvalues().array()).exp().matrix();
        v = es.eigenvectors() * (phases.asDiagonal() * (es.eigenvectors().adjoint() * v));
        for (int r = 0; r < k; ++r) out[members[static_cast<std::size_t>(r)]] = v[r];
    }
    return StateVector::unchecked(state.basis_ptr(), std::move(out));
}

// Eq.-of-motion solution for the three-level / two-mode system prepared in
// (|a> + e^{i phi}|b>)/sqrt(2) (x) |0,0>: the four single-excitation amplitudes.
struct TwoModeAmplitudes {
    Complex c_a00;
    Complex c_c10;
    Complex c_b00;
    Complex c_c01;

    double norm_sq() const {
        return std::norm(c_a00) + std::norm(c_c10) + std::norm(c_b00) + std::norm(c_c01);
    }
};

inline TwoModeAmplitudes analytic_two_mode_amplitudes(double g1, double g2, double phi,
                                                      double t) {
    if (t < 0.0) throw Error("duration must be >= 0");
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const Complex mi(0.0, -1.0);
    const Complex ph = std::exp(Complex(0.0, phi));
    return TwoModeAmplitudes{
        inv_sqrt2 * std::cos(g1 * t),
        inv_sqrt2 * mi * std::sin(g1 * t),
        inv_sqrt2 * ph * std::cos(g2 * t),
        inv_sqrt2 * ph * mi * std::sin(g2 * t),
    };
}

// Probability of finding the atom in the shared ground level after time t.
inline double analytic_pc(double g1, double g2, double t) {
    if (t < 0.0) throw Error("duration must be >= 0");
    double s1 = std::sin(g1 * t);
    double s2 = std::sin(g2 * t);
    return 0.5 * (s1 * s1 + s2 * s2);
}

// Diagonal of the excitation-number operator: total photons plus one per
// occupied "excited" level.  Commutes with any coupling-only Hamiltonian
// whose upper levels are all listed in `excited_levels`.
inline Eigen::VectorXd excitation_numbers(const Basis& basis,
                                          std::span<const LevelId> excited_levels) {
    const SystemSpec& spec = basis.spec();
    std::vector<bool> excited(spec.atom.levels.size(), false);
    for (const LevelId& l : excited_levels) {
        int li = spec.level_index(l);
        if (li < 0) throw SpecError("unknown level '" + l + "'");
        excited[static_cast<std::size_t>(li)] = true;
    }
    Eigen::VectorXd n(basis.dim());
    for (int idx = 0; idx < basis.dim(); ++idx) {
        double total = excited[static_cast<std::size_t>(basis.level_of(idx))] ? 1.0 : 0.0;
        for (std::size_t j = 0; j < spec.modes.size(); ++j)
            total += basis.occupation_of(idx, static_cast<int>(j));
        n[idx] = total;
    }
    return n;
}

inline double expectation(const Eigen::VectorXd& diagonal_op, const StateVector& state) {
    return (diagonal_op.array() * state.amplitudes().array().abs2()).sum();
}

} // namespace cavent

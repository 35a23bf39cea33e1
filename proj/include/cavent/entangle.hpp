#pragma once

// Entanglement targets and measures: canonical two- and N-mode target states,
// fidelity against a simulated register, von Neumann entropy, concurrence.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "cavent/errors.hpp"
#include "cavent/hilbert.hpp"
#include "cavent/protocol.hpp"

namespace cavent {

// Pure state of an n-mode qubit register (occupations 0/1), amplitudes in
// lexicographic occupation order with the last mode varying fastest.
struct TargetState {
    std::string name;
    int n_modes = 0;
    Eigen::VectorXcd amplitudes;
};

inline TargetState bell_state(BellVariant variant, double phi = 0.0) {
    const double s = variant == BellVariant::plus ? 1.0 : -1.0;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
    v[1] = 1.0 / std::sqrt(2.0);                                  // |0,1>
    v[2] = s * std::exp(Complex(0.0, phi)) / std::sqrt(2.0);      // |1,0>
    std::string name = variant == BellVariant::plus ? "psi_plus" : "psi_minus";
    return {std::move(name), 2, std::move(v)};
}

inline TargetState ghz_state(int n_modes, ProjectorSign sign) {
    if (n_modes < 2) throw Error("ghz_state: need at least 2 modes");
    const double s = sign == ProjectorSign::plus ? 1.0 : -1.0;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(1L << n_modes);
    v[0] = 1.0 / std::sqrt(2.0);
    v[v.size() - 1] = s / std::sqrt(2.0);
    std::string name = sign == ProjectorSign::plus ? "phi_plus" : "phi_minus";
    if (n_modes > 2) name = "ghz" + std::to_string(n_modes) + "_" + name;
    return {std::move(name), n_modes, std::move(v)};
}

// Named target lookup for the CLI: psi_plus/psi_minus (phi parameter applies)
// and phi_plus/phi_minus extended to n modes.
inline TargetState named_target(const std::string& name, int n_modes, double phi = 0.0) {
    if (name == "psi_plus" || name == "psi_minus") {
        if (n_modes != 2) throw Error("target '" + name + "' is a two-mode state");
        return bell_state(name == "psi_plus" ? BellVariant::plus : BellVariant::minus, phi);
    }
    if (name == "phi_plus" || name == "phi_minus") {
        if (phi != 0.0) throw Error("target '" + name + "' takes no phase parameter");
        return ghz_state(n_modes, name == "phi_plus" ? ProjectorSign::plus
                                                     : ProjectorSign::minus);
    }
    throw Error("unknown target '" + name +
                "' (expected psi_plus, psi_minus, phi_plus or phi_minus)");
}

inline Complex inner_product(const TargetState& x, const TargetState& y) {
    if (x.n_modes != y.n_modes) throw BasisMismatchError("targets of different size");
    return x.amplitudes.dot(y.amplitudes);
}

inline double fidelity(const TargetState& x, const TargetState& y) {
    return std::norm(inner_product(x, y));
}

// |<target|rho_modes|target>| with rho_modes the reduced state of the full
// register.  The register may hold occupations above 1; the target is padded
// with zeros there.
inline double fidelity(const StateVector& state, const TargetState& target) {
    const Basis& b = state.basis();
    const SystemSpec& spec = b.spec();
    if (static_cast<int>(spec.modes.size()) != target.n_modes)
        throw BasisMismatchError("target covers " + std::to_string(target.n_modes) +
                                 " modes, register has " +
                                 std::to_string(spec.modes.size()));

    Subsystems keep;
    keep.atom = false;
    for (const ModeSpec& m : spec.modes) keep.modes.push_back(m.id);
    DensityMatrix rho = partial_trace(state, keep);

    // Embed the 2^n target into the register's occupation basis.
    const int d = static_cast<int>(rho.matrix.rows());
    Eigen::VectorXcd t = Eigen::VectorXcd::Zero(d);
    const int n = target.n_modes;
    for (int bits = 0; bits < (1 << n); ++bits) {
        if (target.amplitudes[bits] == Complex(0.0, 0.0)) continue;
        int idx = 0;
        bool fits = true;
        for (int k = 0; k < n; ++k) {
            int occ = (bits >> (n - 1 - k)) & 1;
            int radix = spec.modes[static_cast<std::size_t>(k)].n_max + 1;
            if (occ >= radix) { fits = false; break; }
            idx = idx * radix + occ;
        }
        if (!fits)
            throw Error("target needs occupation beyond the register cutoff");
        t[idx] = target.amplitudes[bits];
    }
    Complex f = t.dot(rho.matrix * t);
    return std::abs(f);
}

// Shannon entropy of the spectrum in bits; eigenvalues below 1e-12 are
// treated as exact zeros.
inline double von_neumann_entropy(const DensityMatrix& rho) {
    if (std::abs(rho.trace() - 1.0) > 1e-9)
        throw Error("density matrix trace is " + std::to_string(rho.trace()));
    if (max_hermiticity_defect(rho.matrix) > 1e-9)
        throw Error("density matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix,
                                                       Eigen::EigenvaluesOnly);
    double h = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        double lambda = es.eigenvalues()[i];
        if (lambda < 1e-12) continue;
        h -= lambda * std::log2(lambda);
    }
    return h;
}

// Reduces a register density matrix to the {0,1} occupation subspace of every
// mode.  The discarded weight must be below `tolerance`.
inline DensityMatrix qubit_restriction(const DensityMatrix& rho, double tolerance = 1e-9) {
    const int n = static_cast<int>(rho.dims.size());
    std::vector<int> keep;
    int stride = 1;
    std::vector<int> strides(rho.dims.size());
    for (int k = n - 1; k >= 0; --k) {
        strides[static_cast<std::size_t>(k)] = stride;
        stride *= rho.dims[static_cast<std::size_t>(k)];
    }
    for (int bits = 0; bits < (1 << n); ++bits) {
        int idx = 0;
        for (int k = 0; k < n; ++k) {
            int occ = (bits >> (n - 1 - k)) & 1;
            if (occ >= rho.dims[static_cast<std::size_t>(k)])
                throw Error("qubit_restriction: subsystem dimension below 2");
            idx += occ * strides[static_cast<std::size_t>(k)];
        }
        keep.push_back(idx);
    }
    DensityMatrix out;
    out.dims.assign(rho.dims.size(), 2);
    out.matrix.resize(1 << n, 1 << n);
    for (int i = 0; i < (1 << n); ++i)
        for (int j = 0; j < (1 << n); ++j)
            out.matrix(i, j) = rho.matrix(keep[static_cast<std::size_t>(i)],
                                          keep[static_cast<std::size_t>(j)]);
    double discarded = rho.trace() - out.trace();
    if (std::abs(discarded) > tolerance)
        throw Error("qubit_restriction: weight " + std::to_string(discarded) +
                    " outside the {0,1} subspace");
    return out;
}

// Wootters concurrence of a two-qubit density matrix (basis |00>,|01>,|10>,|11>).
// The lambdas are taken as the singular values of the complex symmetric
// tau = V^T (yy) V over subnormalized eigenvectors V of rho: unlike the
// eigenvalues of the non-normal rho * rho_tilde they stay machine accurate
// for (near-)pure inputs, where the spurious sqrt(eps) contributions cancel.
inline double concurrence(const DensityMatrix& rho) {
    if (rho.matrix.rows() != 4 || rho.dims != std::vector<int>{2, 2})
        throw Error("concurrence needs a two-qubit density matrix");
    Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
    yy(0, 3) = -1.0; yy(1, 2) = 1.0; yy(2, 1) = 1.0; yy(3, 0) = -1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho.matrix);
    Eigen::Matrix4cd v = es.eigenvectors();
    for (int i = 0; i < 4; ++i)
        v.col(i) *= std::sqrt(std::max(0.0, es.eigenvalues()[i]));
    Eigen::Matrix4cd tau = v.transpose() * yy * v;
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(tau);
    const Eigen::Vector4d& s = svd.singularValues();
    return std::max(0.0, s[0] - s[1] - s[2] - s[3]);
}

// Entanglement entropy (bits) of a bipartition of a qubit-register target.
inline double target_cut_entropy(const TargetState& t, int cut_modes) {
    if (cut_modes < 1 || cut_modes >= t.n_modes)
        throw Error("cut must keep between 1 and n-1 modes");
    const int dk = 1 << cut_modes;
    const int dr = 1 << (t.n_modes - cut_modes);
    Eigen::MatrixXcd slices(dr, dk);
    for (int i = 0; i < dk; ++i)
        for (int j = 0; j < dr; ++j)
            slices(j, i) = t.amplitudes[i * dr + j];
    DensityMatrix rho;
    rho.matrix = (slices.transpose() * slices.conjugate()).eval();
    rho.dims.assign(static_cast<std::size_t>(cut_modes), 2);
    return von_neumann_entropy(rho);
}

// Dominant eigenvector of the register's reduced density matrix, with the
// purity defect 1 - lambda_max.  Valid as a pure-state reading only when the
// defect is tiny.
struct ModePureState {
    Eigen::VectorXcd amplitudes; // occupation basis, last mode fastest
    double impurity = 0.0;
};

inline ModePureState principal_mode_state(const StateVector& state) {
    DensityMatrix rho = mode_marginal(state);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix);
    const int last = static_cast<int>(es.eigenvalues().size()) - 1;
    ModePureState out;
    out.amplitudes = es.eigenvectors().col(last);
    out.impurity = std::abs(1.0 - es.eigenvalues()[last]);
    return out;
}

// Relative phase theta of a GHZ-class register state
// (|0...0> + e^{i theta}|1...1>)/sqrt(2), from the two extreme components.
inline double ghz_relative_phase(const StateVector& state) {
    ModePureState m = principal_mode_state(state);
    if (m.impurity > 1e-9)
        throw Error("register state is not pure (impurity " +
                    std::to_string(m.impurity) + ")");
    const SystemSpec& spec = state.basis().spec();
    int idx_all_ones = 0;
    for (const ModeSpec& mode : spec.modes)
        idx_all_ones = idx_all_ones * (mode.n_max + 1) + 1;
    Complex c0 = m.amplitudes[0];
    Complex c1 = m.amplitudes[idx_all_ones];
    if (std::abs(c0) < 1e-9 || std::abs(c1) < 1e-9)
        throw Error("state has no two-component GHZ form");
    return std::arg(c1 / c0);
}

} // namespace cavent

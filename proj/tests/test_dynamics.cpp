#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Eigenvalues>

#include "cavent/dynamics.hpp"
#include "cavent/protocol.hpp"

using namespace cavent;

namespace {

SystemSpec bell_spec(double g1 = 1.0, double g2 = 1.0) {
    return make_bell_system(g1, g2);
}

SystemSpec drive_only_spec() {
    SystemSpec spec;
    spec.atom.levels = {"b", "c"};
    spec.modes = {{"M", 1}};
    return spec;
}

// Reference evolution: full dense eigendecomposition of the whole matrix.
Eigen::VectorXcd evolve_dense(const HamiltonianMatrix& h, const Eigen::VectorXcd& v,
                              double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd phases(es.eigenvalues().size());
    for (int i = 0; i < phases.size(); ++i)
        phases[i] = std::exp(Complex(0.0, -es.eigenvalues()[i] * t));
    return es.eigenvectors() * phases.asDiagonal() *
           (es.eigenvectors().adjoint() * v);
}

} // namespace

TEST(BuildHamiltonian, CouplingMatrixElements) {
    BasisPtr b = make_basis(bell_spec(2.0, 3.0));
    std::vector<std::size_t> first{0};
    HamiltonianMatrix h = build_hamiltonian(*b, first, {});
    EXPECT_NEAR(max_hermiticity_defect(h), 0.0, 1e-15);

    int a00 = b->index_of({"a", {0, 0}});
    int c10 = b->index_of({"c", {1, 0}});
    int a10 = b->index_of({"a", {1, 0}});
    int c20 = b->index_of({"c", {2, 0}});
    EXPECT_DOUBLE_EQ(h(a00, c10).real(), 2.0);
    EXPECT_DOUBLE_EQ(h(c10, a00).real(), 2.0);
    // One photon already present: sqrt(2) enhancement.
    EXPECT_DOUBLE_EQ(h(a10, c20).real(), 2.0 * std::sqrt(2.0));
    // The inactive coupling contributes nothing.
    int b00 = b->index_of({"b", {0, 0}});
    int c01 = b->index_of({"c", {0, 1}});
    EXPECT_DOUBLE_EQ(std::abs(h(b00, c01)), 0.0);
}

TEST(BuildHamiltonian, DriveBlockAndErrors) {
    BasisPtr b = make_basis(drive_only_spec());
    DriveTerm drive{"b", "c", 2.0, 0.7};
    HamiltonianMatrix h = build_hamiltonian(*b, {}, {&drive, 1});

    int up = b->index_of({"b", {0}});
    int dn = b->index_of({"c", {0}});
    // Half the Rabi rate with the laser phase on the raising part.
    EXPECT_NEAR(std::abs(h(up, dn) - std::exp(Complex(0.0, 0.7))), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(h(dn, up) - std::exp(Complex(0.0, -0.7))), 0.0, 1e-15);
    EXPECT_NEAR(max_hermiticity_defect(h), 0.0, 1e-15);

    DriveTerm unknown{"b", "z", 1.0, 0.0};
    EXPECT_THROW(build_hamiltonian(*b, {}, {&unknown, 1}), SpecError);
    DriveTerm degenerate{"b", "b", 1.0, 0.0};
    EXPECT_THROW(build_hamiltonian(*b, {}, {&degenerate, 1}), SpecError);
    DriveTerm negative{"b", "c", -1.0, 0.0};
    EXPECT_THROW(build_hamiltonian(*b, {}, {&negative, 1}), SpecError);
    std::vector<std::size_t> bad{5};
    EXPECT_THROW(build_hamiltonian(*b, bad, {}), SpecError);
}

TEST(Evolve, VacuumRabiOscillation) {
    const double g = 1.7;
    BasisPtr b = make_basis(bell_spec(g, 1.0));
    std::vector<std::size_t> first{0};
    HamiltonianMatrix h = build_hamiltonian(*b, first, {});
    StateVector init = basis_ket(b, {"a", {0, 0}});

    for (double t : {0.3, 1.1, 2.9}) {
        StateVector s = evolve(init, h, t);
        Complex stay = s.amplitude({"a", {0, 0}});
        Complex swap = s.amplitude({"c", {1, 0}});
        EXPECT_NEAR(std::abs(stay - Complex(std::cos(g * t), 0.0)), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(swap - Complex(0.0, -std::sin(g * t))), 0.0, 1e-12);
        EXPECT_NEAR(s.norm(), 1.0, 1e-12);
    }

    // Full transfer at half a Rabi cycle.
    StateVector s = evolve(init, h, pi / (2.0 * g));
    EXPECT_NEAR(std::abs(s.amplitude({"c", {1, 0}}) - Complex(0.0, -1.0)), 0.0, 1e-12);
}

TEST(Evolve, PhotonNumberScalesTheRate) {
    const double g = 0.9;
    BasisPtr b = make_basis(bell_spec(g, 1.0));
    std::vector<std::size_t> first{0};
    HamiltonianMatrix h = build_hamiltonian(*b, first, {});
    StateVector init = basis_ket(b, {"c", {2, 0}});

    double t = 0.8;
    StateVector s = evolve(init, h, t);
    double rate = g * std::sqrt(2.0);
    EXPECT_NEAR(std::abs(s.amplitude({"c", {2, 0}}) -
                         Complex(std::cos(rate * t), 0.0)),
                0.0, 1e-12);
    EXPECT_NEAR(std::abs(s.amplitude({"a", {1, 0}}) -
                         Complex(0.0, -std::sin(rate * t))),
                0.0, 1e-12);
}

TEST(Evolve, DrivePulseTransfersPopulation) {
    BasisPtr b = make_basis(drive_only_spec());
    const double omega = 2.3, theta = 0.4;
    DriveTerm drive{"b", "c", omega, theta};
    HamiltonianMatrix h = build_hamiltonian(*b, {}, {&drive, 1});
    StateVector init = basis_ket(b, {"c", {0}});

    double t = 1.3;
    StateVector s = evolve(init, h, t);
    EXPECT_NEAR(std::abs(s.amplitude({"c", {0}}) -
                         Complex(std::cos(omega * t / 2.0), 0.0)),
                0.0, 1e-12);
    Complex expected_up =
        Complex(0.0, -1.0) * std::exp(Complex(0.0, theta)) * std::sin(omega * t / 2.0);
    EXPECT_NEAR(std::abs(s.amplitude({"b", {0}}) - expected_up), 0.0, 1e-12);

    // Pulse area pi: full transfer with the -i e^{i theta} factor.
    StateVector flipped = evolve(init, h, pi / omega);
    Complex expected =
        Complex(0.0, -1.0) * std::exp(Complex(0.0, theta));
    EXPECT_NEAR(std::abs(flipped.amplitude({"b", {0}}) - expected), 0.0, 1e-12);
    EXPECT_NEAR(flipped.population({"c", {0}}), 0.0, 1e-24);
}

TEST(Evolve, MatchesDenseEigendecompositionOnRandomStates) {
    BasisPtr b = make_basis(bell_spec(1.3, 0.7));
    std::vector<std::size_t> both{0, 1};
    DriveTerm drive{"b", "c", 0.9, -0.3};
    HamiltonianMatrix h = build_hamiltonian(*b, both, {&drive, 1});

    std::mt19937_64 rng(42);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXcd v(b->dim());
        for (int i = 0; i < v.size(); ++i) v[i] = Complex(gauss(rng), gauss(rng));
        v.normalize();
        double t = 0.5 + trial;
        StateVector evolved = evolve(StateVector(b, v), h, t);
        Eigen::VectorXcd reference = evolve_dense(h, v, t);
        EXPECT_NEAR((evolved.amplitudes() - reference).cwiseAbs().maxCoeff(), 0.0, 1e-12);
        EXPECT_NEAR(evolved.norm(), 1.0, 1e-12);
    }
}

TEST(Evolve, RejectsBadInputs) {
    BasisPtr b = make_basis(bell_spec());
    std::vector<std::size_t> first{0};
    HamiltonianMatrix h = build_hamiltonian(*b, first, {});
    StateVector init = basis_ket(b, {"a", {0, 0}});
    EXPECT_THROW(evolve(init, h, -0.1), Error);

    HamiltonianMatrix wrong = HamiltonianMatrix::Zero(5, 5);
    EXPECT_THROW(evolve(init, wrong, 1.0), Error);

    HamiltonianMatrix skew = h;
    skew(0, 1) = Complex(0.0, 1.0);
    EXPECT_THROW(evolve(init, skew, 1.0), Error);
}

TEST(AnalyticOracle, AmplitudesStayNormalizedAndMatchProbability) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> g_dist(0.1, 10.0);
    std::uniform_real_distribution<double> t_dist(0.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        double g1 = g_dist(rng), g2 = g_dist(rng), t = t_dist(rng);
        double phi = t_dist(rng);
        TwoModeAmplitudes amp = analytic_two_mode_amplitudes(g1, g2, phi, t);
        EXPECT_NEAR(amp.norm_sq(), 1.0, 1e-12);
        EXPECT_NEAR(std::norm(amp.c_c10) + std::norm(amp.c_c01),
                    analytic_pc(g1, g2, t), 1e-12);
    }
    EXPECT_THROW(analytic_two_mode_amplitudes(1.0, 1.0, 0.0, -1.0), Error);
    EXPECT_THROW(analytic_pc(1.0, 1.0, -1.0), Error);
}

TEST(AnalyticOracle, KnownValues) {
    // Both couplings at a quarter period: unit detection probability.
    EXPECT_NEAR(analytic_pc(1.0, 1.0, pi / 2.0), 1.0, 1e-15);
    EXPECT_NEAR(analytic_pc(1.0, 3.0, pi / 2.0), 1.0, 1e-15);
    EXPECT_NEAR(analytic_pc(1.0, 2.0, pi / 2.0), 0.5, 1e-15);

    TwoModeAmplitudes amp = analytic_two_mode_amplitudes(1.0, 1.0, 0.0, pi / 2.0);
    EXPECT_NEAR(std::abs(amp.c_a00), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(amp.c_c10 - Complex(0.0, -1.0 / std::sqrt(2.0))), 0.0, 1e-15);
}

TEST(ExcitationNumbers, DiagonalCountsPhotonsAndExcitedLevels) {
    BasisPtr b = make_basis(bell_spec());
    std::vector<LevelId> excited{"a", "b"};
    Eigen::VectorXd n = excitation_numbers(*b, excited);
    EXPECT_DOUBLE_EQ(n[b->index_of({"a", {0, 0}})], 1.0);
    EXPECT_DOUBLE_EQ(n[b->index_of({"c", {1, 0}})], 1.0);
    EXPECT_DOUBLE_EQ(n[b->index_of({"c", {0, 0}})], 0.0);
    EXPECT_DOUBLE_EQ(n[b->index_of({"b", {2, 1}})], 4.0);
    std::vector<LevelId> unknown{"z"};
    EXPECT_THROW(excitation_numbers(*b, unknown), SpecError);

    StateVector s = state_from_components(
        b, {{{"a", {0, 0}}, 1.0 / std::sqrt(2.0)}, {{"c", {1, 0}}, 1.0 / std::sqrt(2.0)}});
    EXPECT_NEAR(expectation(n, s), 1.0, 1e-15);
}

TEST(ExcitationNumbers, ConservedUnderMatchingEvolution) {
    BasisPtr b = make_basis(bell_spec(1.1, 2.2));
    std::vector<std::size_t> both{0, 1};
    HamiltonianMatrix h = build_hamiltonian(*b, both, {});
    std::vector<LevelId> uppers{"a", "b"};
    Eigen::VectorXd n = excitation_numbers(*b, uppers);

    StateVector init = state_from_components(
        b, {{{"a", {0, 1}}, 0.6}, {{"b", {1, 0}}, {0.0, 0.8}}});
    double before = expectation(n, init);
    StateVector evolved = evolve(init, h, 1.7);
    EXPECT_NEAR(expectation(n, evolved), before, 1e-12);
}

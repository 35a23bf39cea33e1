#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "cavent/hilbert.hpp"

using namespace cavent;

namespace {

SystemSpec three_level_two_mode() {
    SystemSpec spec;
    spec.atom.levels = {"a", "b", "c"};
    spec.modes = {{"A", 2}, {"B", 2}};
    spec.couplings = {{"A", "a", "c", 1.0}, {"B", "b", "c", 1.0}};
    return spec;
}

} // namespace

TEST(SystemSpec, ValidAccessors) {
    SystemSpec spec = three_level_two_mode();
    EXPECT_NO_THROW(spec.validate());
    EXPECT_EQ(spec.level_index("b"), 1);
    EXPECT_EQ(spec.level_index("z"), -1);
    EXPECT_EQ(spec.mode_index("B"), 1);
    EXPECT_EQ(spec.couplings_on_mode("A"), std::vector<std::size_t>{0});
    EXPECT_TRUE(spec.couplings_on_mode("Z").empty());
}

TEST(SystemSpec, ValidationRejectsMalformedSpecs) {
    SystemSpec spec = three_level_two_mode();
    spec.atom.levels = {"a"};
    EXPECT_THROW(spec.validate(), SpecError);

    spec = three_level_two_mode();
    spec.atom.levels.push_back("a");
    EXPECT_THROW(spec.validate(), SpecError);

    spec = three_level_two_mode();
    spec.modes[1].id = "A";
    EXPECT_THROW(spec.validate(), SpecError);

    spec = three_level_two_mode();
    spec.modes[0].n_max = 0;
    EXPECT_THROW(spec.validate(), SpecError);

    spec = three_level_two_mode();
    spec.couplings[0].mode = "Z";
    EXPECT_THROW(spec.validate(), SpecError);

    spec = three_level_two_mode();
    spec.couplings[0].upper = "z";
    EXPECT_THROW(spec.validate(), SpecError);

    spec = three_level_two_mode();
    spec.couplings[0].lower = spec.couplings[0].upper;
    EXPECT_THROW(spec.validate(), SpecError);

    spec = three_level_two_mode();
    spec.couplings[0].g = -0.5;
    EXPECT_THROW(spec.validate(), SpecError);

    spec = three_level_two_mode();
    spec.couplings.push_back(spec.couplings[0]);
    EXPECT_THROW(spec.validate(), SpecError);
}

TEST(Basis, DimensionAndOrdering) {
    Basis b(three_level_two_mode());
    EXPECT_EQ(b.dim(), 27);

    // Level-major, last mode fastest.
    EXPECT_EQ(b.label(0), "|a,0,0>");
    EXPECT_EQ(b.label(1), "|a,0,1>");
    EXPECT_EQ(b.label(3), "|a,1,0>");
    EXPECT_EQ(b.label(9), "|b,0,0>");
    EXPECT_EQ(b.label(26), "|c,2,2>");
}

TEST(Basis, IndexRoundTripExhaustive) {
    SystemSpec spec;
    spec.atom.levels = {"g", "e"};
    spec.modes = {{"M1", 3}, {"M2", 1}, {"M3", 2}};
    Basis b(spec);
    EXPECT_EQ(b.dim(), 2 * 4 * 2 * 3);

    // Independent enumeration in the documented order.
    int idx = 0;
    for (const LevelId& level : spec.atom.levels)
        for (int n1 = 0; n1 <= 3; ++n1)
            for (int n2 = 0; n2 <= 1; ++n2)
                for (int n3 = 0; n3 <= 2; ++n3) {
                    BasisState s{level, {n1, n2, n3}};
                    EXPECT_EQ(b.index_of(s), idx);
                    BasisState back = b.state_at(idx);
                    EXPECT_EQ(back.level, s.level);
                    EXPECT_EQ(back.photons, s.photons);
                    EXPECT_EQ(b.level_of(idx), spec.level_index(level));
                    EXPECT_EQ(b.occupation_of(idx, 0), n1);
                    EXPECT_EQ(b.occupation_of(idx, 1), n2);
                    EXPECT_EQ(b.occupation_of(idx, 2), n3);
                    ++idx;
                }
    EXPECT_EQ(idx, b.dim());

    std::vector<BasisState> all = build_basis(spec);
    ASSERT_EQ(static_cast<int>(all.size()), b.dim());
    EXPECT_EQ(all[1].photons, (std::vector<int>{0, 0, 1}));
}

TEST(Basis, IndexOfRejectsInvalidStates) {
    Basis b(three_level_two_mode());
    EXPECT_THROW(b.index_of({"z", {0, 0}}), SpecError);
    EXPECT_THROW(b.index_of({"a", {0}}), SpecError);
    EXPECT_THROW(b.index_of({"a", {0, 3}}), SpecError);
    EXPECT_THROW(b.index_of({"a", {-1, 0}}), SpecError);
    EXPECT_THROW(b.state_at(27), Error);
    EXPECT_THROW(b.state_at(-1), Error);
}

TEST(Basis, SameSpaceIgnoresRates) {
    SystemSpec s1 = three_level_two_mode();
    SystemSpec s2 = three_level_two_mode();
    s2.couplings[0].g = 7.0;
    EXPECT_TRUE(Basis(s1).same_space(Basis(s2)));

    SystemSpec s3 = three_level_two_mode();
    s3.modes[1].n_max = 1;
    EXPECT_FALSE(Basis(s1).same_space(Basis(s3)));
}

TEST(StateVector, NormalizesOnConstruction) {
    BasisPtr b = make_basis(three_level_two_mode());
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(b->dim());
    v[0] = 3.0;
    v[4] = 4.0;
    StateVector s(b, v);
    EXPECT_NEAR(s.norm(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(s.amplitudes()[0]), 0.6, 1e-15);
    EXPECT_NEAR(s.population(b->state_at(4)), 0.64, 1e-15);
}

TEST(StateVector, RejectsZeroNormAndWrongDimension) {
    BasisPtr b = make_basis(three_level_two_mode());
    EXPECT_THROW(StateVector(b, Eigen::VectorXcd::Zero(b->dim())), Error);
    EXPECT_THROW(StateVector(b, Eigen::VectorXcd::Zero(5)), BasisMismatchError);

    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(b->dim());
    v[0] = 0.5; // norm far from 1
    EXPECT_THROW(StateVector::unchecked(b, v), Error);
    v[0] = 1.0;
    EXPECT_NO_THROW(StateVector::unchecked(b, v));
}

TEST(StateVector, ComponentsSumDuplicates) {
    BasisPtr b = make_basis(three_level_two_mode());
    StateVector s = state_from_components(
        b, {{{"a", {0, 0}}, {0.5, 0.0}}, {{"a", {0, 0}}, {0.5, 0.0}}});
    EXPECT_NEAR(s.population({"a", {0, 0}}), 1.0, 1e-15);

    EXPECT_THROW(state_from_components(
                     b, {{{"a", {0, 0}}, {0.5, 0.0}}, {{"a", {0, 0}}, {-0.5, 0.0}}}),
                 Error);
}

TEST(StateVector, InnerProductConjugatesLeft) {
    BasisPtr b = make_basis(three_level_two_mode());
    const Complex i(0.0, 1.0);
    StateVector x = state_from_components(b, {{{"a", {0, 0}}, 1.0}});
    StateVector y = state_from_components(
        b, {{{"a", {0, 0}}, i / std::sqrt(2.0)}, {{"b", {0, 0}}, 1.0 / std::sqrt(2.0)}});
    Complex xy = inner_product(x, y);
    EXPECT_NEAR(xy.real(), 0.0, 1e-15);
    EXPECT_NEAR(xy.imag(), 1.0 / std::sqrt(2.0), 1e-15);
    Complex yx = inner_product(y, x);
    EXPECT_NEAR(std::abs(yx - std::conj(xy)), 0.0, 1e-15);
}

TEST(StateVector, InnerProductAcrossEquivalentBases) {
    SystemSpec s2 = three_level_two_mode();
    s2.couplings[0].g = 2.0;
    BasisPtr b1 = make_basis(three_level_two_mode());
    BasisPtr b2 = make_basis(s2);
    StateVector x = basis_ket(b1, {"a", {0, 0}});
    StateVector y = basis_ket(b2, {"a", {0, 0}});
    EXPECT_NEAR(std::abs(inner_product(x, y) - Complex(1.0, 0.0)), 0.0, 1e-15);

    SystemSpec s3 = three_level_two_mode();
    s3.modes[0].n_max = 1;
    BasisPtr b3 = make_basis(s3);
    StateVector z = basis_ket(b3, {"a", {0, 0}});
    EXPECT_THROW(inner_product(x, z), BasisMismatchError);
}

TEST(PartialTrace, BellLikeStateGivesMaximallyMixedMarginal) {
    BasisPtr b = make_basis(three_level_two_mode());
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    StateVector s = state_from_components(
        b, {{{"c", {0, 1}}, inv_sqrt2}, {{"c", {1, 0}}, inv_sqrt2}});

    Subsystems keep;
    keep.modes = {"A"};
    DensityMatrix rho = partial_trace(s, keep);
    ASSERT_EQ(rho.dims, (std::vector<int>{3}));
    EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
    EXPECT_NEAR(rho.matrix(0, 0).real(), 0.5, 1e-12);
    EXPECT_NEAR(rho.matrix(1, 1).real(), 0.5, 1e-12);
    EXPECT_NEAR(std::abs(rho.matrix(0, 1)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(rho.matrix(2, 2)), 0.0, 1e-12);
    EXPECT_NEAR(max_hermiticity_defect(rho.matrix), 0.0, 1e-12);
}

TEST(PartialTrace, KeepAtomOfProductState) {
    BasisPtr b = make_basis(three_level_two_mode());
    const Complex i(0.0, 1.0);
    StateVector s = state_from_components(
        b, {{{"a", {1, 0}}, 1.0 / std::sqrt(2.0)}, {{"b", {1, 0}}, i / std::sqrt(2.0)}});
    Subsystems keep;
    keep.atom = true;
    DensityMatrix rho = partial_trace(s, keep);
    ASSERT_EQ(rho.dims, (std::vector<int>{3}));
    // Atom is pure (|a> + i|b>)/sqrt(2): coherences survive.
    EXPECT_NEAR(rho.matrix(0, 0).real(), 0.5, 1e-12);
    EXPECT_NEAR(rho.matrix(1, 1).real(), 0.5, 1e-12);
    EXPECT_NEAR(std::abs(rho.matrix(0, 1) - Complex(0.0, -0.5)), 0.0, 1e-12);
}

TEST(PartialTrace, KeepBothModes) {
    BasisPtr b = make_basis(three_level_two_mode());
    StateVector s = basis_ket(b, {"b", {2, 1}});
    DensityMatrix rho = mode_marginal(s);
    ASSERT_EQ(rho.dims, (std::vector<int>{3, 3}));
    // Mixed-radix index of (2, 1) with last mode fastest: 2*3 + 1 = 7.
    EXPECT_NEAR(rho.matrix(7, 7).real(), 1.0, 1e-12);
    EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
}

TEST(PartialTrace, EmptySelectorRejected) {
    BasisPtr b = make_basis(three_level_two_mode());
    StateVector s = basis_ket(b, {"a", {0, 0}});
    EXPECT_THROW(partial_trace(s, Subsystems{}), Error);
    Subsystems bad;
    bad.modes = {"Z"};
    EXPECT_THROW(partial_trace(s, bad), SpecError);
}

TEST(PartialTrace, EntangledAtomModeKeepsUnitTraceAndPurityBound) {
    BasisPtr b = make_basis(three_level_two_mode());
    StateVector s = state_from_components(
        b, {{{"a", {0, 0}}, 0.6}, {{"c", {1, 0}}, {0.0, -0.8}}});
    Subsystems keep;
    keep.modes = {"A"};
    DensityMatrix rho = partial_trace(s, keep);
    EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
    double purity = (rho.matrix * rho.matrix).trace().real();
    EXPECT_NEAR(purity, 0.36 * 0.36 + 0.64 * 0.64, 1e-12);
}

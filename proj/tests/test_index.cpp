#include <gtest/gtest.h>

#include <numbers>

#include "swlab/index.hpp"
#include "swlab/sampling.hpp"
#include "swlab/solver.hpp"

using namespace swlab;

TEST(IndexOperator, NamesRoundTrip) {
    for (IndexOperator op : {IndexOperator::dbar, IndexOperator::star_d, IndexOperator::star_dbar, IndexOperator::dirac, IndexOperator::full})
        EXPECT_EQ(parse_index_operator(to_string(op)), op);
    EXPECT_EQ(parse_index_operator("star-dbar-on-1-forms"), IndexOperator::star_dbar);
    EXPECT_THROW(parse_index_operator("laplace"), std::invalid_argument);
}

TEST(Index, CauchyRiemannFollowsTheDegree) {
    for (int d : {-2, -1, 0, 1, 2}) {
        const Configuration q(TorusLattice(12, 12, 1, 1), d, Target(1));
        const IndexResult r = numerical_index(q, IndexOperator::dbar);
        EXPECT_EQ(r.index, d) << "degree " << d;
        EXPECT_EQ(r.real_per_unit, 2);
        EXPECT_GE(r.sigma_gap, 1e3);
        EXPECT_EQ(expected_index(q, IndexOperator::dbar), d);
    }
}

TEST(Index, IndependentOfConformalFactorAndTorusShape) {
    Rng r(5);
    TorusLattice L(12, 10, 1.4, 0.7);
    for (auto& c : L.conformal) c = 1 + 0.3 * r.uni();
    const Configuration q(L, 1, Target(1));
    EXPECT_EQ(numerical_index(q, IndexOperator::dbar).index, 1);
}

TEST(Index, OneFormBlocksOnTheTorus) {
    const Configuration q(TorusLattice(12, 12, 1, 1), 0, Target(1));
    const IndexResult d = numerical_index(q, IndexOperator::star_d);
    EXPECT_EQ(d.smooth_ker, 2);
    EXPECT_EQ(d.smooth_coker, 2);
    EXPECT_EQ(d.index, 0);
    const IndexResult s = numerical_index(q, IndexOperator::star_dbar);
    EXPECT_EQ(s.smooth_ker, 2);
    EXPECT_EQ(s.index, 0);
}

TEST(Index, FullOperatorIsTheBlockSumAtAStoredSolution) {
    TorusLattice L(8, 8, 1, 1);
    SolveOptions o;
    o.tol = 1e-12;
    const Configuration q = solve(vortex_initial_guess(L, 0, 1.0, 4 * std::numbers::pi), o).first;
    const int full = numerical_index(q, IndexOperator::full).index;
    const int sum = numerical_index(q, IndexOperator::dirac).index + numerical_index(q, IndexOperator::star_d).index +
                    numerical_index(q, IndexOperator::star_dbar).index;
    EXPECT_EQ(full, sum);
    EXPECT_EQ(full, expected_index(q, IndexOperator::full));
}

TEST(Index, RejectsLargeLattices) {
    const Configuration q(TorusLattice(40, 8, 1, 1), 0, Target(1));
    EXPECT_THROW(numerical_index(q, IndexOperator::dbar), std::invalid_argument);
}

TEST(Index, AmbiguousGapIsReported) {
    Rng r(9);
    const Configuration q = random_configuration(TorusLattice(6, 6, 1, 1), 1, Target(1), r, 0.8);
    IndexOptions opt;
    opt.zero_cap = 0.9;
    EXPECT_THROW(numerical_index(q, IndexOperator::full, opt), AmbiguousGap);
}

TEST(Index, EquivariantWeightSum) {
    EXPECT_NEAR(equivariant_weight_sum(Target(1)), 0.0, 1e-12);
    EXPECT_NEAR(equivariant_weight_sum(Target(3, {1, 2, -4})), 0.0, 1e-12);
}

TEST(Surjectivity, ConstantSolutionIsOntoVortexIsNot) {
    TorusLattice L(12, 12, 1, 1);
    SolveOptions o;
    o.tol = 1e-12;
    const Configuration c = solve(vortex_initial_guess(L, 0, 1.0, 4 * std::numbers::pi), o).first;
    EXPECT_GE(surjectivity_margin(c).relative, 1e-6);
    o.max_iter = 30;
    const Configuration v = solve(vortex_initial_guess(L, 1, 1.0, 4 * std::numbers::pi), o).first;
    EXPECT_LT(surjectivity_margin(v).relative, 1e-6);
}

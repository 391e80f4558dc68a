#include <gtest/gtest.h>

#include <numbers>

#include "swlab/sampling.hpp"
#include "swlab/symplectic.hpp"

using namespace swlab;

namespace {

double tangent_diff(const Configuration& q, const TangentTriple& A, const TangentTriple& B) {
    const Layout Lo = layout_of(q);
    return (pack(Lo, A) - pack(Lo, B)).cwiseAbs().maxCoeff();
}

TangentTriple negate(const Configuration& q, const TangentTriple& X) {
    const Layout Lo = layout_of(q);
    return unpack_tangent(Lo, Vec(-pack(Lo, X)));
}

TorusLattice wavy_lattice(int nx, int ny, Rng& r) {
    TorusLattice L(nx, ny, 1.3, 0.8);
    for (auto& c : L.conformal) c = 1 + 0.3 * r.uni();
    return L;
}

}  // namespace

TEST(ConfigMetric, PositiveSymmetricAndConstantForm) {
    Rng r(3);
    const TorusLattice L = wavy_lattice(8, 6, r);
    const Configuration q = random_configuration(L, 1, Target(2), r);
    for (int k = 0; k < 20; ++k) {
        const TangentTriple X = random_tangent(q, r), Y = random_tangent(q, r);
        EXPECT_GT(config_metric(q, X, X), 0.0);
        EXPECT_NEAR(config_metric(q, X, Y), config_metric(q, Y, X), 1e-12);
    }
    TorusLattice U(8, 8, 1.0, 1.0);
    Configuration p(U, 0, Target(1));
    TangentTriple X = zero_tangent(p);
    std::fill(X.alpha.x.begin(), X.alpha.x.end(), 1.0);
    EXPECT_NEAR(config_metric(p, X, X), 0.5, 1e-14);
}

TEST(ConfigStructure, QuaternionRelationsAndCompatibility) {
    Rng r(5);
    const TorusLattice L = wavy_lattice(8, 10, r);
    const Configuration q = random_configuration(L, -1, Target(2, {1, 3}), r);
    auto I = [&](int k, const TangentTriple& X) { return apply_config_structure(q, k, X); };
    for (int t = 0; t < 100; ++t) {
        const TangentTriple X = random_tangent(q, r), Y = random_tangent(q, r);
        for (int k = 1; k <= 3; ++k) {
            EXPECT_LE(tangent_diff(q, I(k, I(k, X)), negate(q, X)), 1e-12);
            EXPECT_NEAR(config_metric(q, I(k, X), I(k, Y)), config_metric(q, X, Y), 1e-10);
            EXPECT_NEAR(config_omega(q, k, X, Y), -config_omega(q, k, Y, X), 1e-10);
        }
        EXPECT_LE(tangent_diff(q, I(1, I(2, X)), I(3, X)), 1e-12);
        EXPECT_LE(tangent_diff(q, I(2, I(3, X)), I(1, X)), 1e-12);
        EXPECT_LE(tangent_diff(q, I(3, I(1, X)), I(2, X)), 1e-12);
        EXPECT_NEAR(config_omega(q, 1, I(1, X), I(1, Y)), config_omega(q, 1, X, Y), 1e-10);
    }
}

TEST(ConfigMoment, ZeroAtTrivialConfiguration) {
    TorusLattice L(8, 8, 1.0, 1.0);
    const Configuration q(L, 0, Target(1));
    const ConfigMomentValues v = config_moment_maps(q, RealField(64, 1.0));
    EXPECT_EQ(v.mu_I, 0.0);
    EXPECT_EQ(std::abs(v.mu_c), 0.0);
}

TEST(ConfigMoment, FluxOfDegreeOneBackground) {
    // F integrates to -2 pi on a degree-1 bundle; with u = 0 the pairing with gamma = 1 is half of it
    for (int n : {8, 12}) {
        TorusLattice L(n, n, 1.0, 1.0);
        const Configuration q(L, 1, Target(1));
        const ConfigMomentValues v = config_moment_maps(q, RealField(static_cast<std::size_t>(n * n), 1.0));
        EXPECT_NEAR(v.mu_I, -std::numbers::pi, 1e-12);
        EXPECT_NEAR(std::abs(v.mu_c), 0.0, 1e-14);
    }
}

TEST(ConfigMoment, GaugeInvariant) {
    Rng r(8);
    const TorusLattice L = wavy_lattice(10, 8, r);
    const Configuration q = random_configuration(L, 2, Target(1), r);
    const RealField gamma = random_function(L, r);
    const ConfigMomentValues v0 = config_moment_maps(q, gamma);
    for (int k = 0; k < 10; ++k) {
        const ConfigMomentValues v1 = config_moment_maps(gauge_transform(random_gauge(L, r), q), gamma);
        EXPECT_NEAR(v1.mu_I, v0.mu_I, 1e-12);
        EXPECT_NEAR(std::abs(v1.mu_c - v0.mu_c), 0.0, 1e-12);
    }
}

TEST(Hamiltonian, IdentitiesHoldByFiniteDifferences) {
    Rng r(13);
    const TorusLattice L = wavy_lattice(16, 16, r);
    for (int d : {0, 1}) {
        const Configuration q = random_configuration(L, d, Target(2, {1, -1}), r, 0.6);
        for (int k = 0; k < 6; ++k) {
            const RealField gamma = random_function(L, r);
            TangentTriple X = random_tangent(q, r);
            if (k % 2 == 1) X = apply_config_structure(q, 1, d1(q, random_function(L, r)));
            const HamiltonianDefects h = verify_hamiltonian_identity(q, gamma, X, 1e-4);
            EXPECT_LE(h.real_part, 1e-6);
            EXPECT_LE(h.complex_part, 1e-6);
        }
        const HamiltonianDefects z = verify_hamiltonian_identity(q, RealField(256, 0.0), random_tangent(q, r), 1e-4);
        EXPECT_EQ(z.real_part, 0.0);
        EXPECT_EQ(z.complex_part, 0.0);
    }
}

TEST(ComplexSubspace, PointwiseIdentities) {
    Rng r(21);
    const TorusLattice L = wavy_lattice(6, 6, r);
    for (int t = 0; t < 20; ++t) {
        const Configuration q = random_configuration(L, 1, Target(2, {1, 2}), r, 1.0);
        const LemmaIdentityDefects d = lemma_identity_defects(q, random_tangent(q, r));
        EXPECT_LE(d.lie, 1e-12);
        EXPECT_LE(d.higgs, 1e-12);
        EXPECT_LE(d.moment, 1e-12);
    }
}

TEST(ComplexSubspace, KernelOfRandomPointIsReported) {
    Rng r(2);
    TorusLattice L(6, 6, 1.0, 1.0);
    const Configuration q = random_configuration(L, 0, Target(1), r, 0.5, true);
    const SubspaceReport rep = check_Cprime_invariance(q);
    EXPECT_GE(rep.kernel_dim, 2 * L.size());
    EXPECT_GE(rep.defect, 0.0);
}

TEST(CurvatureForms, ZeroSpinorSlotsGiveZero) {
    Rng r(4);
    const TorusLattice L = wavy_lattice(6, 8, r);
    const Configuration q = random_configuration(L, 0, Target(1), r);
    TangentTriple X = random_tangent(q, r), Y = random_tangent(q, r);
    std::fill(X.xi.begin(), X.xi.end(), Quaternion{});
    const CurvatureForms c = curvature_bilinear_forms(q, X, Y);
    EXPECT_NEAR(c.gamma_fd, 0.0, 1e-12);
    EXPECT_EQ(c.gamma_analytic, 0.0);
}

TEST(CurvatureForms, HessianAntisymmetryAndNormalization) {
    Rng r(6);
    const TorusLattice L = wavy_lattice(8, 8, r);
    const Configuration q = random_configuration(L, 1, Target(2), r);
    for (int t = 0; t < 10; ++t) {
        const TangentTriple X = random_tangent(q, r), Y = random_tangent(q, r);
        const CurvatureForms c = curvature_bilinear_forms(q, X, Y);
        EXPECT_LE(std::abs(c.gamma_fd - c.gamma_analytic), 1e-6);
        EXPECT_LE(std::abs(curvature_bilinear_forms(q, X, X).tau), 1e-12);
        const CurvatureForms s = curvature_bilinear_forms(q, Y, X);
        EXPECT_LE(std::abs(c.tau + s.tau), 1e-12);
        EXPECT_LE(std::abs(c.gamma_analytic - CurvatureConventions::gamma_to_omega * c.omega_spinor), 1e-8);
        EXPECT_LE(std::abs(c.tau - CurvatureConventions::tau_to_omega() * c.omega_higgs), 1e-8);
    }
}

TEST(CurvatureForms, HiggsFormMatchesSmoothPointwiseFormula) {
    // for a smooth variation the pairing approaches (1/pi) int Im(eta1 conj(eta2)) i dx dy
    TorusLattice L(48, 48, 1.0, 1.0);
    const Configuration q(L, 0, Target(1));
    TangentTriple X = zero_tangent(q), Y = zero_tangent(q);
    for (int s = 0; s < L.size(); ++s) {
        const double x = 2 * std::numbers::pi * L.ix(s) / 48.0, y = 2 * std::numbers::pi * L.iy(s) / 48.0;
        X.eta[s] = cplx(std::cos(x), std::sin(y));
        Y.eta[s] = cplx(std::sin(y), 1.0 + std::cos(x));
    }
    double ref = 0;
    for (int s = 0; s < L.size(); ++s) ref += (X.eta[s] * std::conj(Y.eta[s])).imag() * L.cell() / std::numbers::pi;
    const CurvatureForms c = curvature_bilinear_forms(q, X, Y);
    EXPECT_NEAR(c.tau.real(), 0.0, 1e-14);
    EXPECT_NEAR(c.tau.imag(), ref, 2e-2 * std::abs(ref) + 1e-3);
}

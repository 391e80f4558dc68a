#include <gtest/gtest.h>

#include "swlab/sampling.hpp"

using namespace swlab;

TEST(HiggsVectorField, Values) {
    EXPECT_EQ(max_abs_diff(higgs_vector(1, cplx(1, 0), Quaternion::one()), Quaternion(0, 0, 0, -1)), 0.0);
    EXPECT_EQ(higgs_vector(1, cplx(0, 0), Quaternion(1, 2, 3, 4)).norm2(), 0.0);
    // I2 K_{b1} u + I3 K_{b2} u assembled from the primitives
    Rng r(1);
    const Target t(1, {-2});
    for (int k = 0; k < 20; ++k) {
        const Quaternion u = r.quat();
        const cplx phi(r.normal(), r.normal());
        const std::vector<Quaternion> p{u};
        const Quaternion K1 = fundamental_vector_field(t, phi.real(), p)[0], K2 = fundamental_vector_field(t, phi.imag(), p)[0];
        EXPECT_LT(max_abs_diff(higgs_vector(-2, phi, u), apply_I(2, K1) + apply_I(3, K2)), 1e-13);
    }
}

TEST(Residual, FlatUnitSpinor) {
    TorusLattice L(8, 8, 1, 1);
    Configuration q(L, 0, Target(1));
    for (auto& h : q.u) h = Quaternion::one();
    const ResidualTriple r = residual_2d(q);
    for (int s = 0; s < L.size(); ++s) {
        EXPECT_DOUBLE_EQ(r.r1[s], -0.5);
        EXPECT_EQ(r.r2[s].norm2(), 0.0);
        EXPECT_EQ(std::abs(r.r3[s]), 0.0);
    }
    EXPECT_NEAR(energy(q), 0.125, 1e-15);
}

TEST(Residual, GaugeInvariance) {
    Rng r(2);
    TorusLattice L(12, 10, 1.1, 0.9);
    for (auto& c : L.conformal) c = 1 + 0.2 * r.uni();
    const Target t(2, {1, 3});
    Configuration q = random_configuration(L, 1, t, r, 0.5, true);
    q.epsilon = 0.7;
    q.tau = 1.3;
    const ResidualTriple r0 = residual_2d(q);
    const double E0 = energy(q);
    double drift = 0;
    for (int k = 0; k < 50; ++k) {
        const ComplexField g = random_gauge(L, r);
        const Configuration qg = gauge_transform(g, q);
        const ResidualTriple rg = residual_2d(qg);
        drift = std::max({drift, max_abs(rg.r1, r0.r1), max_abs(rg.r3, r0.r3), std::abs(energy(qg) - E0)});
        for (int s = 0; s < L.size(); ++s)
            for (int a = 0; a < 2; ++a) {
                const std::size_t idx = static_cast<std::size_t>(s) * 2 + a;
                drift = std::max(drift, (rg.r2[idx] - phase_left(t.weight(a) * std::arg(g[s]), r0.r2[idx])).abs());
            }
    }
    EXPECT_LE(drift, 1e-12);
}

TEST(Residual4D, UnitSpinorAndLinearMap) {
    Field4 f;
    f.grid.N = {4, 4, 4, 4};
    f.grid.h = {0.5, 0.5, 0.5, 0.5};
    f.target = Target(1);
    for (auto& a : f.a) a.assign(256, 0.0);
    f.u.assign(256, Quaternion::one());
    Residual4 r = residual_4d(f);
    for (int s = 0; s < 256; ++s) {
        EXPECT_LT((r.curvature[s] - ImQuaternion(-0.5, 0, 0)).norm(), 1e-15);
        EXPECT_EQ(r.dirac[s].norm2(), 0.0);
    }
    // u(x) = x0 + x1 i + x2 j + x3 k: D0 u - I1 D1 u - I2 D2 u - I3 D3 u = 1 - 1 - 1 - 1
    for (int s = 0; s < 256; ++s) {
        const auto c = f.grid.coords(s);
        f.u[s] = 0.5 * Quaternion(c[0], c[1], c[2], c[3]);
    }
    r = residual_4d(f);
    for (int s = 0; s < 256; ++s) {
        const auto c = f.grid.coords(s);
        if (c[0] < 3 && c[1] < 3 && c[2] < 3 && c[3] < 3) {
            EXPECT_LT(max_abs_diff(r.dirac[s], Quaternion(-2)), 1e-14);
        }
    }
}

TEST(Reduction, RandomDegreeZeroConfigurations) {
    Rng r(3);
    for (int k = 0; k < 10; ++k) {
        TorusLattice L(12, 12, 1.0, 1.3);
        const Configuration q = random_configuration(L, 0, Target(k % 2 ? 2 : 1), r, 0.8, k % 3 == 0);
        EXPECT_LE(reduction_consistency(q), 1e-10);
    }
}

TEST(Reduction, ZeroHiggsGivesEmbeddedDelA) {
    Rng r(4);
    TorusLattice L(8, 8, 1, 1);
    Configuration q = random_configuration(L, 0, Target(1), r);
    std::fill(q.phi.begin(), q.phi.end(), cplx{});
    const Field4 f = lift_to_4d(q);
    const Residual4 r4 = residual_4d(f);
    const SpinorField d = del_a(q);
    for (int s = 0; s < f.grid.size(); ++s) {
        const auto c = f.grid.coords(s);
        EXPECT_LT((r4.dirac[s] - d[L.site(c[0], c[1])]).abs(), 1e-12);
    }
}

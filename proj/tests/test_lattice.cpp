#include <gtest/gtest.h>

#include <numbers>

#include "swlab/sampling.hpp"

using namespace swlab;

namespace {
constexpr double pi = std::numbers::pi;

double flat_dot(const RealField& a, const RealField& b) {
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}
}  // namespace

TEST(Curvature, BackgroundFlux) {
    TorusLattice L(8, 6, 1.0, 1.0);
    Configuration q0(L, 0, Target(1));
    for (double F : curvature(q0)) EXPECT_EQ(F, 0.0);
    Configuration q3(L, 3, Target(1));
    const RealField F = curvature(q3);
    for (double f : F) EXPECT_NEAR(f, F[0], 1e-10);
    EXPECT_NEAR(total_flux(q3), -6 * pi, 1e-11);
}

TEST(Curvature, FluxIsTopological) {
    Rng r(1);
    for (int d = -3; d <= 3; ++d) {
        TorusLattice L(10, 7, 2.0, 1.5);
        const Configuration q = random_configuration(L, d, Target(1), r);
        EXPECT_NEAR(total_flux(q), -2 * pi * d, 1e-10);
    }
}

TEST(GaugeTransform, TrivialAndConstant) {
    Rng r(2);
    TorusLattice L(8, 8, 1, 1);
    const Configuration q = random_configuration(L, 1, Target(1), r);
    const Configuration q1 = gauge_transform(ComplexField(64, cplx(1, 0)), q);
    EXPECT_EQ(max_abs(q1.ax, q.ax), 0.0);
    EXPECT_EQ(max_abs(q1.u, q.u), 0.0);
    const Configuration q2 = gauge_transform(ComplexField(64, std::polar(1.0, 0.8)), q);
    EXPECT_EQ(max_abs(q2.ax, q.ax), 0.0);
    EXPECT_EQ(max_abs(q2.ay, q.ay), 0.0);
    EXPECT_LT((q2.uc(5, 0) - phase_left(0.8, q.uc(5, 0))).abs(), 1e-15);
}

TEST(GaugeTransform, PlaneWaveShiftsLinksExactly) {
    Rng r(3);
    TorusLattice L(12, 9, 1.3, 0.7);
    const Configuration q = random_configuration(L, 2, Target(1), r);
    const int m = 2;
    ComplexField g(static_cast<std::size_t>(L.size()));
    for (int s = 0; s < L.size(); ++s) g[s] = std::polar(1.0, 2 * pi * m * L.ix(s) / L.Nx);
    const Configuration qg = gauge_transform(g, q);
    for (int s = 0; s < L.size(); ++s) {
        EXPECT_NEAR(qg.ax[s], q.ax[s] - (2 * pi * m / L.Nx) / L.hx(), 1e-12);
        EXPECT_NEAR(qg.ay[s], q.ay[s], 1e-12);
    }
    EXPECT_LT(max_abs(curvature(qg), curvature(q)), 1e-12 * 100);
}

TEST(GaugeTransform, CurvatureAndCovariance) {
    Rng r(4);
    TorusLattice L(10, 12, 1, 2);
    const Target t(2, {1, -2});
    for (int d : {-1, 0, 2}) {
        const Configuration q = random_configuration(L, d, t, r);
        const ComplexField g = random_gauge(L, r);
        const Configuration qg = gauge_transform(g, q);
        EXPECT_LT(max_abs(curvature(qg), curvature(q)), 1e-10);
        const auto D = covariant_derivative(q), Dg = covariant_derivative(qg);
        for (int s = 0; s < L.size(); ++s)
            for (int a = 0; a < 2; ++a) {
                const double th = t.weight(a) * std::arg(g[s]);
                const std::size_t k = static_cast<std::size_t>(s) * 2 + a;
                EXPECT_LT((Dg.x[k] - phase_left(th, D.x[k])).abs(), 1e-12 * 10 * (1 + D.x[k].abs()));
                EXPECT_LT((Dg.y[k] - phase_left(th, D.y[k])).abs(), 1e-12 * 10 * (1 + D.y[k].abs()));
            }
    }
}

TEST(CovariantDerivative, ConstantSpinorAndPlaneWave) {
    TorusLattice L(16, 16, 1, 1);
    Configuration q(L, 0, Target(1));
    for (auto& h : q.u) h = Quaternion::one();
    for (const auto& v : del_a(q)) EXPECT_EQ(v.norm2(), 0.0);

    for (int N : {16, 32, 64}) {
        TorusLattice LN(N, N, 2.0, 1.0);
        ComplexField f(static_cast<std::size_t>(LN.size()));
        for (int s = 0; s < LN.size(); ++s) f[s] = std::polar(1.0, 2 * pi * LN.ix(s) * LN.hx() / LN.Lx);
        const ComplexField df = dbar_z(LN, f);
        double err = 0;
        for (int s = 0; s < LN.size(); ++s) err = std::max(err, std::abs(df[s] - cplx(0, 2 * pi / LN.Lx) * f[s]));
        EXPECT_LT(err, 2 * pi * pi / (LN.Lx * LN.Lx) * LN.hx() * 1.01);
    }
}

TEST(CovariantDerivative, ProjectionsAreComplementaryIdempotents) {
    Rng r(5);
    TorusLattice L(6, 6, 1, 1);
    const Configuration q = random_configuration(L, 1, Target(1), r);
    const auto D = covariant_derivative(q);
    const auto P = project_10(D), Q = project_01(D);
    const auto PP = project_10(P), PQ = project_10(Q);
    for (std::size_t k = 0; k < D.x.size(); ++k) {
        EXPECT_LT((P.x[k] + Q.x[k] - D.x[k]).abs(), 1e-13);
        EXPECT_LT((P.y[k] + Q.y[k] - D.y[k]).abs(), 1e-13);
        EXPECT_LT((PP.x[k] - P.x[k]).abs(), 1e-13);
        EXPECT_LT(PQ.x[k].abs() + PQ.y[k].abs(), 1e-13);
        // del_a u is twice the dx-component of the (1,0) part
        EXPECT_LT((2.0 * P.x[k] - (D.x[k] - apply_I(1, D.y[k]))).abs(), 1e-13);
    }
}

TEST(Hodge, SquaresToMinusOneAndIsometry) {
    Rng r(6);
    TorusLattice L(12, 8, 1.5, 1);
    OneForm a(96), b(96);
    for (int s = 0; s < 96; ++s) {
        a.x[s] = r.normal(); a.y[s] = r.normal();
        b.x[s] = r.normal(); b.y[s] = r.normal();
    }
    const OneForm sa = hodge_star(L, a), ssa = hodge_star(L, sa), sb = hodge_star(L, b);
    EXPECT_LT(max_abs(ssa.x, RealField(96)) , 100.0);
    for (int s = 0; s < 96; ++s) {
        EXPECT_NEAR(ssa.x[s], -a.x[s], 1e-12);
        EXPECT_NEAR(ssa.y[s], -a.y[s], 1e-12);
    }
    EXPECT_NEAR(inner_1(L, sa, sb), inner_1(L, a, b), 1e-12);
    EXPECT_NEAR(inner_1(L, sa, b), -inner_1(L, a, sb), 1e-12);
    const OneForm la = hodge_star_local(a), lla = hodge_star_local(la);
    for (int s = 0; s < 96; ++s) EXPECT_EQ(lla.x[s], -a.x[s]);
}

TEST(Hodge, ConstantFormsAndTypes) {
    TorusLattice L(8, 8, 1, 1);
    OneForm dx(64), dy(64);
    for (int s = 0; s < 64; ++s) { dx.x[s] = 1; dy.y[s] = 1; }
    const OneForm sdx = hodge_star(L, dx), sdy = hodge_star(L, dy);
    for (int s = 0; s < 64; ++s) {
        EXPECT_NEAR(sdx.x[s], 0, 1e-14); EXPECT_NEAR(sdx.y[s], 1, 1e-14);
        EXPECT_NEAR(sdy.x[s], -1, 1e-14); EXPECT_NEAR(sdy.y[s], 0, 1e-14);
    }
    // a form with only a (1,0) part: P = (v + i*v)/2 satisfies *P = -i P (real and imaginary parts)
    Rng r(8);
    OneForm re(64), im(64);
    for (int s = 0; s < 64; ++s) { re.x[s] = r.normal(); re.y[s] = r.normal(); im.x[s] = r.normal(); im.y[s] = r.normal(); }
    const OneForm sre = hodge_star(L, re), sim = hodge_star(L, im);
    OneForm Pre(64), Pim(64);
    for (int s = 0; s < 64; ++s) {
        Pre.x[s] = 0.5 * (re.x[s] - sim.x[s]); Pre.y[s] = 0.5 * (re.y[s] - sim.y[s]);
        Pim.x[s] = 0.5 * (im.x[s] + sre.x[s]); Pim.y[s] = 0.5 * (im.y[s] + sre.y[s]);
    }
    const OneForm sPre = hodge_star(L, Pre), sPim = hodge_star(L, Pim);
    for (int s = 0; s < 64; ++s) {
        EXPECT_NEAR(sPre.x[s], Pim.x[s], 1e-12);
        EXPECT_NEAR(sPim.x[s], -Pre.x[s], 1e-12);
    }
    // conformal factor does not enter the star on 1-forms
    TorusLattice L2 = L;
    for (auto& c : L2.conformal) c = 2.0;
    const OneForm s2 = hodge_star(L2, re);
    EXPECT_EQ(max_abs(s2.x, sre.x), 0.0);
}

TEST(Hodge, SummationByParts) {
    Rng r(9);
    TorusLattice L(10, 14, 1.2, 0.8);
    for (auto& c : L.conformal) c = 1 + 0.3 * r.uni();
    const int N = L.size();
    RealField f(N);
    OneForm v(N);
    for (int s = 0; s < N; ++s) { f[s] = r.normal(); v.x[s] = r.normal(); v.y[s] = r.normal(); }
    const OneForm g = grad(L, f);
    EXPECT_NEAR(inner_1(L, g, v), -L.cell() * flat_dot(f, div(L, v)), 1e-11);
    EXPECT_NEAR(inner_1(L, hodge_star(L, g), v), -L.cell() * flat_dot(f, curl(L, v)), 1e-11);
    for (double c : curl(L, grad(L, f))) EXPECT_NEAR(c, 0, 1e-10);
}

TEST(InnerProduct, ConstantsOnUnitTorus) {
    TorusLattice L(8, 8, 1, 1);
    EXPECT_NEAR(inner_0(L, RealField(64, 1.0), RealField(64, 1.0)), 1.0, 1e-14);
    EXPECT_NEAR(L.area(), 1.0, 1e-14);
}

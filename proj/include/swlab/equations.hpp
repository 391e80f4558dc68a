#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "configuration.hpp"

namespace swlab {

// X_Phi(u) = I2 K_{beta1} u + I3 K_{beta2} u, the d/dx-component of the (1,0)-form
inline Quaternion higgs_vector(double w, cplx phi, const Quaternion& u) {
    const Quaternion wiu = w * (Quaternion::I() * u);
    return -(wiu * Quaternion(0, 0, phi.real(), phi.imag()));
}

inline SpinorField higgs_vector_field(const Configuration& q) {
    SpinorField X(q.u.size());
    for (int s = 0; s < q.sites(); ++s)
        for (int a = 0; a < q.n(); ++a)
            X[static_cast<std::size_t>(s) * q.n() + a] = higgs_vector(q.target.weight(a), q.phi[s], q.uc(s, a));
    return X;
}

struct ResidualTriple {
    RealField r1;     // eps *F - mu_1(u) + tau
    SpinorField r2;   // del_a u - X_Phi(u)
    ComplexField r3;  // eps *dbar Phi - mu_c(u)
};

inline ResidualTriple residual_2d(const Configuration& q) {
    const auto& L = q.lat;
    const auto N = static_cast<std::size_t>(L.size());
    ResidualTriple r{RealField(N), SpinorField(q.u.size()), ComplexField(N)};
    const RealField F = curvature(q);
    const ComplexField dphi = dbar_z(L, q.phi);
    for (int s = 0; s < L.size(); ++s) {
        const ImQuaternion mu = moment_map(q.target, q.at(s));
        r.r1[s] = q.epsilon * F[s] / L.c2(s) - mu.x + q.tau;
        r.r3[s] = q.epsilon * dphi[s] / L.c2(s) - cplx(mu.y, mu.z);
        for (int a = 0; a < q.n(); ++a) {
            const double w = q.target.weight(a);
            r.r2[static_cast<std::size_t>(s) * q.n() + a] =
                cov_dx(q, s, a) - apply_I(1, cov_dy(q, s, a)) - higgs_vector(w, q.phi[s], q.uc(s, a));
        }
    }
    return r;
}

struct ResidualNorms {
    double r1 = 0, r2 = 0, r3 = 0;
    double total() const { return std::sqrt(r1 * r1 + r2 * r2 + r3 * r3); }
};

// L^2 norms: functions with c^2 dx dy, the (1,0)-form component with dx dy
inline ResidualNorms residual_norms(const TorusLattice& L, int n, const ResidualTriple& r) {
    ResidualNorms m;
    const auto N = static_cast<std::size_t>(L.size());
    m.r1 = std::sqrt(L.cell() * pairwise_sum(N, [&](std::size_t s) { return r.r1[s] * r.r1[s] * L.c2(static_cast<int>(s)); }));
    m.r2 = std::sqrt(L.cell() * pairwise_sum(N, [&](std::size_t s) {
                         double t = 0;
                         for (int a = 0; a < n; ++a) t += r.r2[s * n + a].norm2();
                         return t;
                     }));
    m.r3 = std::sqrt(L.cell() * pairwise_sum(N, [&](std::size_t s) { return std::norm(r.r3[s]) * L.c2(static_cast<int>(s)); }));
    return m;
}

inline double energy(const Configuration& q) {
    const ResidualNorms m = residual_norms(q.lat, q.n(), residual_2d(q));
    return 0.5 * (m.r1 * m.r1 + m.r2 * m.r2 + m.r3 * m.r3);
}

// ---------------------------------------------------------------- four dimensions

// Periodic 4D grid, trivial bundle; links a[mu] carry Lie coefficients per unit length.
struct Grid4 {
    std::array<int, 4> N{4, 4, 2, 2};
    std::array<double, 4> h{1, 1, 1, 1};

    int size() const { return N[0] * N[1] * N[2] * N[3]; }
    int site(std::array<int, 4> c) const {
        int s = 0;
        for (int m = 3; m >= 0; --m) s = s * N[m] + ((c[m] % N[m]) + N[m]) % N[m];
        return s;
    }
    std::array<int, 4> coords(int s) const {
        std::array<int, 4> c{};
        for (int m = 0; m < 4; ++m) {
            c[m] = s % N[m];
            s /= N[m];
        }
        return c;
    }
    int shift(int s, int mu) const {
        auto c = coords(s);
        c[mu] += 1;
        return site(c);
    }
};

struct Field4 {
    Grid4 grid;
    Target target;
    std::array<RealField, 4> a;
    SpinorField u;
    Quaternion& uc(int s, int k) { return u[static_cast<std::size_t>(s) * target.n + k]; }
    const Quaternion& uc(int s, int k) const { return u[static_cast<std::size_t>(s) * target.n + k]; }
};

struct Residual4 {
    std::vector<ImQuaternion> curvature;  // (F01+F23, F02+F31, F03+F12) - mu
    SpinorField dirac;                    // D0 u - I1 D1 u - I2 D2 u - I3 D3 u
};

inline Residual4 residual_4d(const Field4& f) {
    const Grid4& G = f.grid;
    const int n = f.target.n;
    Residual4 r{std::vector<ImQuaternion>(static_cast<std::size_t>(G.size())), SpinorField(f.u.size())};
    auto theta = [&](int mu, int s) { return G.h[mu] * f.a[mu][s]; };
    auto F = [&](int mu, int nu, int s) {
        return ((theta(mu, s) - theta(mu, G.shift(s, nu))) + (theta(nu, G.shift(s, mu)) - theta(nu, s))) / (G.h[mu] * G.h[nu]);
    };
    for (int s = 0; s < G.size(); ++s) {
        const ImQuaternion mu = moment_map(f.target, std::span<const Quaternion>(f.u.data() + static_cast<std::size_t>(s) * n, n));
        r.curvature[s] = ImQuaternion(F(0, 1, s) + F(2, 3, s), F(0, 2, s) - F(1, 3, s), F(0, 3, s) + F(1, 2, s)) - mu;
        for (int k = 0; k < n; ++k) {
            const double w = f.target.weight(k);
            Quaternion D[4];
            for (int m = 0; m < 4; ++m) {
                const Quaternion& nb = f.uc(G.shift(s, m), k);
                D[m] = (phase_left_minus_one(w * theta(m, s), nb) + (nb - f.uc(s, k))) / G.h[m];
            }
            r.dirac[static_cast<std::size_t>(s) * n + k] = D[0] - apply_I(1, D[1]) - apply_I(2, D[2]) - apply_I(3, D[3]);
        }
    }
    return r;
}

// Constant extension of a degree-0 configuration along two tiny internal directions, with
// a_2 = beta_1 and a_3 = beta_2.
inline Field4 lift_to_4d(const Configuration& q, int n_internal = 2, double h_internal = 1e-12) {
    if (q.bundle.degree != 0) throw std::invalid_argument("dimensional lift needs the trivial bundle");
    Field4 f;
    f.grid.N = {q.lat.Nx, q.lat.Ny, n_internal, n_internal};
    f.grid.h = {q.lat.hx(), q.lat.hy(), h_internal, h_internal};
    f.target = q.target;
    const int M = f.grid.size();
    for (auto& a : f.a) a.assign(static_cast<std::size_t>(M), 0.0);
    f.u.assign(static_cast<std::size_t>(M) * q.n(), Quaternion{});
    for (int s = 0; s < M; ++s) {
        const auto c = f.grid.coords(s);
        const int t = q.lat.site(c[0], c[1]);
        f.a[0][s] = q.ax[t];
        f.a[1][s] = q.ay[t];
        f.a[2][s] = q.phi[t].real();
        f.a[3][s] = q.phi[t].imag();
        for (int k = 0; k < q.n(); ++k) f.uc(s, k) = q.uc(t, k);
    }
    return f;
}

// Largest discrepancy between the 4D equations of the lifted field and the 2D residual
// (flat metric, eps = 1, tau = 0 on the 2D side).
inline double reduction_consistency(const Configuration& q) {
    Configuration q2 = q;
    q2.epsilon = 1.0;
    q2.tau = 0.0;
    std::fill(q2.lat.conformal.begin(), q2.lat.conformal.end(), 1.0);
    const ResidualTriple r2 = residual_2d(q2);
    const Field4 f = lift_to_4d(q2);
    const Residual4 r4 = residual_4d(f);
    double defect = 0;
    for (int s = 0; s < f.grid.size(); ++s) {
        const auto c = f.grid.coords(s);
        const int t = q.lat.site(c[0], c[1]);
        const ImQuaternion d = r4.curvature[s] - ImQuaternion(r2.r1[t], r2.r3[t].real(), r2.r3[t].imag());
        defect = std::max(defect, d.norm());
        for (int k = 0; k < q.n(); ++k)
            defect = std::max(defect, (r4.dirac[static_cast<std::size_t>(s) * q.n() + k] - r2.r2[static_cast<std::size_t>(t) * q.n() + k]).abs());
    }
    return defect;
}

}  // namespace swlab

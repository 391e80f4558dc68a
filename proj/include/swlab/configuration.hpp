#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "lattice.hpp"
#include "target.hpp"

namespace swlab {

using SpinorField = std::vector<Quaternion>;  // site-major, n components per site

// A point (a, u, Phi) of configuration space. The connection is the degree-d background plus the
// periodic fluctuation (ax, ay) measured per unit length; Phi = phi dz - conj(phi) dzbar with
// phi = beta_1 + i beta_2.
struct Configuration {
    TorusLattice lat;
    BundleSpec bundle;
    Target target;
    RealField ax, ay;
    SpinorField u;
    ComplexField phi;
    double epsilon = 1.0;
    double tau = 0.0;  // the central shift is tau * i

    Configuration() = default;
    Configuration(TorusLattice L, int degree, Target t)
        : lat(std::move(L)), bundle{degree}, target(std::move(t)) {
        const auto N = static_cast<std::size_t>(lat.size());
        ax.assign(N, 0.0);
        ay.assign(N, 0.0);
        u.assign(N * static_cast<std::size_t>(target.n), Quaternion{});
        phi.assign(N, cplx{});
    }

    int n() const { return target.n; }
    int sites() const { return lat.size(); }
    std::span<const Quaternion> at(int s) const { return {u.data() + static_cast<std::size_t>(s) * n(), static_cast<std::size_t>(n())}; }
    Quaternion& uc(int s, int a) { return u[static_cast<std::size_t>(s) * n() + a]; }
    const Quaternion& uc(int s, int a) const { return u[static_cast<std::size_t>(s) * n() + a]; }

    double theta_x(int s) const { return bundle.background_theta_x(lat, lat.iy(s)) + lat.hx() * ax[s]; }
    double theta_y(int s) const { return lat.hy() * ay[s]; }
    // x-link phase of the plaquette's top edge, expressed in the chart of site s
    double theta_x_above(int s) const {
        const int t = lat.yp(s);
        return theta_x(t) + (lat.wraps_y(s) ? bundle.x_link_jump(lat) : 0.0);
    }
    // phase carried by the y-neighbour of s when it is pulled back across the wrap
    double y_cocycle(int s) const { return lat.wraps_y(s) ? bundle.cocycle(lat, lat.ix(s)) : 0.0; }

    void check_compatible(const Configuration& o) const {
        if (o.lat.Nx != lat.Nx || o.lat.Ny != lat.Ny || o.n() != n()) throw std::invalid_argument("mismatched lattice sizes");
    }
};

// curvature density F with F_a = i F dx^dy; plaquette identified with its lower-left site
inline RealField curvature(const Configuration& q) {
    const auto& L = q.lat;
    RealField F(static_cast<std::size_t>(L.size()));
    for (int s = 0; s < L.size(); ++s)
        F[s] = ((q.theta_x(s) - q.theta_x_above(s)) + (q.theta_y(L.xp(s)) - q.theta_y(s))) / L.cell();
    return F;
}

inline double total_flux(const Configuration& q) {
    const RealField F = curvature(q);
    return q.lat.cell() * pairwise_sum(F.size(), [&](std::size_t s) { return F[s]; });
}

// forward covariant differences of component a of the spinor at site s
inline Quaternion cov_dx(const Configuration& q, int s, int a) {
    const auto& L = q.lat;
    const double w = q.target.weight(a);
    const Quaternion& f = q.uc(L.xp(s), a);
    return (phase_left_minus_one(w * q.theta_x(s), f) + (f - q.uc(s, a))) / L.hx();
}
inline Quaternion cov_dy(const Configuration& q, int s, int a) {
    const auto& L = q.lat;
    const double w = q.target.weight(a);
    const Quaternion f = phase_left(w * q.y_cocycle(s), q.uc(L.yp(s), a));
    return (phase_left_minus_one(w * q.theta_y(s), f) + (f - q.uc(s, a))) / L.hy();
}

struct SpinorOneForm {
    SpinorField x, y;
};

inline SpinorOneForm covariant_derivative(const Configuration& q) {
    SpinorOneForm d{SpinorField(q.u.size()), SpinorField(q.u.size())};
    for (int s = 0; s < q.sites(); ++s)
        for (int a = 0; a < q.n(); ++a) {
            d.x[static_cast<std::size_t>(s) * q.n() + a] = cov_dx(q, s, a);
            d.y[static_cast<std::size_t>(s) * q.n() + a] = cov_dy(q, s, a);
        }
    return d;
}

// (1,0) part of a TM-valued 1-form: 1/2 (eta - I1 eta J)
inline SpinorOneForm project_10(const SpinorOneForm& e) {
    SpinorOneForm o{SpinorField(e.x.size()), SpinorField(e.x.size())};
    for (std::size_t k = 0; k < e.x.size(); ++k) {
        o.x[k] = 0.5 * (e.x[k] - apply_I(1, e.y[k]));
        o.y[k] = 0.5 * (e.y[k] + apply_I(1, e.x[k]));
    }
    return o;
}
inline SpinorOneForm project_01(const SpinorOneForm& e) {
    SpinorOneForm o{SpinorField(e.x.size()), SpinorField(e.x.size())};
    for (std::size_t k = 0; k < e.x.size(); ++k) {
        o.x[k] = 0.5 * (e.x[k] + apply_I(1, e.y[k]));
        o.y[k] = 0.5 * (e.y[k] - apply_I(1, e.x[k]));
    }
    return o;
}

// del_a u evaluated on d/dx: D_x u - I1 D_y u
inline SpinorField del_a(const Configuration& q) {
    SpinorField r(q.u.size());
    for (int s = 0; s < q.sites(); ++s)
        for (int a = 0; a < q.n(); ++a) r[static_cast<std::size_t>(s) * q.n() + a] = cov_dx(q, s, a) - apply_I(1, cov_dy(q, s, a));
    return r;
}
inline SpinorField dbar_a(const Configuration& q) {
    SpinorField r(q.u.size());
    for (int s = 0; s < q.sites(); ++s)
        for (int a = 0; a < q.n(); ++a) r[static_cast<std::size_t>(s) * q.n() + a] = cov_dx(q, s, a) + apply_I(1, cov_dy(q, s, a));
    return r;
}

// (a, u, Phi) -> (a + g^{-1} dg, g u, Phi); the link increment of g^{-1}dg is arg(conj(g(s)) g(s+e)),
// entering the link phase with a minus sign so that D(g u) = g D u.
inline Configuration gauge_transform(const ComplexField& g, const Configuration& q) {
    if (static_cast<int>(g.size()) != q.sites()) throw std::invalid_argument("gauge field size mismatch");
    Configuration r = q;
    const auto& L = q.lat;
    for (int s = 0; s < L.size(); ++s) {
        const double incx = std::arg(std::conj(g[s]) * g[L.xp(s)]);
        const double incy = std::arg(std::conj(g[s]) * g[L.yp(s)]);
        r.ax[s] -= incx / L.hx();
        r.ay[s] -= incy / L.hy();
        const double th = std::arg(g[s]);
        for (int a = 0; a < q.n(); ++a) r.uc(s, a) = phase_left(q.target.weight(a) * th, q.uc(s, a));
    }
    return r;
}

}  // namespace swlab

#pragma once

#include <random>

#include "linearization.hpp"

namespace swlab {

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uni(double a = -1, double b = 1) { return std::uniform_real_distribution<double>(a, b)(gen); }
    double normal() { return std::normal_distribution<double>(0, 1)(gen); }
    Quaternion quat(double s = 1) { return {s * normal(), s * normal(), s * normal(), s * normal()}; }
    ImQuaternion imq() { return {normal(), normal(), normal()}; }
    ImQuaternion unit_imq() {
        ImQuaternion x = imq();
        return (1.0 / x.norm()) * x;
    }
    TargetPoint point(int n, double s = 1) {
        TargetPoint p(static_cast<std::size_t>(n));
        for (auto& h : p) h = quat(s);
        return p;
    }
};

// smooth random periodic real field: a few low Fourier modes
inline RealField smooth_field(const TorusLattice& L, Rng& r, double amp, int modes = 2) {
    RealField f(static_cast<std::size_t>(L.size()), 0.0);
    for (int mx = -modes; mx <= modes; ++mx)
        for (int my = -modes; my <= modes; ++my) {
            const double c = amp * r.normal() / (1 + mx * mx + my * my), ph = r.uni(0, 6.283185307179586);
            for (int s = 0; s < L.size(); ++s)
                f[s] += c * std::cos(6.283185307179586 * (mx * L.ix(s) / double(L.Nx) + my * L.iy(s) / double(L.Ny)) + ph);
        }
    return f;
}

inline Configuration random_configuration(const TorusLattice& L, int degree, const Target& t, Rng& r, double amp = 0.5,
                                          bool smooth = false) {
    Configuration q(L, degree, t);
    for (int s = 0; s < L.size(); ++s) {
        q.ax[s] = amp * r.normal();
        q.ay[s] = amp * r.normal();
        q.phi[s] = cplx(amp * r.normal(), amp * r.normal());
        for (int a = 0; a < t.n; ++a) q.uc(s, a) = r.quat(amp);
    }
    if (smooth) {
        q.ax = smooth_field(L, r, amp);
        q.ay = smooth_field(L, r, amp);
        const RealField p1 = smooth_field(L, r, amp), p2 = smooth_field(L, r, amp);
        for (int s = 0; s < L.size(); ++s) q.phi[s] = cplx(p1[s], p2[s]);
        for (int a = 0; a < t.n; ++a)
            for (int c = 0; c < 4; ++c) {
                const RealField f = smooth_field(L, r, amp);
                for (int s = 0; s < L.size(); ++s) q.uc(s, a)[c] = f[s];
            }
    }
    return q;
}

// random gauge transformation with bounded link increments
inline ComplexField random_gauge(const TorusLattice& L, Rng& r, double spread = 0.7) {
    ComplexField g(static_cast<std::size_t>(L.size()));
    const RealField chi = smooth_field(L, r, spread);
    for (int s = 0; s < L.size(); ++s) g[s] = std::polar(1.0, chi[s]);
    return g;
}

inline TangentTriple random_tangent(const Configuration& q, Rng& r, double amp = 1.0) {
    TangentTriple X = zero_tangent(q);
    for (int s = 0; s < q.sites(); ++s) {
        X.alpha.x[s] = amp * r.normal();
        X.alpha.y[s] = amp * r.normal();
        X.eta[s] = cplx(amp * r.normal(), amp * r.normal());
    }
    for (auto& v : X.xi) v = r.quat(amp);
    return X;
}

inline RealField random_function(const TorusLattice& L, Rng& r, double amp = 1.0) {
    RealField f(static_cast<std::size_t>(L.size()));
    for (auto& v : f) v = amp * r.normal();
    return f;
}

inline double max_abs(const RealField& a, const RealField& b) {
    double m = 0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}
inline double max_abs(const ComplexField& a, const ComplexField& b) {
    double m = 0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}
inline double max_abs(const SpinorField& a, const SpinorField& b) {
    double m = 0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, (a[k] - b[k]).abs());
    return m;
}

}  // namespace swlab

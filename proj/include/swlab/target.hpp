#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "quaternion.hpp"

namespace swlab {

using TargetPoint = std::vector<Quaternion>;
using TargetTangent = std::vector<Quaternion>;
using QSpan = std::span<const Quaternion>;

// Flat hyperKähler target H^n with U(1) acting by left multiplication by e^{i w_a t} on factor a.
struct Target {
    int n = 1;
    std::vector<int> weights{1};

    Target() = default;
    explicit Target(int n_) : n(n_), weights(static_cast<std::size_t>(n_), 1) {
        if (n_ < 1) throw std::invalid_argument("target dimension n must be >= 1");
    }
    Target(int n_, std::vector<int> w) : n(n_), weights(std::move(w)) {
        if (n_ < 1 || static_cast<int>(weights.size()) != n_)
            throw std::invalid_argument("target weights must have n entries");
    }
    double weight(int a) const { return static_cast<double>(weights[static_cast<std::size_t>(a)]); }
};

// I_xi v = xi_1 (v conj(i)) + xi_2 (v conj(j)) + xi_3 (v conj(k)) = -v xi
inline Quaternion complex_structure(const ImQuaternion& xi, const Quaternion& v) { return -(v * xi.q()); }

inline Quaternion apply_I(int l, const Quaternion& v) {
    switch (l) {
        case 1: return -(v * Quaternion::I());
        case 2: return -(v * Quaternion::J());
        case 3: return -(v * Quaternion::K());
        default: throw std::invalid_argument("complex structure index must be 1, 2 or 3");
    }
}

inline TargetTangent apply_complex_structure(const ImQuaternion& xi, QSpan v) {
    TargetTangent out(v.size());
    for (std::size_t a = 0; a < v.size(); ++a) out[a] = complex_structure(xi, v[a]);
    return out;
}

inline double metric(QSpan v, QSpan w) {
    double s = 0;
    for (std::size_t a = 0; a < v.size(); ++a) s += real_dot(v[a], w[a]);
    return s;
}

// mu(h) = sum_a w_a * (1/2) conj(h_a) i h_a
inline ImQuaternion moment_map(const Target& t, QSpan p) {
    Quaternion s;
    for (int a = 0; a < t.n; ++a) s += (0.5 * t.weight(a)) * (p[a].conj() * Quaternion::I() * p[a]);
    return ImQuaternion::from(s);
}

// derivative of mu at p along v: sum_a w_a Im(conj(h_a) i v_a)
inline ImQuaternion moment_map_derivative(const Target& t, QSpan p, QSpan v) {
    Quaternion s;
    for (int a = 0; a < t.n; ++a) s += t.weight(a) * (p[a].conj() * Quaternion::I() * v[a]);
    return ImQuaternion::from(s);
}

// K_eta at p for the Lie element eta*i
inline TargetTangent fundamental_vector_field(const Target& t, double eta, QSpan p) {
    TargetTangent out(p.size());
    for (int a = 0; a < t.n; ++a) out[a] = (t.weight(a) * eta) * (Quaternion::I() * p[a]);
    return out;
}

inline TargetPoint act(const Target& t, double theta, QSpan p) {
    TargetPoint out(p.size());
    for (int a = 0; a < t.n; ++a) out[a] = phase_left(t.weight(a) * theta, p[a]);
    return out;
}

inline double hyperkahler_potential(QSpan p) {
    double s = 0;
    for (const auto& h : p) s += h.norm2();
    return 0.5 * s;
}

struct MomentAxiomDefects {
    double axiom1 = 0;
    double axiom2 = 0;
};

inline MomentAxiomDefects check_moment_axioms(const Target& t, QSpan p, const ImQuaternion& xi, double eta, QSpan v,
                                              double step) {
    if (!(step > 0 && step <= 1e-3)) throw std::invalid_argument("step must lie in (0, 1e-3]");
    TargetPoint pp(p.begin(), p.end()), pm(p.begin(), p.end());
    for (int a = 0; a < t.n; ++a) {
        pp[a] += step * v[a];
        pm[a] -= step * v[a];
    }
    const ImQuaternion dmu = (1.0 / (2.0 * step)) * (moment_map(t, pp) - moment_map(t, pm));
    const double lhs = eta * (dmu.x * xi.x + dmu.y * xi.y + dmu.z * xi.z);
    const auto K = fundamental_vector_field(t, eta, p);
    const auto IK = apply_complex_structure(xi, K);
    MomentAxiomDefects d;
    d.axiom1 = std::abs(lhs - metric(IK, v));
    const ImQuaternion m0 = moment_map(t, p), m1 = moment_map(t, act(t, eta, p));
    d.axiom2 = (m1 - m0).norm();
    return d;
}

// Levi form of rho w.r.t. I_l by central second differences:
//   L(v,w) = 1/4 [ D^2 rho(I v, w) - D^2 rho(v, I w) ]
// which evaluates d_z d_zbar rho on the complex line spanned by v for a one-variable chart.
inline double levi_form_fd(const std::function<double(QSpan)>& rho, QSpan p, int l, QSpan v, QSpan w, double h) {
    const std::size_t n = p.size();
    auto hess = [&](QSpan a, QSpan b) {
        TargetPoint x(n);
        auto eval = [&](double sa, double sb) {
            for (std::size_t k = 0; k < n; ++k) x[k] = p[k] + (sa * h) * a[k] + (sb * h) * b[k];
            return rho(x);
        };
        return (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * h * h);
    };
    TargetTangent Iv(n), Iw(n);
    for (std::size_t k = 0; k < n; ++k) {
        Iv[k] = apply_I(l, v[k]);
        Iw[k] = apply_I(l, w[k]);
    }
    return 0.25 * (hess(Iv, w) - hess(v, Iw));
}

}  // namespace swlab

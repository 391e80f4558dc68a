#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "linearization.hpp"

namespace swlab {

// The Higgs variation eta is handled as the real 1-form (Re eta) dx + (Im eta) dy.
inline OneForm eta_as_form(const ComplexField& eta) {
    OneForm e(eta.size());
    for (std::size_t s = 0; s < eta.size(); ++s) {
        e.x[s] = eta[s].real();
        e.y[s] = eta[s].imag();
    }
    return e;
}
inline ComplexField form_as_eta(const OneForm& e) {
    ComplexField eta(e.x.size());
    for (std::size_t s = 0; s < eta.size(); ++s) eta[s] = cplx(e.x[s], e.y[s]);
    return eta;
}

inline double config_metric(const Configuration& q, const TangentTriple& X, const TangentTriple& Y) {
    return tangent_inner(q, X, Y);
}

namespace detail {
inline OneForm scaled(const OneForm& v, double c) {
    OneForm o(v.x.size());
    for (std::size_t s = 0; s < v.x.size(); ++s) {
        o.x[s] = c * v.x[s];
        o.y[s] = c * v.y[s];
    }
    return o;
}
}  // namespace detail

//  I1 = (*alpha, -I1 xi, -*eta)
//  I2 = (*eta, -I2 xi, *alpha)
//  I3 = (-eta, I3 xi, alpha)
inline TangentTriple apply_config_structure(const Configuration& q, int sel, const TangentTriple& X) {
    const auto& L = q.lat;
    const OneForm e = eta_as_form(X.eta);
    TangentTriple Y;
    Y.xi.resize(X.xi.size());
    switch (sel) {
        case 1:
            Y.alpha = hodge_star(L, X.alpha);
            Y.eta = form_as_eta(detail::scaled(hodge_star(L, e), -1.0));
            for (std::size_t k = 0; k < X.xi.size(); ++k) Y.xi[k] = -apply_I(1, X.xi[k]);
            break;
        case 2:
            Y.alpha = hodge_star(L, e);
            Y.eta = form_as_eta(hodge_star(L, X.alpha));
            for (std::size_t k = 0; k < X.xi.size(); ++k) Y.xi[k] = -apply_I(2, X.xi[k]);
            break;
        case 3:
            Y.alpha = detail::scaled(e, -1.0);
            Y.eta = form_as_eta(X.alpha);
            for (std::size_t k = 0; k < X.xi.size(); ++k) Y.xi[k] = apply_I(3, X.xi[k]);
            break;
        default: throw std::invalid_argument("structure selector must be 1, 2 or 3");
    }
    return Y;
}

inline double config_omega(const Configuration& q, int sel, const TangentTriple& X, const TangentTriple& Y) {
    return config_metric(q, apply_config_structure(q, sel, X), Y);
}

// holomorphic derivative d_z phi = d_x phi - i d_y phi, written as div e + i curl e for e = (Re phi, Im phi)
inline ComplexField del_z(const TorusLattice& L, const ComplexField& phi) {
    const OneForm e = eta_as_form(phi);
    const RealField d = div(L, e), c = curl(L, e);
    ComplexField o(phi.size());
    for (std::size_t s = 0; s < o.size(); ++s) o[s] = cplx(d[s], c[s]);
    return o;
}

struct ConfigMomentValues {
    double mu_I = 0;
    cplx mu_c;
};

// <mu_I, gamma> = 1/2 int gamma (F - mu_1(u)) dvol
// <mu_c, gamma> = 1/2 int gamma conj(-i d_z phi - mu_c(u)) dvol, Hermitian in the complex slot
inline ConfigMomentValues config_moment_maps(const Configuration& q, const RealField& gamma) {
    const auto& L = q.lat;
    const RealField F = curvature(q);
    const ComplexField dz = del_z(L, q.phi);
    const cplx I(0, 1);
    ConfigMomentValues v;
    const auto N = static_cast<std::size_t>(L.size());
    v.mu_I = 0.5 * L.cell() * pairwise_sum(N, [&](std::size_t s) {
                 return gamma[s] * (F[s] - moment_map(q.target, q.at(static_cast<int>(s))).x * L.c2(static_cast<int>(s)));
             });
    auto term = [&](std::size_t s) {
        const ImQuaternion m = moment_map(q.target, q.at(static_cast<int>(s)));
        return gamma[s] * std::conj(-I * dz[s] - cplx(m.y, m.z) * L.c2(static_cast<int>(s)));
    };
    const double re = pairwise_sum(N, [&](std::size_t s) { return term(s).real(); });
    const double im = pairwise_sum(N, [&](std::size_t s) { return term(s).imag(); });
    v.mu_c = 0.5 * L.cell() * cplx(re, im);
    return v;
}

inline Configuration displaced(const Configuration& q, const TangentTriple& X, double t) {
    Configuration r = q;
    for (int s = 0; s < q.sites(); ++s) {
        r.ax[s] += t * X.alpha.x[s];
        r.ay[s] += t * X.alpha.y[s];
        r.phi[s] += t * X.eta[s];
    }
    for (std::size_t k = 0; k < q.u.size(); ++k) r.u[k] += t * X.xi[k];
    return r;
}

struct HamiltonianDefects {
    double real_part = 0;     // mu_I against Omega_1
    double complex_part = 0;  // mu_c against Omega_2 + i Omega_3
};

inline HamiltonianDefects verify_hamiltonian_identity(const Configuration& q, const RealField& gamma, const TangentTriple& X,
                                                      double step) {
    if (!(step > 0 && step <= 1e-3)) throw std::invalid_argument("step must lie in (0, 1e-3]");
    const ConfigMomentValues p = config_moment_maps(displaced(q, X, step), gamma);
    const ConfigMomentValues m = config_moment_maps(displaced(q, X, -step), gamma);
    const double dI = (p.mu_I - m.mu_I) / (2 * step);
    const cplx dc = (p.mu_c - m.mu_c) / (2 * step);
    const TangentTriple K = d1(q, gamma);
    const cplx omega_c(config_omega(q, 2, K, X), config_omega(q, 3, K, X));
    return {std::abs(dI - config_omega(q, 1, K, X)), std::abs(dc - omega_c)};
}

// ---------------------------------------------------------------- invariance of the solution tangent space

struct SubspaceReport {
    double defect = 0;
    int kernel_dim = 0;
    double sigma_zero = 0;  // largest singular value counted as zero
    double sigma_next = 0;  // smallest singular value counted as nonzero
};

inline Eigen::MatrixXd dense_rows_23(const Configuration& q) {
    const Layout Lo = layout_of(q);
    const Eigen::MatrixXd J = Eigen::MatrixXd(jacobian(q));
    const Vec wr = residual_weights(q).cwiseSqrt(), wt = tangent_weights(q).cwiseSqrt().cwiseInverse();
    const int keep = Lo.R() - 1;
    Eigen::MatrixXd A(Lo.N * keep, Lo.dofs());
    for (int s = 0; s < Lo.N; ++s)
        for (int k = 0; k < keep; ++k) A.row(s * keep + k) = wr[Lo.r1(s) + 1 + k] * J.row(Lo.r1(s) + 1 + k);
    return A * wt.asDiagonal();
}

// Largest component of I1 v outside ker(rows 2-3 of D_q), over an orthonormal kernel basis.
inline SubspaceReport check_Cprime_invariance(const Configuration& q, double zero_rel = 1e-8, double gap_min = 1e3) {
    const Layout Lo = layout_of(q);
    const Eigen::MatrixXd A = dense_rows_23(q);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const Vec& sv = svd.singularValues();
    const int m = static_cast<int>(sv.size()), ncol = Lo.dofs();
    const double smax = sv.size() ? sv[0] : 0.0;
    int rank = 0;
    while (rank < m && sv[rank] > zero_rel * smax) ++rank;
    SubspaceReport rep;
    rep.kernel_dim = ncol - rank;
    rep.sigma_next = rank > 0 ? sv[rank - 1] : 0.0;
    rep.sigma_zero = rank < m ? sv[rank] : 0.0;
    if (rep.sigma_zero > 0 && rep.sigma_next / rep.sigma_zero < gap_min)
        throw std::runtime_error("ambiguous numerical rank: sigma " + std::to_string(rep.sigma_next) + " vs " +
                                 std::to_string(rep.sigma_zero));
    const Eigen::MatrixXd V = svd.matrixV().rightCols(rep.kernel_dim);
    // the structure commutes with the block-constant weights, so it acts identically in scaled coordinates
    for (int k = 0; k < rep.kernel_dim; ++k) {
        const Vec v = V.col(k);
        const Vec Iv = pack(Lo, apply_config_structure(q, 1, unpack_tangent(Lo, v)));
        const Vec perp = Iv - V * (V.transpose() * Iv);
        rep.defect = std::max(rep.defect, perp.norm());
    }
    return rep;
}

struct LemmaIdentityDefects {
    double lie = 0;     // (L_u *alpha)^{1,0} + I1 (L_u alpha)^{1,0}
    double higgs = 0;   // X_{-i eta} + I1 X_eta
    double moment = 0;  // dmu_c(-I1 xi) + i dmu_c(xi)
};

// Pointwise algebra behind the complex-subspace argument, with the local star *dx = dy.
inline LemmaIdentityDefects lemma_identity_defects(const Configuration& q, const TangentTriple& X) {
    LemmaIdentityDefects d;
    const OneForm sa = hodge_star_local(X.alpha);
    const cplx I(0, 1);
    const auto N = q.u.size();
    SpinorOneForm la{SpinorField(N), SpinorField(N)}, lsa{SpinorField(N), SpinorField(N)};
    for (int s = 0; s < q.sites(); ++s)
        for (int a = 0; a < q.n(); ++a) {
            const std::size_t k = static_cast<std::size_t>(s) * q.n() + a;
            const Quaternion K = q.target.weight(a) * (Quaternion::I() * q.uc(s, a));
            la.x[k] = X.alpha.x[s] * K;
            la.y[k] = X.alpha.y[s] * K;
            lsa.x[k] = sa.x[s] * K;
            lsa.y[k] = sa.y[s] * K;
            const double w = q.target.weight(a);
            d.higgs = std::max(d.higgs, (higgs_vector(w, -I * X.eta[s], q.uc(s, a)) +
                                         apply_I(1, higgs_vector(w, X.eta[s], q.uc(s, a))))
                                            .abs());
        }
    const SpinorOneForm p = project_10(la), ps = project_10(lsa);
    for (std::size_t k = 0; k < N; ++k)
        d.lie = std::max({d.lie, (ps.x[k] + apply_I(1, p.x[k])).abs(), (ps.y[k] + apply_I(1, p.y[k])).abs()});
    for (int s = 0; s < q.sites(); ++s) {
        TargetTangent xi(q.at(s).size()), Ixi(xi.size());
        for (int a = 0; a < q.n(); ++a) {
            xi[a] = X.xi[static_cast<std::size_t>(s) * q.n() + a];
            Ixi[a] = -apply_I(1, xi[a]);
        }
        const ImQuaternion m1 = moment_map_derivative(q.target, q.at(s), xi);
        const ImQuaternion m2 = moment_map_derivative(q.target, q.at(s), Ixi);
        d.moment = std::max(d.moment, std::abs(cplx(m2.y, m2.z) + I * cplx(m1.y, m1.z)));
    }
    return d;
}

struct AdjointVanishing {
    double lhs = 0, rhs = 0;
    double defect = 0;  // |lhs - rhs| relative to the summed magnitudes
};

// <X_psi, xi> against <psi, dmu_c(xi)> for psi = -*dbar eta, both integrated with dvol
inline AdjointVanishing adjoint_vanishing_identity(const Configuration& q, const ComplexField& eta, const SpinorField& xi) {
    const auto& L = q.lat;
    const ComplexField de = dbar_z(L, eta);
    AdjointVanishing r;
    double scale = 0;
    for (int s = 0; s < L.size(); ++s) {
        const cplx psi = -de[s] / L.c2(s);
        const double dv = L.c2(s) * L.cell();
        TargetTangent x(static_cast<std::size_t>(q.n())), X(x.size());
        for (int a = 0; a < q.n(); ++a) {
            x[a] = xi[static_cast<std::size_t>(s) * q.n() + a];
            X[a] = higgs_vector(q.target.weight(a), psi, q.uc(s, a));
        }
        const ImQuaternion dm = moment_map_derivative(q.target, q.at(s), x);
        const double l = metric(X, x) * dv, rr = (std::conj(psi) * cplx(dm.y, dm.z)).real() * dv;
        r.lhs += l;
        r.rhs += rr;
        scale += std::abs(l) + std::abs(rr);
    }
    r.defect = scale > 0 ? std::abs(r.lhs - r.rhs) / scale : 0.0;
    return r;
}

// ---------------------------------------------------------------- curvature bilinear forms

// Normalizations relating the two explicitly computed curvature terms to the blocks of Omega_1:
//   gamma(z1, z2) = gamma_to_omega * Omega_1(spinor block)
//   tau(e1, e2)   = tau_to_omega   * Omega_1(Higgs block)
// The prequantum statement asks for i/2pi in both places.
struct CurvatureConventions {
    static constexpr double gamma_to_omega = -2.0;
    static cplx tau_to_omega() { return cplx(0.0, 2.0 / std::numbers::pi); }
    static cplx prequantum() { return cplx(0.0, 0.5 / std::numbers::pi); }
};

struct CurvatureForms {
    double gamma_fd = 0;        // complex Hessian of int rho_0(u) dvol, doubled, by finite differences
    double gamma_analytic = 0;  // int g(I1 z1, z2) dvol
    cplx tau;                   // (i/4pi) int eta1 ^ eta2
    double omega_spinor = 0;    // Omega_1 restricted to the spinor slots
    double omega_higgs = 0;     // Omega_1 restricted to the Higgs slots
};

inline CurvatureForms curvature_bilinear_forms(const Configuration& q, const TangentTriple& X, const TangentTriple& Y,
                                               double h = 1e-3) {
    const auto& L = q.lat;
    CurvatureForms c;
    const int n = q.n();
    auto rho = [&](QSpan u) {
        return L.cell() * pairwise_sum(static_cast<std::size_t>(q.sites()), [&](std::size_t s) {
                   double t = 0;
                   for (int a = 0; a < n; ++a) t += u[s * n + a].norm2();
                   return 0.5 * t * L.c2(static_cast<int>(s));
               });
    };
    c.gamma_fd = 2.0 * levi_form_fd(rho, q.u, 1, X.xi, Y.xi, h);
    c.gamma_analytic = L.cell() * pairwise_sum(static_cast<std::size_t>(q.sites()), [&](std::size_t s) {
                           double t = 0;
                           for (int a = 0; a < n; ++a) t += real_dot(apply_I(1, X.xi[s * n + a]), Y.xi[s * n + a]);
                           return t * L.c2(static_cast<int>(s));
                       });
    // eta dz - conj(eta) dzbar has the same wedge as 2i times the stored form with orientation reversed
    c.tau = cplx(0, 1.0 / (4 * std::numbers::pi)) * (-4.0 * wedge_integral(L, eta_as_form(X.eta), eta_as_form(Y.eta)));
    TangentTriple Xs = zero_tangent(q), Xh = zero_tangent(q), Ys = zero_tangent(q), Yh = zero_tangent(q);
    Xs.xi = X.xi;
    Ys.xi = Y.xi;
    Xh.eta = X.eta;
    Yh.eta = Y.eta;
    c.omega_spinor = config_omega(q, 1, Xs, Ys);
    c.omega_higgs = config_omega(q, 1, Xh, Yh);
    return c;
}

}  // namespace swlab

#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "equations.hpp"

namespace swlab {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Per-site packing of tangent vectors [alpha_x, alpha_y, xi (4n), Re eta, Im eta]
// and of residuals [r1, r2 (4n), Re r3, Im r3].
struct Layout {
    int N = 0, n = 1;
    int B() const { return 4 + 4 * n; }
    int R() const { return 3 + 4 * n; }
    int dofs() const { return N * B(); }
    int rows() const { return N * R(); }
    int ax(int s) const { return s * B(); }
    int ay(int s) const { return s * B() + 1; }
    int xi(int s, int a, int c) const { return s * B() + 2 + 4 * a + c; }
    int eta_re(int s) const { return s * B() + 2 + 4 * n; }
    int eta_im(int s) const { return s * B() + 3 + 4 * n; }
    int r1(int s) const { return s * R(); }
    int r2(int s, int a, int c) const { return s * R() + 1 + 4 * a + c; }
    int r3_re(int s) const { return s * R() + 1 + 4 * n; }
    int r3_im(int s) const { return s * R() + 2 + 4 * n; }
};

inline Layout layout_of(const Configuration& q) { return Layout{q.sites(), q.n()}; }

struct TangentTriple {
    OneForm alpha;
    SpinorField xi;
    ComplexField eta;
};
using CotripleValue = ResidualTriple;

inline TangentTriple zero_tangent(const Configuration& q) {
    const auto N = static_cast<std::size_t>(q.sites());
    return {OneForm(N), SpinorField(q.u.size()), ComplexField(N)};
}

inline Vec pack(const Layout& Lo, const TangentTriple& X) {
    Vec v(Lo.dofs());
    for (int s = 0; s < Lo.N; ++s) {
        v[Lo.ax(s)] = X.alpha.x[s];
        v[Lo.ay(s)] = X.alpha.y[s];
        for (int a = 0; a < Lo.n; ++a)
            for (int c = 0; c < 4; ++c) v[Lo.xi(s, a, c)] = X.xi[static_cast<std::size_t>(s) * Lo.n + a][c];
        v[Lo.eta_re(s)] = X.eta[s].real();
        v[Lo.eta_im(s)] = X.eta[s].imag();
    }
    return v;
}

inline TangentTriple unpack_tangent(const Layout& Lo, const Vec& v) {
    const auto N = static_cast<std::size_t>(Lo.N);
    TangentTriple X{OneForm(N), SpinorField(N * Lo.n), ComplexField(N)};
    for (int s = 0; s < Lo.N; ++s) {
        X.alpha.x[s] = v[Lo.ax(s)];
        X.alpha.y[s] = v[Lo.ay(s)];
        for (int a = 0; a < Lo.n; ++a)
            for (int c = 0; c < 4; ++c) X.xi[static_cast<std::size_t>(s) * Lo.n + a][c] = v[Lo.xi(s, a, c)];
        X.eta[s] = cplx(v[Lo.eta_re(s)], v[Lo.eta_im(s)]);
    }
    return X;
}

inline Vec pack(const Layout& Lo, const CotripleValue& Y) {
    Vec v(Lo.rows());
    for (int s = 0; s < Lo.N; ++s) {
        v[Lo.r1(s)] = Y.r1[s];
        for (int a = 0; a < Lo.n; ++a)
            for (int c = 0; c < 4; ++c) v[Lo.r2(s, a, c)] = Y.r2[static_cast<std::size_t>(s) * Lo.n + a][c];
        v[Lo.r3_re(s)] = Y.r3[s].real();
        v[Lo.r3_im(s)] = Y.r3[s].imag();
    }
    return v;
}

inline CotripleValue unpack_cotriple(const Layout& Lo, const Vec& v) {
    const auto N = static_cast<std::size_t>(Lo.N);
    CotripleValue Y{RealField(N), SpinorField(N * Lo.n), ComplexField(N)};
    for (int s = 0; s < Lo.N; ++s) {
        Y.r1[s] = v[Lo.r1(s)];
        for (int a = 0; a < Lo.n; ++a)
            for (int c = 0; c < 4; ++c) Y.r2[static_cast<std::size_t>(s) * Lo.n + a][c] = v[Lo.r2(s, a, c)];
        Y.r3[s] = cplx(v[Lo.r3_re(s)], v[Lo.r3_im(s)]);
    }
    return Y;
}

// Configuration coordinates use the same packing as tangent vectors.
inline Vec pack_configuration(const Configuration& q) {
    return pack(layout_of(q), TangentTriple{OneForm{q.ax, q.ay}, q.u, q.phi});
}
inline void unpack_configuration(const Vec& v, Configuration& q) {
    TangentTriple X = unpack_tangent(layout_of(q), v);
    q.ax = std::move(X.alpha.x);
    q.ay = std::move(X.alpha.y);
    q.u = std::move(X.xi);
    q.phi = std::move(X.eta);
}

// Diagonal weights of the tangent metric 1/2 int |alpha|^2 + 1/2 int |xi|^2 dvol + 1/2 int |eta|^2
inline Vec tangent_weights(const Configuration& q) {
    const Layout Lo = layout_of(q);
    Vec w(Lo.dofs());
    const double h2 = q.lat.cell();
    for (int s = 0; s < Lo.N; ++s) {
        w[Lo.ax(s)] = w[Lo.ay(s)] = 0.5 * h2;
        for (int a = 0; a < Lo.n; ++a)
            for (int c = 0; c < 4; ++c) w[Lo.xi(s, a, c)] = 0.5 * h2 * q.lat.c2(s);
        w[Lo.eta_re(s)] = w[Lo.eta_im(s)] = 0.5 * h2;
    }
    return w;
}

// Weights of the residual pairing; energy = 1/2 r^T W r
inline Vec residual_weights(const Configuration& q) {
    const Layout Lo = layout_of(q);
    Vec w(Lo.rows());
    const double h2 = q.lat.cell();
    for (int s = 0; s < Lo.N; ++s) {
        w[Lo.r1(s)] = h2 * q.lat.c2(s);
        for (int a = 0; a < Lo.n; ++a)
            for (int c = 0; c < 4; ++c) w[Lo.r2(s, a, c)] = h2;
        w[Lo.r3_re(s)] = w[Lo.r3_im(s)] = h2 * q.lat.c2(s);
    }
    return w;
}

// Lie-algebra valued functions pair with dvol
inline Vec lie_weights(const Configuration& q) {
    Vec w(q.sites());
    for (int s = 0; s < q.sites(); ++s) w[s] = q.lat.cell() * q.lat.c2(s);
    return w;
}

namespace detail {
inline Quaternion basis_q(int m) {
    Quaternion e;
    e[m] = 1.0;
    return e;
}
}  // namespace detail

// Exact Jacobian of the discrete residual map at q.
inline SpMat jacobian(const Configuration& q) {
    const Layout Lo = layout_of(q);
    const auto& L = q.lat;
    const double hx = L.hx(), hy = L.hy(), eps = q.epsilon;
    std::vector<Eigen::Triplet<double>> T;
    T.reserve(static_cast<std::size_t>(Lo.N) * (40 + 80 * Lo.n * Lo.n + 64 * Lo.n));
    const Quaternion I = Quaternion::I(), J = Quaternion::J(), K = Quaternion::K();
    auto addq = [&](int row0, const Quaternion& v, int col) {
        for (int c = 0; c < 4; ++c)
            if (v[c] != 0.0) T.emplace_back(row0 + c, col, v[c]);
    };
    for (int s = 0; s < Lo.N; ++s) {
        const int sx = L.xp(s), sy = L.yp(s);
        const double ic2 = 1.0 / L.c2(s);
        // r1
        T.emplace_back(Lo.r1(s), Lo.ax(s), eps * ic2 / hy);
        T.emplace_back(Lo.r1(s), Lo.ax(sy), -eps * ic2 / hy);
        T.emplace_back(Lo.r1(s), Lo.ay(sx), eps * ic2 / hx);
        T.emplace_back(Lo.r1(s), Lo.ay(s), -eps * ic2 / hx);
        // r3 = eps dbar_z phi / c^2 - mu_c
        const double ex = eps * ic2 / hx, ey = eps * ic2 / hy;
        T.emplace_back(Lo.r3_re(s), Lo.eta_re(sx), ex);
        T.emplace_back(Lo.r3_im(s), Lo.eta_im(sx), ex);
        T.emplace_back(Lo.r3_im(s), Lo.eta_re(sy), ey);
        T.emplace_back(Lo.r3_re(s), Lo.eta_im(sy), -ey);
        T.emplace_back(Lo.r3_re(s), Lo.eta_re(s), -ex);
        T.emplace_back(Lo.r3_im(s), Lo.eta_re(s), -ey);
        T.emplace_back(Lo.r3_re(s), Lo.eta_im(s), ey);
        T.emplace_back(Lo.r3_im(s), Lo.eta_im(s), -ex);

        const double b1 = q.phi[s].real(), b2 = q.phi[s].imag();
        const Quaternion bq(0, 0, b1, b2);
        for (int a = 0; a < Lo.n; ++a) {
            const double w = q.target.weight(a);
            const Quaternion& us = q.uc(s, a);
            const Quaternion& fx = q.uc(sx, a);
            const double chi = q.y_cocycle(s);
            const Quaternion fy = phase_left(w * chi, q.uc(sy, a));
            const double tx = w * q.theta_x(s), ty = w * q.theta_y(s);
            const Quaternion Ex_fx = phase_left(tx, fx), Ey_fy = phase_left(ty, fy);
            for (int m = 0; m < 4; ++m) {
                const Quaternion e = detail::basis_q(m);
                const int col_s = Lo.xi(s, a, m);
                // moment map rows
                const Quaternion dm = w * (us.conj() * I * e);
                if (dm.x != 0.0) T.emplace_back(Lo.r1(s), col_s, -dm.x);
                if (dm.y != 0.0) T.emplace_back(Lo.r3_re(s), col_s, -dm.y);
                if (dm.z != 0.0) T.emplace_back(Lo.r3_im(s), col_s, -dm.z);
                // r2 = Dx u + (Dy u) i + w i u (b1 j + b2 k)
                const Quaternion self = (-1.0 / hx) * e + (-1.0 / hy) * (e * I) + w * (I * e * bq);
                addq(Lo.r2(s, a, 0), self, col_s);
                addq(Lo.r2(s, a, 0), phase_left(tx, e) / hx, Lo.xi(sx, a, m));
                addq(Lo.r2(s, a, 0), (phase_left(ty + w * chi, e) * I) / hy, Lo.xi(sy, a, m));
            }
            addq(Lo.r2(s, a, 0), w * (I * Ex_fx), Lo.ax(s));
            addq(Lo.r2(s, a, 0), (w * (I * Ey_fy)) * I, Lo.ay(s));
            addq(Lo.r2(s, a, 0), w * (I * us * J), Lo.eta_re(s));
            addq(Lo.r2(s, a, 0), w * (I * us * K), Lo.eta_im(s));
        }
    }
    SpMat Jm(Lo.rows(), Lo.dofs());
    Jm.setFromTriplets(T.begin(), T.end());
    Jm.makeCompressed();
    return Jm;
}

inline CotripleValue apply_Dq(const Configuration& q, const TangentTriple& X) {
    const Layout Lo = layout_of(q);
    return unpack_cotriple(Lo, Vec(jacobian(q) * pack(Lo, X)));
}

// adjoint with respect to the tangent metric and the residual pairing
inline TangentTriple apply_Dq_adjoint(const Configuration& q, const CotripleValue& Y) {
    const Layout Lo = layout_of(q);
    const Vec y = residual_weights(q).cwiseProduct(pack(Lo, Y));
    const Vec x = Vec(jacobian(q).transpose() * y).cwiseQuotient(tangent_weights(q));
    return unpack_tangent(Lo, x);
}

inline double tangent_inner(const Configuration& q, const TangentTriple& X, const TangentTriple& Y) {
    const Layout Lo = layout_of(q);
    const Vec w = tangent_weights(q), a = pack(Lo, X), b = pack(Lo, Y);
    return pairwise_sum(static_cast<std::size_t>(a.size()), [&](std::size_t k) { return w[k] * a[k] * b[k]; });
}
inline double cotriple_inner(const Configuration& q, const CotripleValue& X, const CotripleValue& Y) {
    const Layout Lo = layout_of(q);
    const Vec w = residual_weights(q), a = pack(Lo, X), b = pack(Lo, Y);
    return pairwise_sum(static_cast<std::size_t>(a.size()), [&](std::size_t k) { return w[k] * a[k] * b[k]; });
}

// infinitesimal gauge action: derivative of exp(t gamma) . q at t = 0
inline SpMat d1_matrix(const Configuration& q) {
    const Layout Lo = layout_of(q);
    const auto& L = q.lat;
    std::vector<Eigen::Triplet<double>> T;
    for (int s = 0; s < Lo.N; ++s) {
        T.emplace_back(Lo.ax(s), L.xp(s), -1.0 / L.hx());
        T.emplace_back(Lo.ax(s), s, 1.0 / L.hx());
        T.emplace_back(Lo.ay(s), L.yp(s), -1.0 / L.hy());
        T.emplace_back(Lo.ay(s), s, 1.0 / L.hy());
        for (int a = 0; a < Lo.n; ++a) {
            const Quaternion k = q.target.weight(a) * (Quaternion::I() * q.uc(s, a));
            for (int c = 0; c < 4; ++c)
                if (k[c] != 0.0) T.emplace_back(Lo.xi(s, a, c), s, k[c]);
        }
    }
    SpMat D(Lo.dofs(), Lo.N);
    D.setFromTriplets(T.begin(), T.end());
    return D;
}

inline TangentTriple d1(const Configuration& q, const RealField& gamma) {
    const Vec g = Eigen::Map<const Vec>(gamma.data(), static_cast<Eigen::Index>(gamma.size()));
    return unpack_tangent(layout_of(q), Vec(d1_matrix(q) * g));
}

// d1^* with respect to the tangent metric and the dvol pairing of Lie-valued functions
inline SpMat d1_adjoint_matrix(const Configuration& q) {
    const Vec wt = tangent_weights(q), wl = lie_weights(q);
    SpMat A = SpMat(d1_matrix(q).transpose());
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it) it.valueRef() *= wt[it.col()] / wl[it.row()];
    return A;
}

// ---------------------------------------------------------------- regularity

struct RegularityReport {
    bool regular = false;
    bool irreducible = false;
    double regular_margin = 0;      // smallest singular value of (d_a, L_u), relative to the largest
    double irreducible_margin = 0;  // best normalized Gram determinant of (L_u 1, I1 L_u 1)
    int irreducible_site = -1;
};

inline RegularityReport check_regular_irreducible(const Configuration& q) {
    RegularityReport rep;
    const int N = q.sites();
    // A^T A for A = (d, L_u) with flat pairings, assembled as a sparse SPD matrix
    const SpMat D = d1_matrix(q);
    const Vec wt = tangent_weights(q), wl = lie_weights(q);
    SpMat W(wt.size(), wt.size());
    W.reserve(Eigen::VectorXi::Constant(wt.size(), 1));
    for (int k = 0; k < wt.size(); ++k) W.insert(k, k) = wt[k];
    SpMat M = SpMat(D.transpose()) * W * D;
    Vec iw = wl.cwiseInverse().cwiseSqrt();
    M = iw.asDiagonal() * M * iw.asDiagonal();
    // largest eigenvalue by power iteration, smallest by inverse iteration
    Vec v = Vec::Ones(N).normalized();
    double lmax = 0;
    for (int it = 0; it < 200; ++it) {
        Vec w = M * v;
        lmax = w.norm();
        v = w / lmax;
    }
    Eigen::SimplicialLDLT<SpMat> ldlt(M);
    double lmin = 0;
    if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 1e-14 * lmax).all()) {
        Vec x = Vec::Ones(N).normalized();
        for (int it = 0; it < 100; ++it) {
            Vec y = ldlt.solve(x);
            lmin = 1.0 / y.norm();
            x = y.normalized();
        }
        lmin = x.dot(M * x);
    }
    rep.regular_margin = lmax > 0 ? std::sqrt(std::max(lmin, 0.0) / lmax) : 0.0;
    rep.regular = rep.regular_margin > 1e-8;

    int g = 0;
    double best = 0;
    for (int s = 0; s < N; ++s) {
        double n2 = 0;
        std::vector<Quaternion> Lu(q.n()), ILu(q.n());
        for (int a = 0; a < q.n(); ++a) {
            Lu[a] = q.target.weight(a) * (Quaternion::I() * q.uc(s, a));
            ILu[a] = apply_I(1, Lu[a]);
            n2 += q.uc(s, a).norm2();
        }
        if (n2 < 1e-12) continue;
        const double g11 = metric(Lu, Lu), g22 = metric(ILu, ILu), g12 = metric(Lu, ILu);
        const double det = (g11 * g22 - g12 * g12) / (n2 * n2);
        if (det > best) {
            best = det;
            rep.irreducible_site = s;
        }
    }
    if (rep.irreducible_site >= 0) {
        for (int a = 0; a < q.n(); ++a)
            if (q.uc(rep.irreducible_site, a).norm2() > 1e-24) g = std::gcd(g, std::abs(q.target.weights[a]));
    }
    rep.irreducible_margin = best;
    rep.irreducible = best > 1e-12 && g == 1;
    return rep;
}

}  // namespace swlab

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace swlab {

using cplx = std::complex<double>;
using RealField = std::vector<double>;
using ComplexField = std::vector<cplx>;

// Sum of f(0..n-1) by recursive halving; the result does not depend on traversal order.
template <class F>
double pairwise_sum(std::size_t begin, std::size_t end, const F& f) {
    if (end - begin <= 16) {
        double s = 0;
        for (std::size_t k = begin; k < end; ++k) s += f(k);
        return s;
    }
    const std::size_t mid = begin + (end - begin) / 2;
    return pairwise_sum(begin, mid, f) + pairwise_sum(mid, end, f);
}

template <class F>
double pairwise_sum(std::size_t n, const F& f) {
    return pairwise_sum(std::size_t{0}, n, f);
}

struct TorusLattice {
    int Nx = 16, Ny = 16;
    double Lx = 1.0, Ly = 1.0;
    RealField conformal;  // c > 0 per site, metric c^2 |dz|^2

    TorusLattice() : conformal(static_cast<std::size_t>(Nx * Ny), 1.0) {}
    TorusLattice(int nx, int ny, double lx, double ly)
        : Nx(nx), Ny(ny), Lx(lx), Ly(ly), conformal(static_cast<std::size_t>(nx * ny), 1.0) {
        validate();
    }

    void validate() const {
        if (Nx < 4 || Ny < 4) throw std::invalid_argument("lattice needs at least 4 sites per direction");
        if (!(Lx > 0 && Ly > 0)) throw std::invalid_argument("torus periods must be positive");
        if (static_cast<int>(conformal.size()) != Nx * Ny) throw std::invalid_argument("conformal factor size mismatch");
        for (double c : conformal)
            if (!(c > 0)) throw std::invalid_argument("conformal factor must be strictly positive");
    }

    int size() const { return Nx * Ny; }
    double hx() const { return Lx / Nx; }
    double hy() const { return Ly / Ny; }
    double cell() const { return hx() * hy(); }
    int site(int i, int j) const { return ((i % Nx + Nx) % Nx) + Nx * ((j % Ny + Ny) % Ny); }
    int ix(int s) const { return s % Nx; }
    int iy(int s) const { return s / Nx; }
    int xp(int s) const { return ix(s) == Nx - 1 ? s - (Nx - 1) : s + 1; }
    int xm(int s) const { return ix(s) == 0 ? s + (Nx - 1) : s - 1; }
    int yp(int s) const { return iy(s) == Ny - 1 ? s - Nx * (Ny - 1) : s + Nx; }
    int ym(int s) const { return iy(s) == 0 ? s + Nx * (Ny - 1) : s - Nx; }
    bool wraps_y(int s) const { return iy(s) == Ny - 1; }
    bool wraps_x(int s) const { return ix(s) == Nx - 1; }
    double c2(int s) const { return conformal[static_cast<std::size_t>(s)] * conformal[static_cast<std::size_t>(s)]; }
    double area() const {
        return pairwise_sum(static_cast<std::size_t>(size()), [&](std::size_t s) { return c2(static_cast<int>(s)); }) *
               cell();
    }
};

// Degree-d bundle realized by a twist along the y-wrap.
struct BundleSpec {
    int degree = 0;

    // background x-link phase on row j; y-links carry no background
    double background_theta_x(const TorusLattice& L, int j) const {
        return 2.0 * std::numbers::pi * degree * j / (static_cast<double>(L.Nx) * L.Ny);
    }
    // transition phase relating u(i, Ny) to u(i, 0): u(i, Ny) = e^{i w chi_i} u(i, 0)
    double cocycle(const TorusLattice& L, int i) const { return -2.0 * std::numbers::pi * degree * i / L.Nx; }
    // jump of the x-link phase across the y-wrap
    double x_link_jump(const TorusLattice& L) const { return 2.0 * std::numbers::pi * degree / L.Nx; }
};

// ---------------------------------------------------------------- charge-0 calculus

struct OneForm {
    RealField x, y;
    OneForm() = default;
    explicit OneForm(std::size_t n) : x(n, 0.0), y(n, 0.0) {}
    OneForm(RealField x_, RealField y_) : x(std::move(x_)), y(std::move(y_)) {}
};

inline OneForm grad(const TorusLattice& L, const RealField& f) {
    OneForm g(f.size());
    for (int s = 0; s < L.size(); ++s) {
        g.x[s] = (f[L.xp(s)] - f[s]) / L.hx();
        g.y[s] = (f[L.yp(s)] - f[s]) / L.hy();
    }
    return g;
}

// plaquette curl, plaquette identified with its lower-left site
inline RealField curl(const TorusLattice& L, const OneForm& v) {
    RealField c(v.x.size());
    for (int s = 0; s < L.size(); ++s)
        c[s] = (v.y[L.xp(s)] - v.y[s]) / L.hx() - (v.x[L.yp(s)] - v.x[s]) / L.hy();
    return c;
}

// minus the transpose of grad
inline RealField div(const TorusLattice& L, const OneForm& v) {
    RealField d(v.x.size());
    for (int s = 0; s < L.size(); ++s)
        d[s] = (v.x[s] - v.x[L.xm(s)]) / L.hx() + (v.y[s] - v.y[L.ym(s)]) / L.hy();
    return d;
}

// d_zbar = d_x + i d_y with forward differences, charge 0
inline ComplexField dbar_z(const TorusLattice& L, const ComplexField& f) {
    ComplexField out(f.size());
    const cplx I(0, 1);
    for (int s = 0; s < L.size(); ++s)
        out[s] = (f[L.xp(s)] - f[s]) / L.hx() + I * (f[L.yp(s)] - f[s]) / L.hy();
    return out;
}

inline void fft2(const TorusLattice& L, ComplexField& f, bool inverse) {
    Eigen::FFT<double> fft;
    std::vector<cplx> in, out;
    in.resize(static_cast<std::size_t>(L.Nx));
    for (int j = 0; j < L.Ny; ++j) {
        for (int i = 0; i < L.Nx; ++i) in[i] = f[i + L.Nx * j];
        if (inverse) fft.inv(out, in); else fft.fwd(out, in);
        for (int i = 0; i < L.Nx; ++i) f[i + L.Nx * j] = out[i];
    }
    in.resize(static_cast<std::size_t>(L.Ny));
    for (int i = 0; i < L.Nx; ++i) {
        for (int j = 0; j < L.Ny; ++j) in[j] = f[i + L.Nx * j];
        if (inverse) fft.inv(out, in); else fft.fwd(out, in);
        for (int j = 0; j < L.Ny; ++j) f[i + L.Nx * j] = out[j];
    }
}

namespace detail {
inline bool& hodge_sign_flip() {
    static bool flip = false;
    return flip;
}
}  // namespace detail

// Test hook: flips the sign of the 1-form Hodge star (mutation testing of the adjointness checks).
inline void set_hodge_sign_mutation(bool on) { detail::hodge_sign_flip() = on; }

// Pointwise star on 1-forms: *dx = dy, *dy = -dx at the same site.
inline OneForm hodge_star_local(const OneForm& v) {
    OneForm o(v.x.size());
    const double sgn = detail::hodge_sign_flip() ? -1.0 : 1.0;
    for (std::size_t s = 0; s < v.x.size(); ++s) {
        o.x[s] = -sgn * v.y[s];
        o.y[s] = sgn * v.x[s];
    }
    return o;
}

// Lattice star on 1-forms. On each Fourier mode it is the rotation taking the forward gradient
// (Dx, Dy) to minus the transposed curl, so that <*grad f, v> = -<f, curl v> holds exactly,
// ** = -1, it is an isometry, and it reduces to *dx = dy, *dy = -dx on constant forms.
inline OneForm hodge_star(const TorusLattice& L, const OneForm& v) {
    const int N = L.size();
    ComplexField fx(v.x.begin(), v.x.end()), fy(v.y.begin(), v.y.end());
    fft2(L, fx, false);
    fft2(L, fy, false);
    const cplx I(0, 1);
    for (int my = 0; my < L.Ny; ++my)
        for (int mx = 0; mx < L.Nx; ++mx) {
            const int s = mx + L.Nx * my;
            const double a = 2.0 * std::numbers::pi * mx / L.Nx, b = 2.0 * std::numbers::pi * my / L.Ny;
            const cplx Dx = (std::exp(I * a) - 1.0) / L.hx(), Dy = (std::exp(I * b) - 1.0) / L.hy();
            const cplx gx = Dx, gy = Dy;
            const cplx px = -std::exp(-I * b) * Dy, py = std::exp(-I * a) * Dx;
            const double n2 = std::norm(gx) + std::norm(gy);
            const cplx vx = fx[s], vy = fy[s];
            cplx ox, oy;
            if (n2 < 1e-300) {
                ox = -vy;
                oy = vx;
            } else {
                // S = (p g^H - g p^H) / |g|^2
                const cplx gv = std::conj(gx) * vx + std::conj(gy) * vy;
                const cplx pv = std::conj(px) * vx + std::conj(py) * vy;
                ox = (px * gv - gx * pv) / n2;
                oy = (py * gv - gy * pv) / n2;
            }
            fx[s] = ox;
            fy[s] = oy;
        }
    fft2(L, fx, true);
    fft2(L, fy, true);
    OneForm o(static_cast<std::size_t>(N));
    const double sgn = detail::hodge_sign_flip() ? -1.0 : 1.0;
    for (int s = 0; s < N; ++s) {
        o.x[s] = sgn * fx[s].real();
        o.y[s] = sgn * fy[s].real();
    }
    return o;
}

// star on 0-forms and 2-forms (2-forms stored as densities per coordinate area)
inline RealField hodge_star_0(const TorusLattice& L, const RealField& f) {
    RealField o(f.size());
    for (int s = 0; s < L.size(); ++s) o[s] = f[s] * L.c2(s);
    return o;
}
inline RealField hodge_star_2(const TorusLattice& L, const RealField& f) {
    RealField o(f.size());
    for (int s = 0; s < L.size(); ++s) o[s] = f[s] / L.c2(s);
    return o;
}

// L^2 pairings. Functions use dvol = c^2 dx dy; 1-forms are conformally invariant and use dx dy.
inline double inner_0(const TorusLattice& L, const RealField& a, const RealField& b) {
    return L.cell() * pairwise_sum(a.size(), [&](std::size_t s) { return a[s] * b[s] * L.c2(static_cast<int>(s)); });
}
inline double inner_0(const TorusLattice& L, const ComplexField& a, const ComplexField& b) {
    return L.cell() * pairwise_sum(a.size(), [&](std::size_t s) {
               return (std::conj(a[s]) * b[s]).real() * L.c2(static_cast<int>(s));
           });
}
inline double inner_1(const TorusLattice& L, const OneForm& a, const OneForm& b) {
    return L.cell() * pairwise_sum(a.x.size(), [&](std::size_t s) { return a.x[s] * b.x[s] + a.y[s] * b.y[s]; });
}
// integral of a wedge b, via a wedge b = <a, -*b> dvol
inline double wedge_integral(const TorusLattice& L, const OneForm& a, const OneForm& b) {
    const OneForm sb = hodge_star(L, b);
    return -inner_1(L, a, sb);
}

}  // namespace swlab

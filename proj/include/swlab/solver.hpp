#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCholesky>

#include "linearization.hpp"

namespace swlab {

enum class SolveMethod { gradient_flow, nonlinear_cg, gauss_newton };

inline SolveMethod parse_solve_method(const std::string& s) {
    if (s == "gradient-flow") return SolveMethod::gradient_flow;
    if (s == "nonlinear-cg") return SolveMethod::nonlinear_cg;
    if (s == "gauss-newton") return SolveMethod::gauss_newton;
    throw std::invalid_argument("unknown solver method '" + s + "'");
}

struct IterRecord {
    int iter = 0;
    double energy = 0, r1 = 0, r2 = 0, r3 = 0, gauge_defect = 0, wall_ms = 0;
};

struct SolveOptions {
    SolveMethod method = SolveMethod::gauss_newton;
    double tol = 1e-8;
    int max_iter = 10000;
    bool gauge_fix = true;
    double damping = 1e-3;           // initial Levenberg-Marquardt parameter
    double max_damping = 1e14;
    double step = 1e-2;              // initial step for the first-order methods
    int divergence_window = 25;      // consecutive energy increases tolerated
    std::vector<double> epsilon_schedule{1.0};
    double min_schedule_step = 1.0 / 64;
    std::vector<double> penalty_weights{1.0, 1e2, 1e4};
    int checkpoint_every = 0;
    std::function<void(const Configuration&, int)> on_checkpoint;
    std::function<void(const IterRecord&)> on_iter;

    void validate() const {
        if (!(tol > 0)) throw std::invalid_argument("tol must be positive");
        if (max_iter < 0) throw std::invalid_argument("max_iter must be non-negative");
        if (!(damping > 0) || !(step > 0)) throw std::invalid_argument("step parameters must be positive");
        for (std::size_t k = 0; k < epsilon_schedule.size(); ++k) {
            const double e = epsilon_schedule[k];
            if (!(e >= 0 && e <= 1)) throw std::invalid_argument("epsilon schedule values must lie in [0,1]");
            if (k > 0 && e > epsilon_schedule[k - 1]) throw std::invalid_argument("epsilon schedule must be non-increasing");
        }
        for (double p : penalty_weights)
            if (!(p > 0)) throw std::invalid_argument("penalty weights must be positive");
    }
};

struct SolveReport {
    bool converged = false;
    bool diverged = false;
    int iterations = 0;
    ResidualNorms final;
    double energy = 0;
    double gauge_defect = 0;
    double moment_defect = 0;  // || mu o u ||, recorded for every stage
    double wall_ms = 0;
    std::vector<IterRecord> history;
    std::string message;
};

// ---------------------------------------------------------------- gradient and gauge

inline TangentTriple gradient(const Configuration& q) { return apply_Dq_adjoint(q, residual_2d(q)); }

inline double moment_defect(const Configuration& q) {
    const auto& L = q.lat;
    return std::sqrt(L.cell() * pairwise_sum(static_cast<std::size_t>(L.size()), [&](std::size_t s) {
                         return moment_map(q.target, q.at(static_cast<int>(s))).q().norm2() * L.c2(static_cast<int>(s));
                     }));
}

// L2 norm of the divergence of the connection fluctuation
inline double coulomb_defect(const Configuration& q) {
    const RealField d = div(q.lat, OneForm(q.ax, q.ay));
    return std::sqrt(q.lat.cell() * pairwise_sum(d.size(), [&](std::size_t s) { return d[s] * d[s]; }));
}

// exp(chi) . q with exact link increments
inline Configuration gauge_transform_exp(const RealField& chi, const Configuration& q) {
    Configuration r = q;
    const auto& L = q.lat;
    for (int s = 0; s < L.size(); ++s) {
        r.ax[s] -= (chi[L.xp(s)] - chi[s]) / L.hx();
        r.ay[s] -= (chi[L.yp(s)] - chi[s]) / L.hy();
        for (int a = 0; a < q.n(); ++a) r.uc(s, a) = phase_left(q.target.weight(a) * chi[s], q.uc(s, a));
    }
    return r;
}

// Moves q along its gauge orbit to div a = 0 by an FFT Poisson solve.
inline Configuration coulomb_gauge_fix(const Configuration& q) {
    const auto& L = q.lat;
    const RealField d = div(L, OneForm(q.ax, q.ay));
    ComplexField f(d.begin(), d.end());
    fft2(L, f, false);
    for (int my = 0; my < L.Ny; ++my)
        for (int mx = 0; mx < L.Nx; ++mx) {
            const int s = mx + L.Nx * my;
            const double a = 2 * std::numbers::pi * mx / L.Nx, b = 2 * std::numbers::pi * my / L.Ny;
            const double lam = -(4 * std::pow(std::sin(a / 2), 2) / (L.hx() * L.hx()) + 4 * std::pow(std::sin(b / 2), 2) / (L.hy() * L.hy()));
            f[s] = (mx == 0 && my == 0) ? cplx{} : f[s] / lam;
        }
    fft2(L, f, true);
    RealField chi(d.size());
    for (std::size_t s = 0; s < chi.size(); ++s) chi[s] = f[s].real();
    return gauge_transform_exp(chi, q);
}

// Starting point for vortex runs: |p|^2 / 2 at the average level forced by the flux, with a smooth ripple.
inline Configuration vortex_initial_guess(const TorusLattice& L, int degree, double epsilon, double tau_area, double ripple = 0.1) {
    Configuration q(L, degree, Target(1));
    q.epsilon = epsilon;
    q.tau = tau_area / L.area();
    const double level = q.tau - 2 * std::numbers::pi * degree * epsilon / L.area();
    if (!(level > 0)) throw std::invalid_argument("tau * area must exceed 2 pi |degree| epsilon for a vortex solution");
    const double p0 = std::sqrt(2 * level);
    for (int s = 0; s < L.size(); ++s) {
        const double x = 2 * std::numbers::pi * L.ix(s) / L.Nx, y = 2 * std::numbers::pi * L.iy(s) / L.Ny;
        q.uc(s, 0) = Quaternion{p0 * (1 + ripple * std::cos(x)), p0 * ripple * std::sin(y), 0, 0};
    }
    return q;
}

// ---------------------------------------------------------------- vortex count

struct VortexCount {
    int count = 0;
    bool degenerate = false;  // a plaquette corner where the field is numerically zero
    std::vector<int> plaquettes;  // lower-left sites of plaquettes with nonzero winding
};

// winding of the first complex component of spinor factor a, plaquette by plaquette
inline VortexCount count_vortices(const Configuration& q, int a = 0, double zero_tol = 1e-10) {
    const auto& L = q.lat;
    const double w = q.target.weight(a);
    auto p = [&](int s) { return cplx(q.uc(s, a).w, q.uc(s, a).x); };
    VortexCount vc;
    double scale = 0;
    for (int s = 0; s < L.size(); ++s) scale = std::max(scale, std::abs(p(s)));
    for (int s = 0; s < L.size(); ++s) {
        const int sx = L.xp(s);
        const cplx P0 = p(s), P1 = p(sx);
        const cplx P2 = std::polar(1.0, w * q.y_cocycle(sx)) * p(L.yp(sx));
        const cplx P3 = std::polar(1.0, w * q.y_cocycle(s)) * p(L.yp(s));
        for (const cplx& z : {P0, P1, P2, P3})
            if (std::abs(z) <= zero_tol * std::max(scale, 1e-300)) vc.degenerate = true;
        const double t01 = w * q.theta_x(s), t12 = w * q.theta_y(sx), t32 = w * q.theta_x_above(s), t03 = w * q.theta_y(s);
        const double circ = (t01 - t32) + (t12 - t03);
        const double d01 = std::arg(std::conj(P0) * std::polar(1.0, t01) * P1);
        const double d12 = std::arg(std::conj(P1) * std::polar(1.0, t12) * P2);
        const double d32 = std::arg(std::conj(P3) * std::polar(1.0, t32) * P2);
        const double d03 = std::arg(std::conj(P0) * std::polar(1.0, t03) * P3);
        const int n = static_cast<int>(std::lround((d01 + d12 - d32 - d03 - circ) / (2 * std::numbers::pi)));
        if (n != 0) vc.plaquettes.push_back(s);
        vc.count += n;
    }
    return vc;
}

// ---------------------------------------------------------------- minimization

namespace detail {

struct Clock {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const { return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count(); }
};

// residual rows scaled so that the objective is 1/2 |r|^2; rows 1 and 3 carry an extra penalty factor
inline Vec row_scale(const Configuration& q, double penalty) {
    const Layout Lo = layout_of(q);
    Vec w = residual_weights(q).cwiseSqrt();
    if (penalty != 1.0)
        for (int s = 0; s < Lo.N; ++s) {
            w[Lo.r1(s)] *= std::sqrt(penalty);
            w[Lo.r3_re(s)] *= std::sqrt(penalty);
            w[Lo.r3_im(s)] *= std::sqrt(penalty);
        }
    return w;
}

inline double objective(const Configuration& q, const Vec& scale) {
    const Vec r = scale.cwiseProduct(pack(layout_of(q), residual_2d(q)));
    return 0.5 * r.squaredNorm();
}

inline Configuration step_by(const Configuration& q, const Vec& dx) {
    Configuration p = q;
    unpack_configuration(pack_configuration(q) + dx, p);
    return p;
}

inline IterRecord record(const Configuration& q, int it, double E, const Clock& clk) {
    const ResidualNorms m = residual_norms(q.lat, q.n(), residual_2d(q));
    return {it, E, m.r1, m.r2, m.r3, coulomb_defect(q), clk.ms()};
}

}  // namespace detail

inline std::pair<Configuration, SolveReport> solve(const Configuration& q0, const SolveOptions& opt, double penalty = 1.0) {
    opt.validate();
    detail::Clock clk;
    SolveReport rep;
    Configuration q = opt.gauge_fix ? coulomb_gauge_fix(q0) : q0;
    const Layout Lo = layout_of(q);
    const Vec scale = detail::row_scale(q, penalty);
    const Vec wt = tangent_weights(q);
    double E = detail::objective(q, scale);
    auto converged = [&](const Configuration& c) {
        const ResidualNorms m = residual_norms(c.lat, c.n(), residual_2d(c));
        return m.total() <= opt.tol;
    };
    auto log = [&](int it) {
        IterRecord r = detail::record(q, it, E, clk);
        rep.history.push_back(r);
        if (opt.on_iter) opt.on_iter(r);
    };
    log(0);

    // gauge-fixing term ||d1^* dx||^2 in the Lie pairing keeps the normal equations definite along orbits
    SpMat gaugeterm;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    double lambda = opt.damping;
    double step = opt.step;
    Vec prev_grad, direction;
    int increases = 0;
    int it = 0;
    for (; it < opt.max_iter && !converged(q); ++it) {
        if (!std::isfinite(E)) {
            rep.diverged = true;
            rep.message = "energy is not finite";
            break;
        }
        const SpMat J = jacobian(q);
        const Vec r = scale.cwiseProduct(pack(Lo, residual_2d(q)));
        const SpMat SJ = scale.asDiagonal() * J;
        const Vec g = SJ.transpose() * r;  // flat-coordinate gradient
        bool accepted = false;
        if (opt.method == SolveMethod::gauss_newton) {
            const SpMat Dadj = d1_adjoint_matrix(q);
            const Vec wl = lie_weights(q);
            gaugeterm = SpMat(Dadj.transpose()) * wl.asDiagonal() * Dadj;
            const SpMat H0 = SpMat(SJ.transpose() * SJ) + gaugeterm;
            while (!accepted) {
                SpMat H = H0;
                for (int k = 0; k < H.rows(); ++k) H.coeffRef(k, k) += lambda * wt[k] / wt.maxCoeff() * (1.0 + H0.coeff(k, k));
                ldlt.compute(H);
                if (ldlt.info() != Eigen::Success) {
                    lambda *= 10;
                    if (lambda > opt.max_damping) break;
                    continue;
                }
                const Vec dx = -ldlt.solve(g);
                Configuration trial = detail::step_by(q, dx);
                const double Et = detail::objective(trial, scale);
                if (std::isfinite(Et) && Et < E) {
                    q = std::move(trial);
                    E = Et;
                    lambda = std::max(lambda / 5, 1e-15);
                    accepted = true;
                } else {
                    lambda *= 4;
                    if (lambda > opt.max_damping) break;
                }
            }
            if (!accepted) {
                rep.message = "damping limit reached without decrease";
                break;
            }
        } else {
            // first-order methods in the tangent metric: gradient is W_T^{-1} g
            const Vec grad = g.cwiseQuotient(wt);
            if (opt.method == SolveMethod::nonlinear_cg && prev_grad.size() == grad.size() && direction.size() == grad.size()) {
                const double num = grad.dot(wt.cwiseProduct(grad - prev_grad));
                const double den = prev_grad.dot(wt.cwiseProduct(prev_grad));
                const double beta = std::max(0.0, num / den);
                direction = -grad + beta * direction;
                if (direction.dot(g) >= 0) direction = -grad;
            } else {
                direction = -grad;
            }
            prev_grad = grad;
            const double slope = direction.dot(g);
            double t = step;
            for (int bt = 0; bt < 60 && !accepted; ++bt) {
                Configuration trial = detail::step_by(q, t * direction);
                const double Et = detail::objective(trial, scale);
                if (std::isfinite(Et) && Et <= E + 1e-4 * t * slope) {
                    q = std::move(trial);
                    E = Et;
                    accepted = true;
                    step = 2 * t;
                } else {
                    t *= 0.5;
                }
            }
            if (!accepted) {
                ++increases;
                if (increases > opt.divergence_window) {
                    rep.diverged = true;
                    rep.message = "no descent step found repeatedly";
                    break;
                }
                continue;
            }
        }
        increases = 0;
        if (opt.gauge_fix) q = coulomb_gauge_fix(q);
        log(it + 1);
        if (opt.checkpoint_every > 0 && opt.on_checkpoint && (it + 1) % opt.checkpoint_every == 0) opt.on_checkpoint(q, it + 1);
    }
    rep.iterations = it;
    rep.final = residual_norms(q.lat, q.n(), residual_2d(q));
    rep.converged = rep.final.total() <= opt.tol;
    rep.energy = energy(q);
    rep.gauge_defect = coulomb_defect(q);
    rep.moment_defect = moment_defect(q);
    rep.wall_ms = clk.ms();
    if (rep.message.empty()) rep.message = rep.converged ? "converged" : "iteration limit reached";
    return {std::move(q), std::move(rep)};
}

// ---------------------------------------------------------------- epsilon continuation

struct ContinuationStage {
    double epsilon = 1.0;
    Configuration q;
    SolveReport report;
};

// Warm-started solves along the schedule. A failed stage is retried from the midpoint of the step;
// the epsilon = 0 stage drops the central shift and solves the penalized constraint mu o u = 0.
inline std::vector<ContinuationStage> epsilon_continuation(const Configuration& q0, const SolveOptions& opt) {
    opt.validate();
    std::vector<ContinuationStage> out;
    Configuration q = q0;
    double last = q0.epsilon;
    std::vector<double> todo(opt.epsilon_schedule.rbegin(), opt.epsilon_schedule.rend());
    while (!todo.empty()) {
        const double eps = todo.back();
        Configuration start = q;
        start.epsilon = eps;
        ContinuationStage st;
        st.epsilon = eps;
        if (eps == 0.0) {
            start.tau = 0.0;
            SolveReport agg;
            for (double rho : opt.penalty_weights) {
                auto [qs, rs] = solve(start, opt, rho);
                agg.history.insert(agg.history.end(), rs.history.begin(), rs.history.end());
                agg.iterations += rs.iterations;
                agg.wall_ms += rs.wall_ms;
                agg.final = rs.final;
                agg.energy = rs.energy;
                agg.gauge_defect = rs.gauge_defect;
                agg.moment_defect = rs.moment_defect;
                agg.diverged = agg.diverged || rs.diverged;
                agg.message = rs.message;
                start = std::move(qs);
            }
            agg.converged = agg.final.total() <= opt.tol;
            st.q = start;
            st.report = std::move(agg);
        } else {
            auto [qs, rs] = solve(start, opt);
            st.q = std::move(qs);
            st.report = std::move(rs);
        }
        if (!st.report.converged && eps != 0.0) {
            const double mid = 0.5 * (last + eps);
            if (last - mid >= opt.min_schedule_step) {
                todo.push_back(mid);
                continue;
            }
            out.push_back(std::move(st));
            break;
        }
        todo.pop_back();
        q = st.q;
        last = eps;
        out.push_back(std::move(st));
    }
    return out;
}

}  // namespace swlab

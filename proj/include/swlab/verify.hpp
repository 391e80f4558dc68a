#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "index.hpp"
#include "sampling.hpp"
#include "solver.hpp"
#include "symplectic.hpp"

namespace swlab {

struct CheckResult {
    std::string name;
    double defect = 0;
    double tolerance = 0;
    double ms = 0;
    bool passed() const { return defect <= tolerance; }
};

struct SuiteReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;
    double ms = 0;
    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
    }
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"algebra", "moment", "gauge", "reduction", "adjoint", "symplectic"};
    return names;
}

namespace detail {

class Checker {
public:
    explicit Checker(SuiteReport& rep) : rep_(rep) {}
    void run(const std::string& name, double tol, const std::function<double()>& f) {
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult c{name, f(), tol, 0};
        c.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        rep_.checks.push_back(c);
    }

private:
    SuiteReport& rep_;
};

inline TorusLattice wavy_lattice(int nx, int ny, double lx, double ly, Rng& r, double amp = 0.3) {
    TorusLattice L(nx, ny, lx, ly);
    for (auto& c : L.conformal) c = 1 + amp * r.uni();
    return L;
}

inline double tangent_gap(const Configuration& q, const TangentTriple& A, const TangentTriple& B) {
    const Layout Lo = layout_of(q);
    const Vec a = pack(Lo, A), b = pack(Lo, B);
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

inline TangentTriple negated(const Configuration& q, const TangentTriple& X) {
    const Layout Lo = layout_of(q);
    return unpack_tangent(Lo, Vec(-pack(Lo, X)));
}

inline double tensor_norm(const TargetPoint& p) {
    double s = 0;
    for (const auto& h : p) s += h.norm2();
    return std::sqrt(s);
}

inline CotripleValue random_cotriple(const Configuration& q, Rng& r) {
    const auto N = static_cast<std::size_t>(q.sites());
    CotripleValue Y{RealField(N), SpinorField(q.u.size()), ComplexField(N)};
    for (std::size_t s = 0; s < N; ++s) {
        Y.r1[s] = r.normal();
        Y.r3[s] = cplx(r.normal(), r.normal());
    }
    for (auto& v : Y.r2) v = r.quat();
    return Y;
}

// worst defect of the quaternion relations of the three structures on the configuration space
inline double config_structure_defect(const Configuration& q, Rng& r, int samples) {
    double d = 0;
    auto I = [&](int k, const TangentTriple& X) { return apply_config_structure(q, k, X); };
    for (int t = 0; t < samples; ++t) {
        const TangentTriple X = random_tangent(q, r), Y = random_tangent(q, r);
        const double nxy = std::sqrt(config_metric(q, X, X) * config_metric(q, Y, Y));
        for (int k = 1; k <= 3; ++k) {
            d = std::max(d, tangent_gap(q, I(k, I(k, X)), negated(q, X)));
            d = std::max(d, std::abs(config_metric(q, I(k, X), I(k, Y)) - config_metric(q, X, Y)) / nxy);
        }
        d = std::max({d, tangent_gap(q, I(1, I(2, X)), I(3, X)), tangent_gap(q, I(2, I(3, X)), I(1, X)),
                      tangent_gap(q, I(3, I(1, X)), I(2, X))});
    }
    return d;
}

}  // namespace detail

// ---------------------------------------------------------------- suites

inline SuiteReport verify_algebra(std::uint64_t seed, int instances = 1000) {
    SuiteReport rep{"algebra", seed, {}, 0};
    detail::Checker ck(rep);
    Rng r(seed);
    ck.run("quaternion_relations", 1e-12, [&] {
        const Quaternion i = Quaternion::I(), j = Quaternion::J(), k = Quaternion::K(), one = Quaternion::one();
        double d = std::max({max_abs_diff(i * i, -one), max_abs_diff(j * j, -one), max_abs_diff(k * k, -one),
                             max_abs_diff(i * j * k, -one), max_abs_diff(i * j, k), max_abs_diff(j * k, i), max_abs_diff(k * i, j)});
        for (int t = 0; t < instances; ++t) {
            const Quaternion a = r.quat(), b = r.quat(), c = r.quat();
            const double s = a.abs() * b.abs() * c.abs();
            d = std::max(d, ((a * b) * c - a * (b * c)).abs() / s);
            d = std::max(d, std::abs((a * b).abs() - a.abs() * b.abs()) / (a.abs() * b.abs()));
        }
        return d;
    });
    ck.run("complex_structure_squares", 1e-12, [&] {
        double d = 0;
        for (int t = 0; t < instances; ++t) {
            const ImQuaternion xi = r.unit_imq();
            const TargetPoint v = r.point(3);
            const TargetTangent IIv = apply_complex_structure(xi, apply_complex_structure(xi, v));
            for (int a = 0; a < 3; ++a) d = std::max(d, max_abs_diff(IIv[a], -v[a]) / detail::tensor_norm(v));
        }
        return d;
    });
    ck.run("complex_structure_products", 1e-12, [&] {
        double d = 0;
        for (int t = 0; t < instances; ++t) {
            const Quaternion v = r.quat();
            d = std::max({d, max_abs_diff(apply_I(1, apply_I(2, v)), apply_I(3, v)) / v.abs(),
                          max_abs_diff(apply_I(2, apply_I(3, v)), apply_I(1, v)) / v.abs(),
                          max_abs_diff(apply_I(3, apply_I(1, v)), apply_I(2, v)) / v.abs()});
        }
        return d;
    });
    ck.run("metric_compatibility", 1e-12, [&] {
        double d = 0;
        for (int t = 0; t < instances; ++t) {
            const ImQuaternion xi = r.unit_imq();
            const TargetPoint v = r.point(3), w = r.point(3);
            const TargetTangent Iv = apply_complex_structure(xi, v), Iw = apply_complex_structure(xi, w);
            const double s = detail::tensor_norm(v) * detail::tensor_norm(w);
            d = std::max({d, std::abs(metric(Iv, Iw) - metric(v, w)) / s, std::abs(metric(Iv, w) + metric(v, Iw)) / s});
        }
        return d;
    });
    ck.run("config_structure_relations", 1e-12, [&] {
        const TorusLattice L = detail::wavy_lattice(4, 4, 1.3, 0.8, r);
        const Configuration q = random_configuration(L, 1, Target(2, {1, 3}), r);
        return detail::config_structure_defect(q, r, instances);
    });
    return rep;
}

inline SuiteReport verify_moment(std::uint64_t seed, int points = 100) {
    SuiteReport rep{"moment", seed, {}, 0};
    detail::Checker ck(rep);
    Rng r(seed);
    const Target t(3, {1, 2, -1});
    std::vector<MomentAxiomDefects> d;
    for (int k = 0; k < points; ++k) {
        const TargetPoint p = r.point(3), v = r.point(3);
        d.push_back(check_moment_axioms(t, p, r.unit_imq(), r.normal(), v, 1e-4));
    }
    ck.run("moment_differential_fd", 1e-6, [&] {
        double m = 0;
        for (const auto& x : d) m = std::max(m, x.axiom1);
        return m;
    });
    ck.run("moment_invariance", 1e-12, [&] {
        double m = 0;
        for (const auto& x : d) m = std::max(m, x.axiom2);
        return m;
    });
    return rep;
}

inline SuiteReport verify_gauge(std::uint64_t seed, int transforms = 50) {
    SuiteReport rep{"gauge", seed, {}, 0};
    detail::Checker ck(rep);
    Rng r(seed);
    const TorusLattice L = detail::wavy_lattice(12, 10, 1.1, 0.9, r, 0.2);
    const Target t(2, {1, 3});
    Configuration q = random_configuration(L, 1, t, r, 0.5, true);
    q.epsilon = 0.7;
    q.tau = 1.3;
    const ResidualTriple r0 = residual_2d(q);
    const double E0 = energy(q);
    std::vector<Configuration> moved;
    std::vector<ComplexField> gs;
    for (int k = 0; k < transforms; ++k) {
        gs.push_back(random_gauge(L, r));
        moved.push_back(gauge_transform(gs.back(), q));
    }
    ck.run("residual_equivariance", 1e-12, [&] {
        double drift = 0;
        for (int k = 0; k < transforms; ++k) {
            const ResidualTriple rg = residual_2d(moved[k]);
            drift = std::max({drift, max_abs(rg.r1, r0.r1), max_abs(rg.r3, r0.r3)});
            for (int s = 0; s < L.size(); ++s)
                for (int a = 0; a < t.n; ++a) {
                    const std::size_t idx = static_cast<std::size_t>(s) * t.n + a;
                    drift = std::max(drift, (rg.r2[idx] - phase_left(t.weight(a) * std::arg(gs[k][s]), r0.r2[idx])).abs());
                }
        }
        return drift;
    });
    ck.run("energy_invariance", 1e-12, [&] {
        double drift = 0;
        for (const auto& m : moved) drift = std::max(drift, std::abs(energy(m) - E0) / std::max(1.0, E0));
        return drift;
    });
    ck.run("coulomb_gauge_defect", 1e-10, [&] { return coulomb_defect(coulomb_gauge_fix(q)); });
    ck.run("coulomb_residual_drift", 1e-12, [&] {
        const double n0 = residual_norms(L, t.n, r0).total();
        return std::abs(residual_norms(L, t.n, residual_2d(coulomb_gauge_fix(q))).total() - n0);
    });
    return rep;
}

inline SuiteReport verify_reduction(std::uint64_t seed, int configs = 10) {
    SuiteReport rep{"reduction", seed, {}, 0};
    detail::Checker ck(rep);
    Rng r(seed);
    ck.run("reduction_4d_vs_2d", 1e-10, [&] {
        double d = 0;
        for (int k = 0; k < configs; ++k) {
            TorusLattice L(12, 12, 1.0, 1.3);
            const Configuration q = random_configuration(L, 0, Target(k % 2 ? 2 : 1), r, 0.8, k % 3 == 0);
            d = std::max(d, reduction_consistency(q));
        }
        return d;
    });
    return rep;
}

inline SuiteReport verify_adjoint(std::uint64_t seed) {
    SuiteReport rep{"adjoint", seed, {}, 0};
    detail::Checker ck(rep);
    Rng r(seed);
    const TorusLattice L = detail::wavy_lattice(10, 14, 1.2, 0.8, r);
    const int N = L.size();
    RealField f(N);
    OneForm v(N);
    for (int s = 0; s < N; ++s) {
        f[s] = r.normal();
        v.x[s] = r.normal();
        v.y[s] = r.normal();
    }
    auto flat = [&](const RealField& a, const RealField& b) {
        return L.cell() * pairwise_sum(a.size(), [&](std::size_t s) { return a[s] * b[s]; });
    };
    auto norm1 = [&](const OneForm& a) { return std::sqrt(inner_1(L, a, a)); };
    const OneForm g = grad(L, f);
    const double fn = std::sqrt(flat(f, f));
    ck.run("hodge_curl_adjointness", 1e-12, [&] {
        return std::abs(inner_1(L, hodge_star(L, g), v) + flat(f, curl(L, v))) / (norm1(g) * norm1(v) + fn * norm1(v));
    });
    ck.run("grad_div_summation_by_parts", 1e-12, [&] {
        return std::abs(inner_1(L, g, v) + flat(f, div(L, v))) / (norm1(g) * norm1(v) + fn * norm1(v));
    });
    ck.run("hodge_square_and_isometry", 1e-12, [&] {
        const OneForm sv = hodge_star(L, v), ssv = hodge_star(L, sv);
        double d = std::abs(norm1(sv) - norm1(v)) / norm1(v);
        for (int s = 0; s < N; ++s) d = std::max({d, std::abs(ssv.x[s] + v.x[s]), std::abs(ssv.y[s] + v.y[s])});
        return d;
    });

    const TorusLattice L16 = detail::wavy_lattice(16, 16, 1.2, 0.9, r, 0.25);
    Configuration q = random_configuration(L16, 1, Target(2, {1, -1}), r, 0.7);
    q.epsilon = 0.6;
    q.tau = 0.4;
    const Layout Lo = layout_of(q);
    ck.run("linearization_fd", 1e-6, [&] {
        double d = 0;
        for (int k = 0; k < 3; ++k) {
            const TangentTriple X = random_tangent(q, r);
            const double h = 1e-5;
            const Vec fp = pack(Lo, residual_2d(displaced(q, X, h))), fm = pack(Lo, residual_2d(displaced(q, X, -h)));
            const Vec an = pack(Lo, apply_Dq(q, X));
            d = std::max(d, ((fp - fm) / (2 * h) - an).norm() / an.norm());
        }
        return d;
    });
    ck.run("linearization_adjoint", 1e-10, [&] {
        double d = 0;
        for (int k = 0; k < 5; ++k) {
            const TangentTriple X = random_tangent(q, r);
            const CotripleValue Y = detail::random_cotriple(q, r);
            const double lhs = cotriple_inner(q, apply_Dq(q, X), Y), rhs = tangent_inner(q, X, apply_Dq_adjoint(q, Y));
            d = std::max(d, std::abs(lhs - rhs) / std::abs(lhs));
        }
        return d;
    });
    ck.run("gauge_composition_ratio", 10.0, [&] {
        const CotripleValue res = residual_2d(q);
        double worst = 0;
        for (int k = 0; k < 5; ++k) {
            const RealField gamma = smooth_field(q.lat, r, 1.0);
            const CotripleValue D = apply_Dq(q, d1(q, gamma));
            const double lhs = std::sqrt(cotriple_inner(q, D, D));
            worst = std::max(worst, lhs / (std::sqrt(cotriple_inner(q, res, res)) * std::sqrt(inner_0(q.lat, gamma, gamma))));
        }
        return worst;
    });
    return rep;
}

// Converged solutions used by the solution-based checks: a flat-metric constant solution of degree 0
// and a degree-1 vortex, both on 16^2 with tau * area = 4 pi.
struct ReferenceSolutions {
    Configuration constant, vortex;
    SolveReport constant_report, vortex_report;
};

inline ReferenceSolutions reference_solutions(int size = 16) {
    TorusLattice L(size, size, 1.0, 1.0);
    SolveOptions o;
    o.tol = 1e-12;
    o.max_iter = 100;
    ReferenceSolutions ref;
    std::tie(ref.constant, ref.constant_report) = solve(vortex_initial_guess(L, 0, 1.0, 4 * std::numbers::pi), o);
    std::tie(ref.vortex, ref.vortex_report) = solve(vortex_initial_guess(L, 1, 1.0, 4 * std::numbers::pi), o);
    return ref;
}

inline SuiteReport verify_symplectic(std::uint64_t seed, const ReferenceSolutions* ref = nullptr) {
    SuiteReport rep{"symplectic", seed, {}, 0};
    detail::Checker ck(rep);
    Rng r(seed);
    const TorusLattice L = detail::wavy_lattice(16, 16, 1.3, 0.8, r);
    ck.run("config_structure_relations", 1e-12, [&] {
        const Configuration q = random_configuration(L, 1, Target(2, {1, 3}), r);
        return detail::config_structure_defect(q, r, 20);
    });
    double ham_re = 0, ham_c = 0;
    ck.run("hamiltonian_real_moment", 1e-6, [&] {
        for (int d : {0, 1}) {
            const Configuration q = random_configuration(L, d, Target(2, {1, -1}), r, 0.6);
            for (int k = 0; k < 4; ++k) {
                const RealField gamma = random_function(L, r);
                TangentTriple X = random_tangent(q, r);
                if (k % 2 == 1) X = apply_config_structure(q, 1, d1(q, random_function(L, r)));
                const HamiltonianDefects h = verify_hamiltonian_identity(q, gamma, X, 1e-4);
                ham_re = std::max(ham_re, h.real_part);
                ham_c = std::max(ham_c, h.complex_part);
            }
        }
        return ham_re;
    });
    ck.run("hamiltonian_complex_moment", 1e-6, [&] { return ham_c; });
    ck.run("complex_subspace_pointwise", 1e-12, [&] {
        double d = 0;
        for (int t = 0; t < 10; ++t) {
            const Configuration q = random_configuration(L, 1, Target(2, {1, 2}), r, 1.0);
            const LemmaIdentityDefects x = lemma_identity_defects(q, random_tangent(q, r));
            d = std::max({d, x.lie, x.higgs, x.moment});
        }
        return d;
    });
    ck.run("adjoint_vanishing_identity", 1e-10, [&] {
        double d = 0;
        for (int t = 0; t < 10; ++t) {
            const Configuration q = random_configuration(L, 1, Target(2, {1, -2}), r, 1.0);
            ComplexField eta(static_cast<std::size_t>(L.size()));
            for (auto& z : eta) z = cplx(r.normal(), r.normal());
            SpinorField xi(q.u.size());
            for (auto& h : xi) h = r.quat();
            d = std::max(d, adjoint_vanishing_identity(q, eta, xi).defect);
        }
        return d;
    });
    double form_fd = 0, form_anti = 0, form_const = 0;
    ck.run("gamma_form_hessian", 1e-6, [&] {
        const TorusLattice L8 = detail::wavy_lattice(8, 8, 1.0, 1.0, r);
        const Configuration q = random_configuration(L8, 1, Target(2), r);
        for (int t = 0; t < 10; ++t) {
            const TangentTriple X = random_tangent(q, r), Y = random_tangent(q, r);
            const CurvatureForms c = curvature_bilinear_forms(q, X, Y), s = curvature_bilinear_forms(q, Y, X);
            form_fd = std::max(form_fd, std::abs(c.gamma_fd - c.gamma_analytic));
            form_anti = std::max({form_anti, std::abs(c.tau + s.tau), std::abs(curvature_bilinear_forms(q, X, X).tau)});
            form_const = std::max({form_const, std::abs(c.gamma_analytic - CurvatureConventions::gamma_to_omega * c.omega_spinor),
                                   std::abs(c.tau - CurvatureConventions::tau_to_omega() * c.omega_higgs)});
        }
        return form_fd;
    });
    ck.run("tau_form_antisymmetry", 1e-12, [&] { return form_anti; });
    ck.run("curvature_block_constants", 1e-8, [&] { return form_const; });

    ReferenceSolutions local;
    if (!ref) {
        local = reference_solutions();
        ref = &local;
    }
    ck.run("complex_subspace_invariance_constant", 1e-6, [&] { return check_Cprime_invariance(ref->constant).defect; });
    ck.run("complex_subspace_invariance_vortex", 1e-6, [&] { return check_Cprime_invariance(ref->vortex).defect; });
    return rep;
}

inline SuiteReport run_suite(const std::string& name, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteReport rep;
    if (name == "algebra") rep = verify_algebra(seed);
    else if (name == "moment") rep = verify_moment(seed);
    else if (name == "gauge") rep = verify_gauge(seed);
    else if (name == "reduction") rep = verify_reduction(seed);
    else if (name == "adjoint") rep = verify_adjoint(seed);
    else if (name == "symplectic") rep = verify_symplectic(seed);
    else throw std::invalid_argument("unknown suite '" + name + "'");
    rep.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace swlab

// Prints one PASS/FAIL line per acceptance criterion, with measured values and wall time.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "swlab/index.hpp"
#include "swlab/verify.hpp"

using namespace swlab;

namespace {

using Clock = std::chrono::steady_clock;
constexpr double pi = std::numbers::pi;
constexpr std::uint64_t seed = 20240601;

int failures = 0;

struct Outcome {
    bool pass = true;
    std::ostringstream note;

    void need(bool ok, const std::string& what) {
        pass = pass && ok;
        note << (ok ? "" : "[x] ") << what << "; ";
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

void criterion(int k, const std::string& title, double budget_s, const std::function<void(Outcome&)>& body) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.need(false, std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(Clock::now() - t0).count();
    o.need(s < budget_s, "time " + fmt(s) + " s (budget " + fmt(budget_s) + " s)");
    if (!o.pass) ++failures;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", k, title.c_str(), o.note.str().c_str());
    std::fflush(stdout);
}

const CheckResult& find_check(const SuiteReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return c;
    throw std::runtime_error("no check named " + name);
}

void need_check(Outcome& o, const SuiteReport& r, const std::string& name) {
    const CheckResult& c = find_check(r, name);
    o.need(c.passed(), name + " " + fmt(c.defect) + " <= " + fmt(c.tolerance));
}

void need_suite(Outcome& o, const SuiteReport& r) {
    for (const auto& c : r.checks) o.need(c.passed(), c.name + " " + fmt(c.defect) + " <= " + fmt(c.tolerance));
}

double composition_ratio(const Configuration& q, Rng& r) {
    const CotripleValue res = residual_2d(q);
    const double fn = std::sqrt(cotriple_inner(q, res, res));
    double worst = 0;
    for (int k = 0; k < 5; ++k) {
        const RealField gamma = smooth_field(q.lat, r, 1.0);
        const CotripleValue D = apply_Dq(q, d1(q, gamma));
        worst = std::max(worst, std::sqrt(cotriple_inner(q, D, D)) / (fn * std::sqrt(inner_0(q.lat, gamma, gamma))));
    }
    return worst;
}

double complex_moment_sup(const Configuration& q) {
    double m = 0;
    for (int s = 0; s < q.sites(); ++s) {
        const Quaternion v = moment_map(q.target, q.at(s)).q();
        m = std::max(m, std::hypot(v.y, v.z));
    }
    return m;
}

}  // namespace

int main() {
    std::printf("acceptance run, seed %llu\n", static_cast<unsigned long long>(seed));

    criterion(1, "algebra suite", 1.0, [](Outcome& o) { need_suite(o, verify_algebra(seed, 1000)); });
    criterion(2, "moment map axioms", 1.0, [](Outcome& o) { need_suite(o, verify_moment(seed, 100)); });
    criterion(3, "dimensional reduction", 10.0, [](Outcome& o) { need_suite(o, verify_reduction(seed, 10)); });
    criterion(4, "gauge invariance", 5.0, [](Outcome& o) { need_suite(o, verify_gauge(seed, 50)); });

    const auto t_ref = Clock::now();
    const ReferenceSolutions ref = reference_solutions(16);
    const double ref_s = std::chrono::duration<double>(Clock::now() - t_ref).count();
    std::printf("     reference solutions on 16^2: constant |F| %s, vortex |F| %s, %s s\n",
                fmt(ref.constant_report.final.total()).c_str(), fmt(ref.vortex_report.final.total()).c_str(), fmt(ref_s).c_str());

    criterion(5, "linearization", 30.0, [&](Outcome& o) {
        const SuiteReport a = verify_adjoint(seed);
        need_check(o, a, "linearization_fd");
        need_check(o, a, "linearization_adjoint");
        Rng r(seed);
        const double cv = composition_ratio(ref.vortex, r), cc = composition_ratio(ref.constant, r);
        o.need(cv <= 10, "composition at vortex " + fmt(cv) + " <= 10");
        o.need(cc <= 10, "composition at constant solution " + fmt(cc) + " <= 10");
    });

    criterion(6, "index reproduction", 6 * 60.0, [&](Outcome& o) {
        std::ostringstream got;
        bool dbar_ok = true;
        double worst_s = 0;
        auto timed = [&](const Configuration& q, IndexOperator op) {
            const auto t0 = Clock::now();
            const IndexResult r = numerical_index(q, op);
            worst_s = std::max(worst_s, std::chrono::duration<double>(Clock::now() - t0).count());
            return r.index;
        };
        for (int n : {16, 24})
            for (int d = -2; d <= 2; ++d) {
                const int ind = timed(Configuration(TorusLattice(n, n, 1, 1), d, Target(1)), IndexOperator::dbar);
                got << ind << (d < 2 ? "," : n == 16 ? " / " : "");
                dbar_ok = dbar_ok && ind == d;
            }
        o.need(dbar_ok, "dbar index for d=-2..2 on 16^2 / 24^2: " + got.str());
        const int sd = timed(Configuration(TorusLattice(16, 16, 1, 1), 0, Target(1)), IndexOperator::star_dbar);
        o.need(sd == 2, "star-dbar block index " + std::to_string(sd) + " == 2");
        const Configuration& q = ref.vortex;
        const int a = timed(q, IndexOperator::star_d), b = timed(q, IndexOperator::dirac), c = timed(q, IndexOperator::star_dbar);
        const int f = timed(q, IndexOperator::full);
        o.need(f == a + b + c, "full " + std::to_string(f) + " == blocks " + std::to_string(a) + "+" + std::to_string(b) + "+" +
                                   std::to_string(c) + " at the 16^2 vortex");
        o.need(worst_s < 60, "slowest single index " + fmt(worst_s) + " s < 60");
    });

    Configuration vortex64;
    for (int d : {1, 2}) {
        criterion(7, "vortex solve d=" + std::to_string(d) + " on 64^2", 300.0, [&](Outcome& o) {
            const double tau_area = 4 * pi * d;
            SolveOptions opt;
            opt.tol = 1e-8;
            opt.max_iter = 10000;
            auto [q, rep] = solve(vortex_initial_guess(TorusLattice(64, 64, 1, 1), d, 1.0, tau_area), opt);
            o.need(rep.converged && rep.final.total() <= 1e-8,
                   "|F| " + fmt(rep.final.total()) + " <= 1e-8 after " + std::to_string(rep.iterations) + " iterations");
            const int count = count_vortices(q).count;
            o.need(count == d, "vortex count " + std::to_string(count) + " == " + std::to_string(d));
            o.note << "tau*area = " << d * 4 << "pi; ";
            if (d == 1) vortex64 = q;
        });
    }

    const SuiteReport symp = verify_symplectic(seed, &ref);

    criterion(8, "symplectic suite", 60.0, [&](Outcome& o) {
        double ms = 0;
        for (const char* n : {"hamiltonian_real_moment", "hamiltonian_complex_moment", "complex_subspace_invariance_constant",
                              "complex_subspace_invariance_vortex"}) {
            need_check(o, symp, n);
            ms += find_check(symp, n).ms;
        }
        o.need(ms < 60e3, "check time " + fmt(ms / 1000) + " s < 60");
    });

    criterion(9, "curvature forms", 10.0, [&](Outcome& o) {
        double ms = 0;
        for (const char* n : {"gamma_form_hessian", "tau_form_antisymmetry", "curvature_block_constants"}) {
            need_check(o, symp, n);
            ms += find_check(symp, n).ms;
        }
        o.need(ms < 10e3, "check time " + fmt(ms / 1000) + " s < 10");
    });

    criterion(10, "adjoint vanishing and surjectivity", 120.0, [&](Outcome& o) {
        need_check(o, symp, "adjoint_vanishing_identity");
        const Configuration& q = ref.constant;
        const double muc = complex_moment_sup(q);
        o.need(muc <= 1e-12, "sup |mu_c(u)| " + fmt(muc) + " at the 16^2 constant solution");
        const SurjectivityReport s = surjectivity_margin(q);
        o.need(s.sigma_min > 0 && s.relative >= 1e-6, "sigma_min/sigma_max of D_q* " + fmt(s.relative) + " >= 1e-6");
        const SurjectivityReport v = surjectivity_margin(ref.vortex);
        o.note << "at the 16^2 vortex the same ratio is " << fmt(v.relative) << "; ";
    });

    criterion(11, "epsilon continuation on 64^2", 600.0, [&](Outcome& o) {
        if (vortex64.sites() == 0) throw std::runtime_error("no 64^2 vortex to continue from");
        SolveOptions opt;
        opt.tol = 1e-6;
        opt.epsilon_schedule = {1.0, 0.75, 0.5, 0.25, 0.0};
        const auto stages = epsilon_continuation(vortex64, opt);
        std::ostringstream eps;
        bool all = !stages.empty() && stages.back().epsilon == 0.0;
        for (const auto& st : stages) {
            eps << st.epsilon << (st.report.converged ? "" : "(x)") << " ";
            if (st.epsilon > 0) all = all && st.report.converged && st.report.final.total() <= 1e-6;
        }
        o.need(all, "stages " + eps.str());
        const double m = stages.empty() ? INFINITY : moment_defect(stages.back().q);
        o.need(m <= 1e-5, "|mu(u)| at epsilon 0: " + fmt(m) + " <= 1e-5");
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

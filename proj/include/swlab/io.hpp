#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "index.hpp"
#include "sampling.hpp"
#include "solver.hpp"

namespace swlab {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- SWV1 binary

namespace detail {

class LeWriter {
public:
    explicit LeWriter(std::ostream& os) : os_(os) {}
    template <class T>
    void put(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
        os_.write(reinterpret_cast<const char*>(b), sizeof(T));
    }

private:
    std::ostream& os_;
};

class LeReader {
public:
    explicit LeReader(std::istream& is) : is_(is) {}
    template <class T>
    T get() {
        unsigned char b[sizeof(T)];
        if (!is_.read(reinterpret_cast<char*>(b), sizeof(T))) throw IoError("truncated SWV1 file");
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
        T v;
        std::memcpy(&v, b, sizeof(T));
        return v;
    }

private:
    std::istream& is_;
};

inline constexpr char swv_magic[4] = {'S', 'W', 'V', 'F'};

}  // namespace detail

inline void write_swv(std::ostream& os, const Configuration& q) {
    detail::LeWriter w(os);
    os.write(detail::swv_magic, 4);
    w.put<std::uint32_t>(1);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(q.lat.Nx));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(q.lat.Ny));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(q.n()));
    w.put<std::int32_t>(q.bundle.degree);
    w.put(q.lat.Lx);
    w.put(q.lat.Ly);
    w.put(q.epsilon);
    w.put(q.tau);
    const int N = q.sites();
    for (int s = 0; s < N; ++s) {
        w.put(q.ax[s]);
        w.put(q.ay[s]);
    }
    for (const Quaternion& h : q.u)
        for (int c = 0; c < 4; ++c) w.put(h[c]);
    for (const cplx& z : q.phi) {
        w.put(z.real());
        w.put(z.imag());
    }
    for (double c : q.lat.conformal) w.put(c);
}

// the binary layout carries no target weights; they default to 1 unless supplied
inline Configuration read_swv(std::istream& is, const std::optional<std::vector<int>>& weights = std::nullopt) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, detail::swv_magic, 4) != 0) throw IoError("not an SWV1 file (bad magic)");
    detail::LeReader r(is);
    const auto version = r.get<std::uint32_t>();
    if (version != 1) throw IoError("unsupported SWV version " + std::to_string(version));
    const auto nx = r.get<std::uint32_t>(), ny = r.get<std::uint32_t>(), n = r.get<std::uint32_t>();
    const auto degree = r.get<std::int32_t>();
    if (nx < 4 || ny < 4 || nx > 4096 || ny > 4096 || n < 1 || n > 64) throw IoError("SWV1 header has implausible sizes");
    const double Lx = r.get<double>(), Ly = r.get<double>(), eps = r.get<double>(), tau = r.get<double>();
    const int N = static_cast<int>(nx * ny);
    RealField ax(N), ay(N);
    for (int s = 0; s < N; ++s) {
        ax[s] = r.get<double>();
        ay[s] = r.get<double>();
    }
    SpinorField u(static_cast<std::size_t>(N) * n);
    for (auto& h : u)
        for (int c = 0; c < 4; ++c) h[c] = r.get<double>();
    ComplexField phi(N);
    for (auto& z : phi) {
        const double re = r.get<double>();
        z = cplx(re, r.get<double>());
    }
    TorusLattice L;
    L.Nx = static_cast<int>(nx);
    L.Ny = static_cast<int>(ny);
    L.Lx = Lx;
    L.Ly = Ly;
    L.conformal.resize(N);
    for (auto& c : L.conformal) c = r.get<double>();
    try {
        L.validate();
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("SWV1 lattice invalid: ") + e.what());
    }
    Configuration q(L, degree, weights ? Target(static_cast<int>(n), *weights) : Target(static_cast<int>(n)));
    q.ax = std::move(ax);
    q.ay = std::move(ay);
    q.u = std::move(u);
    q.phi = std::move(phi);
    q.epsilon = eps;
    q.tau = tau;
    return q;
}

inline void save_swv(const std::filesystem::path& p, const Configuration& q) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw IoError("cannot open '" + p.string() + "' for writing");
    write_swv(os, q);
    if (!os) throw IoError("write failed for '" + p.string() + "'");
}

inline Configuration load_swv(const std::filesystem::path& p, const std::optional<std::vector<int>>& weights = std::nullopt) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw IoError("cannot open '" + p.string() + "'");
    return read_swv(is, weights);
}

// ---------------------------------------------------------------- JSON mirror

using json = nlohmann::json;

inline json to_json(const Configuration& q) {
    json j;
    j["magic"] = "SWVF";
    j["version"] = 1;
    j["Nx"] = q.lat.Nx;
    j["Ny"] = q.lat.Ny;
    j["n"] = q.n();
    j["degree"] = q.bundle.degree;
    j["Lx"] = q.lat.Lx;
    j["Ly"] = q.lat.Ly;
    j["epsilon"] = q.epsilon;
    j["tau"] = q.tau;
    j["weights"] = q.target.weights;
    std::vector<double> a, u, phi;
    for (int s = 0; s < q.sites(); ++s) {
        a.push_back(q.ax[s]);
        a.push_back(q.ay[s]);
        phi.push_back(q.phi[s].real());
        phi.push_back(q.phi[s].imag());
    }
    for (const auto& h : q.u)
        for (int c = 0; c < 4; ++c) u.push_back(h[c]);
    j["a"] = a;
    j["u"] = u;
    j["phi"] = phi;
    j["conformal"] = q.lat.conformal;
    return j;
}

inline Configuration configuration_from_json(const json& j) {
    try {
        const int nx = j.at("Nx"), ny = j.at("Ny"), n = j.at("n");
        TorusLattice L(nx, ny, j.at("Lx"), j.at("Ly"));
        L.conformal = j.at("conformal").get<std::vector<double>>();
        L.validate();
        Target t = j.contains("weights") ? Target(n, j.at("weights").get<std::vector<int>>()) : Target(n);
        Configuration q(L, j.at("degree").get<int>(), t);
        q.epsilon = j.at("epsilon");
        q.tau = j.at("tau");
        const auto a = j.at("a").get<std::vector<double>>();
        const auto u = j.at("u").get<std::vector<double>>();
        const auto phi = j.at("phi").get<std::vector<double>>();
        const auto N = static_cast<std::size_t>(L.size());
        if (a.size() != 2 * N || u.size() != 4 * N * n || phi.size() != 2 * N) throw IoError("JSON field arrays have wrong length");
        for (std::size_t s = 0; s < N; ++s) {
            q.ax[s] = a[2 * s];
            q.ay[s] = a[2 * s + 1];
            q.phi[s] = cplx(phi[2 * s], phi[2 * s + 1]);
        }
        for (std::size_t k = 0; k < q.u.size(); ++k)
            for (int c = 0; c < 4; ++c) q.u[k][c] = u[4 * k + c];
        return q;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed field JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("invalid field JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------- run configuration

struct RunConfig {
    int Nx = 32, Ny = 32;
    double Lx = 1.0, Ly = 1.0;
    std::string conformal = "flat";  // flat | wave:<amplitude>
    int degree = 1;
    int n = 1;
    std::vector<int> weights{1};
    double epsilon = 1.0;
    std::optional<double> tau, tau_area;
    std::string initial = "vortex";  // vortex | random | file:<path>
    double ripple = 0.1;
    SolveOptions solver;
    std::string output_dir = ".";
    std::string prefix = "run";
    std::uint64_t seed = 0;

    double tau_value(const TorusLattice& L) const { return tau ? *tau : tau_area ? *tau_area / L.area() : 0.0; }
};

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    std::istringstream is(v);
    T x{};
    if (!(is >> x) || !is.eof()) throw ConfigError("key '" + key + "': cannot parse '" + v + "'");
    return x;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
    std::vector<T> out;
    for (const auto& item : split(v, ',')) out.push_back(parse_number<T>(key, item));
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

}  // namespace detail

inline std::vector<double> parse_schedule(const std::string& v) { return detail::parse_list<double>("schedule", v); }

inline void validate(const RunConfig& c) {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (c.Nx < 4 || c.Ny < 4) fail("lattice needs at least 4 sites per direction");
    if (!(c.Lx > 0 && c.Ly > 0)) fail("torus periods must be positive");
    if (c.n < 1) fail("target dimension n must be >= 1");
    if (static_cast<int>(c.weights.size()) != c.n) fail("weights must list n entries");
    if (!(c.epsilon >= 0 && c.epsilon <= 1)) fail("epsilon must lie in [0,1]");
    if (c.tau && c.tau_area) fail("give tau or tau_area, not both");
    if (c.conformal != "flat") {
        if (c.conformal.rfind("wave:", 0) != 0) fail("conformal must be 'flat' or 'wave:<amplitude>'");
        const double a = detail::parse_number<double>("conformal", c.conformal.substr(5));
        if (!(a >= 0 && a < 1)) fail("conformal wave amplitude must lie in [0,1)");
    }
    if (c.initial != "vortex" && c.initial != "random" && c.initial.rfind("file:", 0) != 0)
        fail("initial must be 'vortex', 'random' or 'file:<path>'");
    if (c.initial == "vortex" && c.n != 1) fail("initial=vortex needs n = 1");
    if (c.prefix.empty() || c.prefix.find('/') != std::string::npos) fail("prefix must be a plain file name stem");
    try {
        c.solver.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
}

inline RunConfig parse_run_config(std::istream& is) {
    RunConfig c;
    std::map<std::string, std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string k = detail::trim(line.substr(0, eq)), v = detail::trim(line.substr(eq + 1));
        if (k.empty() || v.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        if (!seen.emplace(k, v).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + k + "'");
        using detail::parse_number;
        if (k == "Nx") c.Nx = parse_number<int>(k, v);
        else if (k == "Ny") c.Ny = parse_number<int>(k, v);
        else if (k == "Lx") c.Lx = parse_number<double>(k, v);
        else if (k == "Ly") c.Ly = parse_number<double>(k, v);
        else if (k == "conformal") c.conformal = v;
        else if (k == "degree") c.degree = parse_number<int>(k, v);
        else if (k == "n") c.n = parse_number<int>(k, v);
        else if (k == "weights") c.weights = detail::parse_list<int>(k, v);
        else if (k == "epsilon") c.epsilon = parse_number<double>(k, v);
        else if (k == "tau") c.tau = parse_number<double>(k, v);
        else if (k == "tau_area") c.tau_area = parse_number<double>(k, v);
        else if (k == "tau_area_over_pi") c.tau_area = std::numbers::pi * parse_number<double>(k, v);
        else if (k == "initial") c.initial = v;
        else if (k == "ripple") c.ripple = parse_number<double>(k, v);
        else if (k == "method") {
            try {
                c.solver.method = parse_solve_method(v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        } else if (k == "tol") c.solver.tol = parse_number<double>(k, v);
        else if (k == "max_iter") c.solver.max_iter = parse_number<int>(k, v);
        else if (k == "gauge_fix") {
            if (v != "coulomb" && v != "none") throw ConfigError("gauge_fix must be 'coulomb' or 'none'");
            c.solver.gauge_fix = v == "coulomb";
        } else if (k == "damping") c.solver.damping = parse_number<double>(k, v);
        else if (k == "step") c.solver.step = parse_number<double>(k, v);
        else if (k == "epsilon_schedule") c.solver.epsilon_schedule = detail::parse_list<double>(k, v);
        else if (k == "penalty_weights") c.solver.penalty_weights = detail::parse_list<double>(k, v);
        else if (k == "checkpoint_every") c.solver.checkpoint_every = parse_number<int>(k, v);
        else if (k == "output_dir") c.output_dir = v;
        else if (k == "prefix") c.prefix = v;
        else if (k == "seed") c.seed = parse_number<std::uint64_t>(k, v);
        else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + k + "'");
    }
    if (!seen.count("n") && !seen.count("weights")) c.weights = {1};
    if (seen.count("n") && !seen.count("weights")) c.weights.assign(static_cast<std::size_t>(std::max(c.n, 0)), 1);
    if (c.solver.checkpoint_every < 0) throw ConfigError("checkpoint_every must be non-negative");
    validate(c);
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& p) {
    std::ifstream is(p);
    if (!is) throw ConfigError("cannot read config '" + p.string() + "'");
    return parse_run_config(is);
}

inline TorusLattice make_lattice(const RunConfig& c) {
    TorusLattice L(c.Nx, c.Ny, c.Lx, c.Ly);
    if (c.conformal != "flat") {
        const double a = std::stod(c.conformal.substr(5));
        for (int s = 0; s < L.size(); ++s) {
            const double x = 2 * std::numbers::pi * L.ix(s) / L.Nx, y = 2 * std::numbers::pi * L.iy(s) / L.Ny;
            L.conformal[s] = 1 + a * std::sin(x) * std::cos(y);
        }
    }
    return L;
}

inline Configuration initial_configuration(const RunConfig& c) {
    const TorusLattice L = make_lattice(c);
    Configuration q;
    if (c.initial == "vortex") {
        q = vortex_initial_guess(L, c.degree, c.epsilon, c.tau_value(L) * L.area(), c.ripple);
    } else if (c.initial == "random") {
        Rng r(c.seed);
        q = random_configuration(L, c.degree, Target(c.n, c.weights), r, c.ripple, true);
    } else {
        q = load_swv(c.initial.substr(5), c.weights);
        if (q.lat.Nx != c.Nx || q.lat.Ny != c.Ny || q.n() != c.n || q.bundle.degree != c.degree)
            throw ConfigError("initial field file does not match the configured lattice, target or degree");
    }
    q.epsilon = c.epsilon;
    q.tau = c.tau_value(L);
    return q;
}

// ---------------------------------------------------------------- reports

inline void write_history_csv(std::ostream& os, const std::vector<IterRecord>& h) {
    os << "iter,energy,r1,r2,r3,gauge_defect,wall_ms\n";
    os.precision(17);
    for (const auto& r : h)
        os << r.iter << ',' << r.energy << ',' << r.r1 << ',' << r.r2 << ',' << r.r3 << ',' << r.gauge_defect << ',' << r.wall_ms << '\n';
}

inline json to_json(const SolveReport& r) {
    return {{"converged", r.converged},
            {"diverged", r.diverged},
            {"iterations", r.iterations},
            {"residual", {{"r1", r.final.r1}, {"r2", r.final.r2}, {"r3", r.final.r3}, {"total", r.final.total()}}},
            {"energy", r.energy},
            {"gauge_defect", r.gauge_defect},
            {"moment_defect", r.moment_defect},
            {"wall_ms", r.wall_ms},
            {"message", r.message}};
}

inline json to_json(const IndexResult& r, std::optional<int> expected) {
    json j = {{"operator", r.op},
              {"degree", r.degree},
              {"lattice", std::to_string(r.Nx) + "x" + std::to_string(r.Ny)},
              {"dim_ker", r.dim_ker},
              {"dim_coker", r.dim_coker},
              {"smooth_ker", r.smooth_ker},
              {"smooth_coker", r.smooth_coker},
              {"index", r.index},
              {"real_per_unit", r.real_per_unit},
              {"sigma_gap", std::isfinite(r.sigma_gap) ? json(r.sigma_gap) : json(nullptr)},
              {"sigma_max", r.sigma_max}};
    if (expected) {
        j["expected"] = *expected;
        j["matches_expected"] = *expected == r.index;
    }
    return j;
}

// per-site table for export
inline void write_fields_csv(std::ostream& os, const Configuration& q) {
    os << "ix,iy,ax,ay";
    for (int a = 0; a < q.n(); ++a) os << ",u" << a << "_w,u" << a << "_x,u" << a << "_y,u" << a << "_z";
    os << ",phi_re,phi_im,conformal,curvature\n";
    os.precision(17);
    const RealField F = curvature(q);
    for (int s = 0; s < q.sites(); ++s) {
        os << q.lat.ix(s) << ',' << q.lat.iy(s) << ',' << q.ax[s] << ',' << q.ay[s];
        for (int a = 0; a < q.n(); ++a)
            for (int c = 0; c < 4; ++c) os << ',' << q.uc(s, a)[c];
        os << ',' << q.phi[s].real() << ',' << q.phi[s].imag() << ',' << q.lat.conformal[s] << ',' << F[s] << '\n';
    }
}

}  // namespace swlab

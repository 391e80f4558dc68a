#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "swlab/io.hpp"
#include "swlab/verify.hpp"

namespace fs = std::filesystem;
using namespace swlab;

namespace {

enum Exit { ok = 0, failed_check = 1, config_error = 2, divergence = 3, io_error = 4, ambiguous_gap = 5 };

int threads_from_env() {
    const char* v = std::getenv("SWV_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1 || n > 1024) throw ConfigError(std::string("SWV_THREADS must be a positive integer, got '") + v + "'");
    return static_cast<int>(n);
}

void require_dir(const std::string& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("output directory '" + dir + "' does not exist");
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    if (!os) throw IoError("cannot open '" + p.string() + "' for writing");
    os << text;
    if (!os) throw IoError("write failed for '" + p.string() + "'");
}

std::string csv_of(const std::vector<IterRecord>& h) {
    std::ostringstream os;
    write_history_csv(os, h);
    return os.str();
}

json config_echo(const RunConfig& c) {
    return {{"Nx", c.Nx}, {"Ny", c.Ny}, {"Lx", c.Lx}, {"Ly", c.Ly}, {"conformal", c.conformal}, {"degree", c.degree},
            {"n", c.n}, {"weights", c.weights}, {"epsilon", c.epsilon}, {"initial", c.initial}, {"seed", c.seed},
            {"tol", c.solver.tol}, {"max_iter", c.solver.max_iter}, {"gauge_fix", c.solver.gauge_fix ? "coulomb" : "none"}};
}

int exit_for(const SolveReport& r) { return r.converged ? ok : r.diverged ? divergence : failed_check; }

int cmd_solve(const std::string& config_path, int threads) {
    const RunConfig c = load_run_config(config_path);
    require_dir(c.output_dir);
    const Configuration q0 = initial_configuration(c);
    const fs::path base = fs::path(c.output_dir) / c.prefix;
    SolveOptions opt = c.solver;
    if (opt.checkpoint_every > 0)
        opt.on_checkpoint = [&](const Configuration& q, int) { save_swv(base.string() + "_checkpoint.swv", q); };
    auto [q, rep] = solve(q0, opt);
    save_swv(base.string() + ".swv", q);
    write_text(base.string() + ".csv", csv_of(rep.history));
    const VortexCount vc = count_vortices(q);
    json j = {{"command", "solve"}, {"config", config_echo(c)}, {"tau", q.tau}, {"threads", threads}, {"report", to_json(rep)},
              {"vortex_count", vc.count}, {"vortex_count_degenerate", vc.degenerate}};
    write_text(base.string() + ".json", j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    if (!rep.converged) std::cerr << "solve: " << rep.message << "\n";
    return exit_for(rep);
}

int cmd_scan(const std::string& config_path, const std::string& schedule, int threads) {
    RunConfig c = load_run_config(config_path);
    try {
        c.solver.epsilon_schedule = parse_schedule(schedule);
        c.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    require_dir(c.output_dir);
    c.epsilon = c.solver.epsilon_schedule.front();
    const Configuration q0 = initial_configuration(c);
    const fs::path base = fs::path(c.output_dir) / c.prefix;
    const auto stages = epsilon_continuation(q0, c.solver);
    json arr = json::array();
    std::vector<IterRecord> all;
    int code = ok;
    for (std::size_t k = 0; k < stages.size(); ++k) {
        const auto& st = stages[k];
        std::ostringstream tag;
        tag << base.string() << "_stage" << k << ".swv";
        save_swv(tag.str(), st.q);
        all.insert(all.end(), st.report.history.begin(), st.report.history.end());
        arr.push_back({{"epsilon", st.epsilon}, {"file", tag.str()}, {"report", to_json(st.report)},
                       {"vortex_count", count_vortices(st.q).count}});
        if (!st.report.converged) code = st.report.diverged ? divergence : failed_check;
    }
    if (!stages.empty() && stages.back().epsilon != c.solver.epsilon_schedule.back() && code == ok) code = failed_check;
    write_text(base.string() + "_scan.csv", csv_of(all));
    json j = {{"command", "scan-epsilon"}, {"config", config_echo(c)}, {"schedule", c.solver.epsilon_schedule},
              {"threads", threads}, {"stages", arr}};
    write_text(base.string() + "_scan.json", j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return code;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& out) {
    std::vector<std::string> names;
    if (suite == "all") names = suite_names();
    else if (std::find(suite_names().begin(), suite_names().end(), suite) != suite_names().end()) names = {suite};
    else throw ConfigError("unknown suite '" + suite + "'");
    if (!out.empty()) require_dir(fs::path(out).parent_path().empty() ? "." : fs::path(out).parent_path().string());
    json suites = json::array();
    bool all_ok = true;
    for (const auto& n : names) {
        const SuiteReport r = run_suite(n, seed);
        json checks = json::array();
        for (const auto& c : r.checks) {
            checks.push_back({{"name", c.name}, {"defect", c.defect}, {"tolerance", c.tolerance}, {"passed", c.passed()}});
            if (!c.passed()) std::cerr << "FAILED " << n << "/" << c.name << ": defect " << c.defect << " > " << c.tolerance << "\n";
        }
        suites.push_back({{"suite", n}, {"passed", r.passed()}, {"checks", checks}});
        all_ok = all_ok && r.passed();
    }
    const json j = {{"command", "verify"}, {"seed", seed}, {"passed", all_ok}, {"suites", suites}};
    if (!out.empty()) write_text(out, j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return all_ok ? ok : failed_check;
}

int cmd_index(const std::string& op_name, int degree, const std::string& size, const std::string& field) {
    IndexOperator op;
    try {
        op = parse_index_operator(op_name);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    Configuration q;
    if (!field.empty()) {
        q = load_swv(field);
        if (q.lat.Nx > 32 || q.lat.Ny > 32) throw ConfigError("index computations need a lattice of at most 32x32");
    } else {
        int nx = 0, ny = 0;
        char x = 0;
        std::istringstream is(size);
        if (!(is >> nx >> x >> ny) || x != 'x' || !is.eof()) throw ConfigError("size must look like 16x16");
        if (nx > 32 || ny > 32) throw ConfigError("index computations need a lattice of at most 32x32");
        try {
            q = Configuration(TorusLattice(nx, ny, 1.0, 1.0), degree, Target(1));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    try {
        const IndexResult r = numerical_index(q, op);
        const int expected = expected_index(q, op);
        const json j = to_json(r, expected);
        std::cout << j.dump(2) << "\n";
        return r.index == expected ? ok : failed_check;
    } catch (const AmbiguousGap& e) {
        std::cerr << "index: ambiguous spectral gap: " << e.what() << "\n";
        return ambiguous_gap;
    }
}

int cmd_export(const std::string& in, const std::string& format, const std::string& out) {
    if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
    const Configuration q = load_swv(in);
    std::ostringstream os;
    if (format == "csv") write_fields_csv(os, q);
    else os << to_json(q).dump() << "\n";
    if (out.empty()) std::cout << os.str();
    else write_text(out, os.str());
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice solver for the reduced Seiberg-Witten vortex equations"};
    app.require_subcommand(1);

    std::string config, schedule, suite = "all", op, size = "16x16", in, format = "csv", out, field;
    std::uint64_t seed = 0;
    int degree = 0;

    auto* solve_cmd = app.add_subcommand("solve", "solve from a run configuration");
    solve_cmd->add_option("--config", config, "key=value run configuration")->required();

    auto* verify_cmd = app.add_subcommand("verify", "run identity suites on seeded random data");
    verify_cmd->add_option("--suite", suite, "algebra|moment|gauge|reduction|adjoint|symplectic|all");
    verify_cmd->add_option("--seed", seed, "random seed");
    verify_cmd->add_option("--out", out, "also write the JSON report here");

    auto* index_cmd = app.add_subcommand("index", "numerical Fredholm index");
    index_cmd->add_option("--op", op, "dbar|star-d|star-dbar|dirac|full")->required();
    index_cmd->add_option("--degree", degree, "bundle degree");
    index_cmd->add_option("--size", size, "lattice as NxN (at most 32x32)");
    index_cmd->add_option("--field", field, "evaluate at a stored SWV1 field instead of the trivial background");

    auto* scan_cmd = app.add_subcommand("scan-epsilon", "epsilon continuation");
    scan_cmd->add_option("--config", config, "key=value run configuration")->required();
    scan_cmd->add_option("--schedule", schedule, "comma separated, non-increasing")->required();

    auto* export_cmd = app.add_subcommand("export", "convert an SWV1 field file");
    export_cmd->add_option("--in", in, "SWV1 file")->required();
    export_cmd->add_option("--format", format, "csv|json");
    export_cmd->add_option("--out", out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return config_error;
    }

#ifdef SWLAB_HODGE_MUTATION
    set_hodge_sign_mutation(true);
#endif
    try {
        const int threads = threads_from_env();
        Eigen::setNbThreads(threads);
        if (*solve_cmd) return cmd_solve(config, threads);
        if (*scan_cmd) return cmd_scan(config, schedule, threads);
        if (*verify_cmd) return cmd_verify(suite, seed, out);
        if (*index_cmd) return cmd_index(op, degree, size, field);
        if (*export_cmd) return cmd_export(in, format, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return io_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failed_check;
    }
    return ok;
}

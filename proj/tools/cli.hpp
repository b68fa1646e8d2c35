#pragma once

// Command-line front end for the qnopt library. Kept in a header so the
// test suite can drive dispatch() in-process.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <toml.hpp>

#include "qnopt/qnopt.hpp"

namespace qnopt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { ok = 0, solver_failure = 1, usage_error = 2 };

/// Effective settings: built-in defaults, then the TOML file, then flags.
struct CliConfig {
    SolverConfig solver;
    fs::path out_dir = ".";
};

inline json to_json(const SolverConfig &c) {
    return {{"eps_g", c.eps_g},
            {"eps_b", c.eps_b},
            {"max_iter", c.max_iter},
            {"rho", c.ls.rho},
            {"sigma", c.ls.sigma},
            {"alpha_init", c.ls.alpha_init},
            {"alpha_max", c.ls.alpha_max},
            {"max_trials", c.ls.max_trials},
            {"tau_cap", c.tau_cap},
            {"pair_mode", std::string(to_string(c.pair_mode))},
            {"variant", std::string(to_string(c.variant))},
            {"b_init", c.b_init},
            {"clamp_stored", c.clamp_stored},
            {"monotone_inertia", c.monotone_inertia}};
}

namespace detail {

inline double number(const toml::node &node, std::string_view key) {
    if (auto v = node.value<double>())
        return *v;
    throw Error(ErrorCode::InvalidConfig, "config key '" + std::string(key) + "' must be a number");
}

inline bool boolean(const toml::node &node, std::string_view key) {
    if (auto v = node.value<bool>())
        return *v;
    throw Error(ErrorCode::InvalidConfig, "config key '" + std::string(key) + "' must be a boolean");
}

inline std::string text(const toml::node &node, std::string_view key) {
    if (auto v = node.value<std::string>())
        return *v;
    throw Error(ErrorCode::InvalidConfig, "config key '" + std::string(key) + "' must be a string");
}

inline int integer(const toml::node &node, std::string_view key) {
    if (auto v = node.value<std::int64_t>())
        return static_cast<int>(*v);
    throw Error(ErrorCode::InvalidConfig, "config key '" + std::string(key) + "' must be an integer");
}

inline void apply_line_search_key(LineSearchParams &ls, std::string_view key, const toml::node &node) {
    if (key == "rho")
        ls.rho = number(node, key);
    else if (key == "sigma")
        ls.sigma = number(node, key);
    else if (key == "alpha_init")
        ls.alpha_init = number(node, key);
    else if (key == "alpha_max")
        ls.alpha_max = number(node, key);
    else if (key == "max_trials")
        ls.max_trials = integer(node, key);
    else
        throw Error(ErrorCode::InvalidConfig, "unknown line search key '" + std::string(key) + "'");
}

} // namespace detail

/// Reads a TOML file whose keys match SolverConfig field names. Line-search
/// constants may sit at top level or in an [ls] table.
inline void apply_config_file(CliConfig &cfg, const fs::path &path) {
    toml::table table;
    try {
        table = toml::parse_file(path.string());
    } catch (const toml::parse_error &e) {
        throw Error(ErrorCode::InvalidConfig, path.string() + ": " + std::string(e.description()));
    }
    SolverConfig &s = cfg.solver;
    for (const auto &[k, node] : table) {
        const std::string_view key = k.str();
        if (key == "ls") {
            const toml::table *ls = node.as_table();
            if (!ls)
                throw Error(ErrorCode::InvalidConfig, "config key 'ls' must be a table");
            for (const auto &[lk, lnode] : *ls)
                detail::apply_line_search_key(s.ls, lk.str(), lnode);
        } else if (key == "rho" || key == "sigma" || key == "alpha_init" || key == "alpha_max" ||
                   key == "max_trials") {
            detail::apply_line_search_key(s.ls, key, node);
        } else if (key == "eps_g") {
            s.eps_g = detail::number(node, key);
        } else if (key == "eps_b") {
            s.eps_b = detail::number(node, key);
        } else if (key == "max_iter") {
            s.max_iter = detail::integer(node, key);
        } else if (key == "tau_cap") {
            s.tau_cap = detail::number(node, key);
        } else if (key == "pair_mode") {
            s.pair_mode = parse_pair_mode(detail::text(node, key));
        } else if (key == "variant") {
            s.variant = parse_variant(detail::text(node, key));
        } else if (key == "b_init") {
            s.b_init = detail::number(node, key);
        } else if (key == "clamp_stored") {
            s.clamp_stored = detail::boolean(node, key);
        } else if (key == "monotone_inertia") {
            s.monotone_inertia = detail::boolean(node, key);
        } else if (key == "out_dir") {
            cfg.out_dir = detail::text(node, key);
        } else {
            throw Error(ErrorCode::InvalidConfig, "unknown config key '" + std::string(key) + "'");
        }
    }
}

inline std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

inline json report_json(const SolverReport &r) {
    return {{"status", std::string(to_string(r.status))},
            {"ni", r.iterations},
            {"nfg", r.nfg},
            {"f_final", r.f_final},
            {"gnorm_final", r.gnorm_final},
            {"cpu", r.cpu_seconds}};
}

/// Parses argv and runs one subcommand. Summary lines (one JSON object per
/// run) go to `out`; the effective config and diagnostics go to `err`.
inline int dispatch(int argc, const char *const *argv, std::ostream &out = std::cout,
                    std::ostream &err = std::cerr) {
    CLI::App app{"Diagonal quasi-Newton solvers and experiment runners", "qnopt"};
    app.require_subcommand(1);

    // Options shared by the solver subcommands; empty means "not given".
    struct Flags {
        std::string config, solver, pair_mode, out, problem, dims, solvers, metric, in, data;
        std::optional<double> tau_cap, lambda, dt;
        std::optional<std::size_t> n, m, k;
        std::optional<std::uint64_t> seed;
        unsigned jobs = 1;
    } f;

    auto add_solver_flags = [&](CLI::App *sub) {
        sub->add_option("--config", f.config, "TOML file with SolverConfig keys");
        sub->add_option("--solver", f.solver, "dmbfgs3|wdmbfgs3|mbfgs3|dnrtr");
        sub->add_option("--tau-cap", f.tau_cap, "inertia cap in [0, 1)");
        sub->add_option("--pair-mode", f.pair_mode, "step|extrapolated");
        sub->add_option("--seed", f.seed, "random seed");
        sub->add_option("--out", f.out, "output path");
    };

    auto *problems_cmd = app.add_subcommand("problems", "List the test problem catalogue");

    auto *solve_cmd = app.add_subcommand("solve", "Solve one catalogue problem");
    add_solver_flags(solve_cmd);
    solve_cmd->add_option("--problem", f.problem, "problem identifier")->required();
    solve_cmd->add_option("--n", f.n, "dimension")->required();

    auto *bench_cmd = app.add_subcommand("bench", "Run the problem x solver x dimension grid");
    add_solver_flags(bench_cmd);
    bench_cmd->add_option("--problem", f.problem, "comma-separated problems (default: all)");
    bench_cmd->add_option("--dims", f.dims, "comma-separated dimensions")->default_str("900,1500,2100");
    bench_cmd->add_option("--solvers", f.solvers, "comma-separated solvers (default: all)");
    bench_cmd->add_option("--jobs", f.jobs, "parallel grid cells")->check(CLI::PositiveNumber);

    auto *profile_cmd = app.add_subcommand("profile", "Performance profile from a results CSV");
    profile_cmd->add_option("--in", f.in, "results CSV")->required();
    profile_cmd->add_option("--metric", f.metric, "ni|nfg|cpu")->default_str("ni");
    profile_cmd->add_option("--out", f.out, "output prefix; writes <prefix>.csv and <prefix>.svg");

    auto *cs_cmd = app.add_subcommand("cs", "Compressive-sensing recovery experiment");
    add_solver_flags(cs_cmd);
    cs_cmd->add_option("--n", f.n, "signal length")->default_str("4096");
    cs_cmd->add_option("--m", f.m, "measurements (default n/4)");
    cs_cmd->add_option("--k", f.k, "nonzeros (default n/32)");
    cs_cmd->add_option("--lambda", f.lambda, "l1 weight (default 0.01 |A'y|_inf)");

    auto *musk_cmd = app.add_subcommand("muskingum", "Fit the nonlinear Muskingum model");
    add_solver_flags(musk_cmd);
    musk_cmd->add_option("--data", f.data, "flood CSV (inflow,outflow)")->required();
    musk_cmd->add_option("--dt", f.dt, "time step in hours")->default_str("12");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage_error;
    }

    try {
        if (problems_cmd->parsed()) {
            for (const std::string &name : problem_names())
                out << name << '\n';
            return ok;
        }

        if (profile_cmd->parsed()) {
            const ResultsTable table = read_results_csv(fs::path(f.in));
            const Metric metric = parse_metric(f.metric.empty() ? "ni" : f.metric);
            const ProfileCurves curves = performance_profile(table, metric);
            fs::path prefix = f.out.empty() ? fs::path("profile") : fs::path(f.out);
            if (f.out.empty())
                if (const char *env = std::getenv("QNOPT_OUT_DIR"))
                    prefix = fs::path(env) / prefix;
            fs::path svg = prefix;
            svg += ".svg";
            emit_profile_svg(curves, svg);
            out << json{{"command", "profile"}, {"metric", std::string(to_string(metric))},
                        {"problems", curves.problems_counted}, {"svg", svg.string()},
                        {"csv", fs::path(svg).replace_extension(".csv").string()}}
                       .dump()
                << '\n';
            return ok;
        }

        CliConfig cfg;
        if (const char *env = std::getenv("QNOPT_OUT_DIR"))
            cfg.out_dir = env;
        if (!f.config.empty())
            apply_config_file(cfg, f.config);
        if (!f.solver.empty())
            cfg.solver.variant = parse_variant(f.solver);
        else if (app.got_subcommand("cs") && f.config.empty())
            cfg.solver.variant = Variant::wdmbfgs3;
        if (f.tau_cap)
            cfg.solver.tau_cap = *f.tau_cap;
        if (!f.pair_mode.empty())
            cfg.solver.pair_mode = parse_pair_mode(f.pair_mode);
        cfg.solver.validate();
        err << "# config " << json{{"solver", to_json(cfg.solver)}, {"out_dir", cfg.out_dir.string()}}.dump()
            << '\n';

        auto output_path = [&](const std::string &fallback) {
            if (!f.out.empty())
                return fs::path(f.out);
            return cfg.out_dir / fallback;
        };
        auto exit_for = [](Status s) { return s == Status::ConvergedGradNorm ? ok : solver_failure; };

        if (solve_cmd->parsed()) {
            const Problem p = make_problem(f.problem, *f.n);
            const SolverReport r = solve(p, cfg.solver);
            json line = report_json(r);
            line["command"] = "solve";
            line["problem"] = f.problem;
            line["n"] = *f.n;
            line["solver"] = std::string(to_string(cfg.solver.variant));
            out << line.dump() << '\n';
            return exit_for(r.status);
        }

        if (bench_cmd->parsed()) {
            const auto problems = f.problem.empty() ? problem_names() : split_list(f.problem);
            std::vector<std::string> solvers;
            if (f.solvers.empty())
                for (Variant v : all_variants)
                    solvers.emplace_back(to_string(v));
            else
                solvers = split_list(f.solvers);
            std::vector<std::size_t> dims;
            for (const std::string &d : split_list(f.dims.empty() ? "900,1500,2100" : f.dims)) {
                std::size_t v = 0;
                const auto [ptr, ec] = std::from_chars(d.data(), d.data() + d.size(), v);
                if (ec != std::errc() || ptr != d.data() + d.size() || v == 0)
                    throw Error(ErrorCode::InvalidConfig, "bad dimension '" + d + "'");
                dims.push_back(v);
            }
            const ResultsTable table =
                run_suite(problems, solvers, dims, cfg.solver, f.seed.value_or(0), f.jobs, [&](const ResultRow &r) {
                    err << "# " << r.problem << " n=" << r.dim << ' ' << r.solver << ' ' << to_string(r.status)
                        << " ni=" << r.ni << '\n';
                });
            for (const ResultRow &r : table.rows)
                out << json{{"command", "bench"},   {"problem", r.problem},        {"dim", r.dim},
                            {"solver", r.solver},   {"status", to_string(r.status)}, {"ni", r.ni},
                            {"nfg", r.nfg},         {"gnorm_final", r.gnorm_final}, {"f_final", r.f_final},
                            {"cpu", r.cpu}}
                           .dump()
                    << '\n';
            const fs::path path = output_path("results.csv");
            write_results_csv(table, path);
            err << "# wrote " << path.string() << '\n';
            return ok;
        }

        if (cs_cmd->parsed()) {
            const std::size_t n = f.n.value_or(4096);
            const std::size_t m = f.m.value_or(n / 4);
            const std::size_t k = f.k.value_or(std::max<std::size_t>(1, n / 32));
            const std::uint64_t seed = f.seed.value_or(1);
            CsInstance inst = cs_instance(n, m, k, seed);
            const double lambda = f.lambda.value_or(cs_default_lambda(inst));
            const Vector x_true = inst.x_true;
            const Problem p = cs_objective(std::move(inst), lambda);
            const SolverReport r = solve(p, cfg.solver);
            json line = report_json(r);
            line["command"] = "cs";
            line["solver"] = std::string(to_string(cfg.solver.variant));
            line["n"] = n;
            line["m"] = m;
            line["k"] = k;
            line["seed"] = seed;
            line["lambda"] = lambda;
            line["rel_err"] = rel_err(r.x_final, x_true);
            if (!f.out.empty()) {
                std::ofstream dump(f.out);
                if (!dump)
                    throw Error(ErrorCode::IoError, "cannot write " + f.out);
                dump << "index,x_true,x_star\n";
                for (std::size_t i = 0; i < n; ++i)
                    dump << i << ',' << qnopt::detail::format_double(x_true[i]) << ','
                         << qnopt::detail::format_double(r.x_final[i]) << '\n';
                line["dump"] = f.out;
            }
            out << line.dump() << '\n';
            return exit_for(r.status);
        }

        if (musk_cmd->parsed()) {
            const MuskingumData data = load_flood_csv(f.data, f.dt.value_or(12.0));
            const Problem p = muskingum_problem(data);
            const SolverReport r = solve(p, cfg.solver);
            json line = report_json(r);
            line["command"] = "muskingum";
            line["solver"] = std::string(to_string(cfg.solver.variant));
            line["T"] = data.size();
            line["dt"] = data.dt;
            line["x_final"] = r.x_final;
            out << line.dump() << '\n';
            return exit_for(r.status);
        }
    } catch (const Error &e) {
        err << "qnopt: " << e.what() << '\n';
        return usage_error;
    }
    return usage_error;
}

} // namespace qnopt::cli

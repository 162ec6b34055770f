// vqls-heat: command-line front end for the VQLS heat-conduction solver.

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vqls/harness.hpp"

namespace fs = std::filesystem;
using namespace vqls;
using namespace vqls::harness;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kNotConverged = 3 };

struct GlobalOptions {
    std::uint64_t seed = 0;
    std::string output_dir = "results";
    std::size_t workers = 1;
    std::string format = "both";
    std::size_t layers = 0; // 0: per-size default
    std::string optimizer = "adam";
    double lr = 0.0; // 0: optimizer default
    std::size_t max_iter = 0; // 0: optimizer default
    std::string cost_mode = "analytic";
    double epsilon = 0.0; // 0: command default
    std::string stop_rule = "precision";
    std::size_t restarts = 0;
    std::size_t repetitions = 10;
    std::vector<double> points;
    bool trace = false;
};

CostMode parse_cost_mode(const std::string &s) {
    if (s == "analytic") {
        return CostMode::analytic();
    }
    if (s.rfind("shots:", 0) == 0) {
        std::uint64_t shots = 0;
        const auto body = s.substr(6);
        const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), shots);
        if (ec == std::errc{} && ptr == body.data() + body.size() && shots > 0) {
            return CostMode::with_shots(shots, 0);
        }
    }
    throw UsageError("--cost-mode expects 'analytic' or 'shots:<count>', got '" + s + "'");
}

SolveOptions solve_options(const GlobalOptions &g, double default_epsilon) {
    SolveOptions so;
    if (g.layers > 0) {
        so.layers = g.layers;
    }
    OptimizerConfig &oc = so.optimizer;
    oc = default_optimizer();
    const auto method = parse_optimizer_method(g.optimizer);
    if (method != oc.method) {
        oc.method = method;
        oc.learning_rate = OptimizerConfig{}.learning_rate;
    }
    if (g.lr > 0.0) {
        oc.learning_rate = g.lr;
    }
    if (g.max_iter > 0) {
        oc.max_iterations = g.max_iter;
    }
    oc.epsilon = g.epsilon > 0.0 ? g.epsilon : default_epsilon;
    oc.stop_rule = parse_stop_rule(g.stop_rule);
    oc.seed = g.seed;
    oc.cost_mode = parse_cost_mode(g.cost_mode);
    oc.cost_mode.seed = derive_seed(g.seed, {0xc057});
    so.restarts = g.restarts;
    return so;
}

std::string file_stem(const std::string &label) {
    std::string out;
    for (char c : label) {
        out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
    }
    return out;
}

void announce(const fs::path &p) { std::cout << "wrote " << p.string() << '\n'; }

SolveReport solve_and_write(const GlobalOptions &g, const std::string &label) {
    const LinearProblem problem = parse_problem_label(label);
    const double default_eps = label.rfind("test", 0) == 0 ? 0.001 : 0.05;
    SolveReport rep = run_solve(problem, solve_options(g, default_eps));
    const fs::path dir = g.output_dir;
    const std::string stem = "solve_" + file_stem(label);
    const auto json_path = dir / (stem + ".json");
    io::write_text(json_path, solve_report_json(rep).dump(2) + "\n");
    announce(json_path);
    const auto sol_path = dir / (stem + "_solution.csv");
    io::write_text(sol_path, solution_csv(rep));
    announce(sol_path);
    if (g.trace) {
        const auto trace_path = dir / (stem + "_trace.csv");
        io::write_text(trace_path, cost_trace_csv(rep));
        announce(trace_path);
    }
    std::printf("%s: %s after %zu iterations (%zu cost evaluations, %zu attempt%s), cost %.4g, "
                "threshold %.4g, fidelity %.6f\n",
                label.c_str(), rep.result.converged ? "converged" : "NOT converged",
                rep.result.iterations, rep.result.cost_evaluations, rep.attempts,
                rep.attempts == 1 ? "" : "s", rep.result.final_cost, rep.result.cost_threshold,
                rep.fidelity);
    return rep;
}

int cmd_solve(const GlobalOptions &g, const std::string &label) {
    return solve_and_write(g, label).result.converged ? kOk : kNotConverged;
}

int cmd_decompose(const GlobalOptions &g, const std::string &label) {
    const LinearProblem problem = parse_problem_label(label);
    const fs::path path = fs::path(g.output_dir) / ("decompose_" + file_stem(label) + ".json");
    nlohmann::json j = problem.decomposition;
    j["problem"] = label;
    io::write_text(path, j.dump(2) + "\n");
    for (const auto &t : problem.decomposition.terms) {
        std::printf("%s  %+.12g%+.12gi\n", t.string.str().c_str(), t.coefficient.real(),
                    t.coefficient.imag());
    }
    std::printf("%zu terms\n", problem.decomposition.size());
    announce(path);
    return kOk;
}

int run_and_emit(const GlobalOptions &g, SweepConfig cfg, const std::string &stem) {
    cfg.master_seed = g.seed;
    cfg.workers = g.workers;
    cfg.repetitions = g.repetitions;
    if (!g.points.empty()) {
        cfg.points = g.points;
    }
    const SweepResult res = run_sweep(cfg);
    for (const auto &p : emit_outputs(res, g.output_dir, stem, parse_output_format(g.format))) {
        announce(p);
    }
    for (const auto &rec : res.records) {
        std::printf("point %-10g mean %-12.6g std %-12.6g converged %zu/%zu%s\n", rec.point,
                    rec.mean_metric, rec.std_metric, rec.converged_count, rec.runs.size(),
                    rec.flagged ? "  [flagged: no converged run]" : "");
    }
    std::printf("fit slope %.6g intercept %.6g R^2 %.6g\n", res.fit.slope, res.fit.intercept,
                res.fit.r_squared);
    return kOk;
}

SweepConfig sweep_base(const GlobalOptions &g, SweepKind kind, const std::string &base,
                       double default_epsilon, std::vector<double> default_points) {
    SweepConfig cfg;
    cfg.kind = kind;
    cfg.base = base;
    cfg.points = std::move(default_points);
    cfg.solve = solve_options(g, default_epsilon);
    return cfg;
}

std::vector<double> doublings(double start, std::size_t count) {
    std::vector<double> v;
    for (std::size_t k = 0; k <= count; ++k) {
        v.push_back(start * static_cast<double>(std::uint64_t{1} << k));
    }
    return v;
}

const std::vector<double> kEpsilonLadder = {0.05, 0.02, 0.01, 0.005, 0.002};

int cmd_sweep(const GlobalOptions &g, SweepKind kind, const std::string &target) {
    switch (kind) {
    case SweepKind::Shots:
        return run_and_emit(g, sweep_base(g, kind, target, 0.001, doublings(100, 10)),
                            "sweep_shots_" + file_stem(target));
    case SweepKind::Epsilon:
        return run_and_emit(g, sweep_base(g, kind, target, 0.05, kEpsilonLadder),
                            "sweep_epsilon_" + file_stem(target));
    case SweepKind::Qubits: {
        const double eps = target.rfind("test", 0) == 0 ? 0.001 : 0.05;
        std::vector<double> pts = target.rfind("heat2d", 0) == 0 ? std::vector<double>{4, 6}
                                                                 : std::vector<double>{3, 4, 5};
        return run_and_emit(g, sweep_base(g, kind, target, eps, pts),
                            "sweep_qubits_" + file_stem(target));
    }
    case SweepKind::Condition: {
        auto cfg = sweep_base(g, kind, "", 0.01, {0.03, 0.05, 0.1, 1, 2});
        cfg.condition_qubits = target.empty() ? 4 : std::stoul(target);
        return run_and_emit(g, cfg,
                            "sweep_condition_n" + std::to_string(cfg.condition_qubits) + "_eps" +
                                file_stem(io::format_number(cfg.solve.optimizer.epsilon)));
    }
    }
    return kUsage;
}

int cmd_snapshot(const GlobalOptions &g, const std::string &label, std::uint64_t shots) {
    GlobalOptions sg = g;
    sg.trace = true;
    const SolveReport rep = solve_and_write(sg, label);
    const auto path = fs::path(g.output_dir) /
                      ("snapshot_" + file_stem(label) + "_shots" + std::to_string(shots) + ".csv");
    io::write_text(path, snapshot_csv(rep.result.solution_state, shots,
                                      derive_seed(g.seed, {0x5a4d})));
    announce(path);
    return rep.result.converged ? kOk : kNotConverged;
}

int cmd_repro(GlobalOptions g, const std::string &figure) {
    auto with_eps = [&](double e) {
        GlobalOptions c = g;
        if (c.epsilon <= 0.0) {
            c.epsilon = e;
        }
        return c;
    };
    if (figure == "fig5" || figure == "fig6" || figure == "fig7" || figure == "fig8") {
        const int n = figure == "fig5" ? 3 : figure == "fig6" ? 4 : figure == "fig7" ? 5 : 8;
        return cmd_snapshot(with_eps(0.001), "test:c0=1,n=" + std::to_string(n), 3000);
    }
    if (figure == "fig9") {
        return cmd_sweep(g, SweepKind::Shots, "test:c0=1,n=3");
    }
    if (figure == "fig10") {
        int rc = kOk;
        for (int n : {3, 4}) {
            rc = std::max(rc, cmd_sweep(g, SweepKind::Epsilon, "test:c0=1,n=" + std::to_string(n)));
        }
        return rc;
    }
    if (figure == "fig11") {
        return cmd_sweep(with_eps(0.001), SweepKind::Qubits, "test:c0=1");
    }
    if (figure == "fig12") {
        int rc = kOk;
        for (double e : {0.01, 0.03}) {
            GlobalOptions c = g;
            c.epsilon = e;
            rc = std::max(rc, cmd_sweep(c, SweepKind::Condition, "4"));
        }
        return rc;
    }
    if (figure == "fig13") {
        g.trace = true;
        return cmd_solve(with_eps(0.05), "heat1d:n=5");
    }
    if (figure == "fig14") {
        int rc = kOk;
        for (int n : {3, 4}) {
            rc = std::max(rc, cmd_sweep(g, SweepKind::Epsilon, "heat1d:n=" + std::to_string(n)));
        }
        return rc;
    }
    if (figure == "fig15") {
        return cmd_sweep(with_eps(0.05), SweepKind::Qubits, "heat1d");
    }
    if (figure == "fig16" || figure == "fig17") {
        g.trace = true;
        return cmd_solve(with_eps(0.05), figure == "fig16" ? "heat2d:npd=3" : "heat2d:npd=4");
    }
    if (figure == "fig18") {
        return cmd_sweep(g, SweepKind::Epsilon, "heat2d:npd=2");
    }
    if (figure == "fig19") {
        return cmd_sweep(with_eps(0.05), SweepKind::Qubits, "heat2d");
    }
    throw UsageError("unknown figure preset '" + figure + "' (expected fig5 .. fig19)");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Variational quantum linear solver for heat-conduction finite-difference systems",
                 "vqls-heat"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.set_config("--config", "", "key = value file mirroring the long flags; flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
    app.add_option("--output-dir", g.output_dir, "Directory for result files")->capture_default_str();
    app.add_option("--workers", g.workers, "Concurrent runs in sweeps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--format", g.format, "Sweep output format")
        ->check(CLI::IsMember({"csv", "json", "both"}))
        ->capture_default_str();
    app.add_option("--ansatz-layers", g.layers, "Ansatz layers (default 4 for n <= 4, else 8)");
    app.add_option("--optimizer", g.optimizer, "Optimizer")
        ->check(CLI::IsMember({"momentum", "adam"}))
        ->capture_default_str();
    app.add_option("--lr", g.lr, "Learning rate (default depends on the optimizer)");
    app.add_option("--max-iter", g.max_iter, "Iteration cap per run (default 250000)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--cost-mode", g.cost_mode, "analytic or shots:<count>")->capture_default_str();
    app.add_option("--epsilon", g.epsilon, "Target precision (default per command)");
    app.add_option("--stop-rule", g.stop_rule,
                   "precision: stop at C <= eps^2/(n kappa^2); cost: stop at C <= eps")
        ->check(CLI::IsMember({"precision", "cost"}))
        ->capture_default_str();
    app.add_option("--restarts", g.restarts, "Extra seeded attempts if a solve does not converge")
        ->capture_default_str();
    app.add_option("--repetitions", g.repetitions, "Runs per sweep point")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--points", g.points, "Sweep points (overrides the command default)")
        ->delimiter(',');
    app.add_flag("--trace", g.trace, "Also write the per-iteration cost trace of a solve");

    std::string label;
    std::string figure;
    auto *solve = app.add_subcommand("solve", "Solve one problem and compare with the direct solve");
    solve->add_option("problem", label, "test:c0=..,n=.. | heat1d:n=.. | heat2d:npd=.. | csv:a=..,b=..")
        ->required();
    auto *decompose = app.add_subcommand("decompose", "Print and store the Pauli decomposition");
    decompose->add_option("problem", label)->required();
    auto *sweep_shots = app.add_subcommand("sweep-shots", "Sampling precision versus shots");
    sweep_shots->add_option("problem", label)->required();
    auto *sweep_eps = app.add_subcommand("sweep-epsilon", "Evaluations-to-solution versus 1/epsilon");
    sweep_eps->add_option("problem", label)->required();
    auto *sweep_n = app.add_subcommand("sweep-qubits", "Evaluations-to-solution versus qubit count");
    sweep_n->add_option("family", label, "test:c0=<c0> | heat1d | heat2d")->required();
    auto *sweep_k = app.add_subcommand("sweep-condition",
                                       "Evaluations-to-solution versus condition number");
    sweep_k->add_option("n", label, "Qubit count (default 4)");
    auto *repro = app.add_subcommand("repro", "Figure presets fig5 .. fig19");
    repro->add_option("figure", figure)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*solve) {
            return cmd_solve(g, label);
        }
        if (*decompose) {
            return cmd_decompose(g, label);
        }
        if (*sweep_shots) {
            return cmd_sweep(g, SweepKind::Shots, label);
        }
        if (*sweep_eps) {
            return cmd_sweep(g, SweepKind::Epsilon, label);
        }
        if (*sweep_n) {
            return cmd_sweep(g, SweepKind::Qubits, label);
        }
        if (*sweep_k) {
            return cmd_sweep(g, SweepKind::Condition, label);
        }
        if (*repro) {
            return cmd_repro(g, figure);
        }
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const ArgumentError &e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const SizeError &e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError &e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kUsage;
    } catch (const vqls::Error &e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}

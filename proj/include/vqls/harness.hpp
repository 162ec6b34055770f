#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "vqls/ansatz.hpp"
#include "vqls/cost.hpp"
#include "vqls/errors.hpp"
#include "vqls/io.hpp"
#include "vqls/optimizer.hpp"
#include "vqls/problems.hpp"
#include "vqls/seeds.hpp"

#ifndef VQLS_VERSION
#define VQLS_VERSION "0.0.0"
#endif

namespace vqls::harness {

using json = nlohmann::json;

inline constexpr const char *kToolName = "vqls-heat";
inline constexpr const char *kToolVersion = VQLS_VERSION;
inline constexpr const char *kCountingConvention =
    "cost_evaluations = 1 initial + 1 per iteration; gradient circuits counted separately";

// ---------------------------------------------------------------------------
// Problem labels

namespace detail {

inline std::map<std::string, std::string> parse_kv(const std::string &body,
                                                   const std::string &label) {
    std::map<std::string, std::string> kv;
    if (body.empty()) {
        return kv;
    }
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw UsageError("malformed field '" + item + "' in problem label '" + label + "'");
        }
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return kv;
}

inline double to_double(const std::string &s, const std::string &key) {
    double v = 0.0;
    if (!io::detail::parse_double(s, v)) {
        throw UsageError("field '" + key + "' expects a number, got '" + s + "'");
    }
    return v;
}

inline std::size_t to_size(const std::string &s, const std::string &key) {
    const double v = to_double(s, key);
    if (v < 0 || std::floor(v) != v) {
        throw UsageError("field '" + key + "' expects a non-negative integer, got '" + s + "'");
    }
    return static_cast<std::size_t>(v);
}

inline void check_keys(const std::map<std::string, std::string> &kv,
                       std::initializer_list<const char *> allowed, const std::string &label) {
    for (const auto &[k, v] : kv) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char *a) { return k == a; })) {
            throw UsageError("unknown field '" + k + "' in problem label '" + label + "'");
        }
    }
}

inline const std::string &require(const std::map<std::string, std::string> &kv,
                                  const std::string &key, const std::string &label) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        throw UsageError("problem label '" + label + "' is missing '" + key + "='");
    }
    return it->second;
}

inline BoundarySpec boundary_from(const std::map<std::string, std::string> &kv) {
    BoundarySpec b;
    if (auto it = kv.find("t1"); it != kv.end()) {
        b.t_bottom = to_double(it->second, "t1");
    }
    if (auto it = kv.find("t2"); it != kv.end()) {
        b.t_top = to_double(it->second, "t2");
    }
    return b;
}

} // namespace detail

/**
 * Builds a problem from its CLI label:
 *
 *   test:c0=<float>,n=<int>
 *   heat1d:n=<int>[,t1=<float>,t2=<float>]
 *   heat2d:npd=<int>[,t1=..,t2=..,lateral=dirichlet|periodic]
 *   csv:a=<matrix.csv>,b=<vector.csv>
 */
[[nodiscard]] inline LinearProblem parse_problem_label(const std::string &label) {
    const auto colon = label.find(':');
    const std::string family = label.substr(0, colon);
    const auto kv = detail::parse_kv(colon == std::string::npos ? "" : label.substr(colon + 1), label);
    if (family == "test") {
        detail::check_keys(kv, {"c0", "n"}, label);
        auto p = build_test_instance(detail::to_double(detail::require(kv, "c0", label), "c0"),
                                     detail::to_size(detail::require(kv, "n", label), "n"));
        p.label = label;
        return p;
    }
    if (family == "heat1d") {
        detail::check_keys(kv, {"n", "t1", "t2"}, label);
        auto p = laplacian_1d(detail::to_size(detail::require(kv, "n", label), "n"),
                              detail::boundary_from(kv));
        p.label = label;
        return p;
    }
    if (family == "heat2d") {
        detail::check_keys(kv, {"npd", "t1", "t2", "lateral"}, label);
        LateralBoundary lateral = LateralBoundary::Dirichlet;
        if (auto it = kv.find("lateral"); it != kv.end()) {
            if (it->second == "periodic") {
                lateral = LateralBoundary::Periodic;
            } else if (it->second != "dirichlet") {
                throw UsageError("lateral must be dirichlet or periodic, got '" + it->second + "'");
            }
        }
        auto p = laplacian_2d(detail::to_size(detail::require(kv, "npd", label), "npd"),
                              detail::boundary_from(kv), lateral);
        p.label = label;
        return p;
    }
    if (family == "csv") {
        detail::check_keys(kv, {"a", "b"}, label);
        const Eigen::MatrixXcd a = io::read_matrix_csv(detail::require(kv, "a", label));
        const Eigen::VectorXcd b = io::read_vector_csv(detail::require(kv, "b", label));
        if (a.imag().cwiseAbs().maxCoeff() > 0.0 || b.imag().cwiseAbs().maxCoeff() > 0.0) {
            throw UsageError("custom CSV problems must be real");
        }
        return problem_from_dense(a.real(), b.real(), label);
    }
    throw UsageError("unknown problem family '" + family + "' in label '" + label +
                     "' (expected test, heat1d, heat2d or csv)");
}

/// True for heat1d / heat2d labels, whose solutions are temperatures.
[[nodiscard]] inline bool is_heat_label(const std::string &label) {
    return label.rfind("heat1d", 0) == 0 || label.rfind("heat2d", 0) == 0;
}

// ---------------------------------------------------------------------------
// Parallel map with results in index order

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Results are
/// stored by index, so the output never depends on scheduling.
template <typename Result>
[[nodiscard]] std::vector<Result> parallel_map(std::size_t count, std::size_t workers,
                                               const std::function<Result(std::size_t)> &fn) {
    std::vector<std::optional<Result>> slots(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    std::vector<Result> out;
    out.reserve(count);
    for (auto &s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Solve

struct SolveOptions {
    std::optional<std::size_t> layers;
    OptimizerConfig optimizer;
    /// Extra attempts with derived seeds when a run does not converge.
    std::size_t restarts = 0;
};

struct SolveReport {
    std::string label;
    AnsatzSpec ansatz;
    OptimizerConfig optimizer; // seed of the attempt that produced `result`
    SolveResult result;
    std::size_t attempts = 1;
    double fidelity = 0.0;
    RealVector classical;    // direct solution of A x = b
    RealVector temperatures; // rescaled VQLS solution
};

[[nodiscard]] inline AnsatzSpec ansatz_for(const LinearProblem &problem,
                                           std::optional<std::size_t> layers) {
    return build_ansatz(problem.n_qubits, layers.value_or(default_layers(problem.n_qubits)));
}

[[nodiscard]] inline SolveReport run_solve(const LinearProblem &problem, const SolveOptions &opts) {
    SolveReport rep;
    rep.label = problem.label;
    rep.ansatz = ansatz_for(problem, opts.layers);
    rep.optimizer = opts.optimizer;
    if (rep.optimizer.condition_number <= 0.0) {
        rep.optimizer.condition_number = condition_number(problem);
    }
    const std::uint64_t base_seed = opts.optimizer.seed;
    for (std::size_t attempt = 0; attempt <= opts.restarts; ++attempt) {
        rep.optimizer.seed = attempt == 0 ? base_seed : derive_seed(base_seed, {attempt});
        rep.result = minimize(problem, rep.ansatz, rep.optimizer);
        rep.attempts = attempt + 1;
        if (rep.result.converged) {
            break;
        }
    }
    rep.classical = classical_solve(problem);
    rep.fidelity = fidelity(rep.result.solution_state, rep.classical);
    rep.temperatures = rescale_solution(rep.result.solution_state, problem);
    return rep;
}

namespace detail {

inline json to_array(const RealVector &v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(v(i));
    }
    return a;
}

inline std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace detail

/// Result JSON for a solve. `generated_at` is the only non-deterministic field.
[[nodiscard]] inline json solve_report_json(const SolveReport &rep) {
    const auto &r = rep.result;
    json j{{"tool", kToolName},
           {"version", kToolVersion},
           {"generated_at", detail::timestamp()},
           {"problem", rep.label},
           {"converged", r.converged},
           {"iterations", r.iterations},
           {"cost_evaluations", r.cost_evaluations},
           {"gradient_evaluations", r.gradient_evaluations},
           {"counting", kCountingConvention},
           {"final_cost", r.final_cost},
           {"cost_threshold", r.cost_threshold},
           {"condition_number", r.condition_number},
           {"epsilon", rep.optimizer.epsilon},
           {"seed", rep.optimizer.seed},
           {"attempts", rep.attempts},
           {"fidelity", rep.fidelity},
           {"params", r.final_params},
           {"trace", r.cost_trace},
           {"optimizer", rep.optimizer},
           {"ansatz", rep.ansatz}};
    if (is_heat_label(rep.label)) {
        j["temperatures"] = detail::to_array(rep.temperatures);
        j["classical"] = detail::to_array(rep.classical);
    } else {
        j["solution"] = detail::to_array(rep.temperatures);
        j["classical"] = detail::to_array(rep.classical);
    }
    return j;
}

/// iteration,cost,numerator,denominator,mode,shots
[[nodiscard]] inline std::string cost_trace_csv(const SolveReport &rep) {
    std::ostringstream out;
    out << "iteration,cost,numerator,denominator,mode,shots\n";
    const auto &r = rep.result;
    const auto &mode = rep.optimizer.cost_mode;
    for (std::size_t i = 0; i < r.cost_trace.size(); ++i) {
        out << i << ',' << io::format_number(r.cost_trace[i]) << ','
            << io::format_number(r.numerator_trace[i]) << ','
            << io::format_number(r.denominator_trace[i]) << ','
            << (mode.is_analytic() ? "analytic" : "shots") << ',' << mode.shots << '\n';
    }
    return out.str();
}

/// Temperatures next to the classical reference, one row per unknown.
[[nodiscard]] inline std::string solution_csv(const SolveReport &rep) {
    std::ostringstream out;
    out << "index,vqls,classical\n";
    for (Eigen::Index i = 0; i < rep.classical.size(); ++i) {
        out << i << ',' << io::format_number(rep.temperatures(i)) << ','
            << io::format_number(rep.classical(i)) << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepKind { Shots, Epsilon, Qubits, Condition };

[[nodiscard]] inline std::string to_string(SweepKind k) {
    switch (k) {
    case SweepKind::Shots: return "shots";
    case SweepKind::Epsilon: return "epsilon";
    case SweepKind::Qubits: return "qubits";
    case SweepKind::Condition: return "condition";
    }
    return "?";
}

[[nodiscard]] inline SweepKind parse_sweep_kind(const std::string &s) {
    for (auto k : {SweepKind::Shots, SweepKind::Epsilon, SweepKind::Qubits, SweepKind::Condition}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw ArgumentError("unknown sweep kind '" + s + "'");
}

struct SweepConfig {
    SweepKind kind = SweepKind::Epsilon;
    std::vector<double> points;
    std::size_t repetitions = 10;
    /// Full problem label (shots, epsilon sweeps) or family template
    /// (qubits: "test:c0=1", "heat1d", "heat2d"; condition: unused).
    std::string base = "test:c0=1,n=3";
    SolveOptions solve;
    std::uint64_t master_seed = 0;
    std::size_t workers = 1;
    /// Qubit count for condition sweeps.
    std::size_t condition_qubits = 4;

    void validate() const {
        if (points.empty()) {
            throw ArgumentError("sweep needs at least one point");
        }
        const bool increasing = std::adjacent_find(points.begin(), points.end(),
                                                   std::greater_equal<>()) == points.end();
        const bool decreasing = std::adjacent_find(points.begin(), points.end(),
                                                   std::less_equal<>()) == points.end();
        if (!increasing && !decreasing) {
            throw ArgumentError("sweep points must be strictly monotone");
        }
        if (repetitions == 0) {
            throw ArgumentError("repetitions must be at least 1");
        }
        if (kind == SweepKind::Epsilon) {
            for (double e : points) {
                if (!(e > 0.0 && e < 0.5)) {
                    throw ArgumentError("epsilon points must lie in (0, 0.5)");
                }
            }
        }
        if (kind == SweepKind::Shots) {
            for (double s : points) {
                if (!(s >= 1.0) || std::floor(s) != s) {
                    throw ArgumentError("shot counts must be positive integers");
                }
            }
        }
    }
};

/// One run at one sweep point.
struct RunSummary {
    std::uint64_t seed = 0;
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t cost_evaluations = 0;
    std::size_t gradient_evaluations = 0;
    double final_cost = 0.0;
    double metric = 0.0;
};

struct SweepRecord {
    double point = 0.0;
    std::vector<RunSummary> runs;
    double mean_metric = 0.0;
    double std_metric = 0.0;
    std::size_t converged_count = 0;
    std::string metric_name;
    bool flagged = false;         // no converged run at this point
    double condition_number = 0.0; // of the point's problem, when meaningful
};

struct SummaryRow {
    double point;
    double mean;
    double std;
    std::size_t converged_count;
};

/// Mean and sample standard deviation of the converged runs' metrics.
inline void aggregate_record(SweepRecord &rec) {
    std::vector<double> values;
    for (const auto &r : rec.runs) {
        if (r.converged) {
            values.push_back(r.metric);
        }
    }
    rec.converged_count = values.size();
    rec.flagged = values.empty();
    if (values.empty()) {
        rec.mean_metric = std::nan("");
        rec.std_metric = std::nan("");
        return;
    }
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    rec.mean_metric = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - rec.mean_metric) * (v - rec.mean_metric);
    }
    rec.std_metric = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
}

/// Per-point summary table; all records must carry the same metric.
[[nodiscard]] inline std::vector<SummaryRow> aggregate(std::vector<SweepRecord> records) {
    std::vector<SummaryRow> rows;
    for (auto &rec : records) {
        if (rec.metric_name != records.front().metric_name) {
            throw ArgumentError("cannot aggregate metrics '" + records.front().metric_name +
                                "' and '" + rec.metric_name + "' together");
        }
        aggregate_record(rec);
        rows.push_back({rec.point, rec.mean_metric, rec.std_metric, rec.converged_count});
    }
    return rows;
}

struct LinearFit {
    double slope = std::nan("");
    double intercept = std::nan("");
    double r_squared = std::nan("");
    std::size_t samples = 0;
};

/// Ordinary least squares y = intercept + slope x over finite pairs.
[[nodiscard]] inline LinearFit fit_line(const std::vector<double> &xs, const std::vector<double> &ys) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
        if (std::isfinite(xs[i]) && std::isfinite(ys[i])) {
            pts.emplace_back(xs[i], ys[i]);
        }
    }
    LinearFit f;
    f.samples = pts.size();
    if (pts.size() < 2) {
        return f;
    }
    double mx = 0.0;
    double my = 0.0;
    for (const auto &[x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const auto &[x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0) {
        return f;
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

struct SweepResult {
    SweepConfig config;
    std::vector<SweepRecord> records;
    LinearFit fit;
    std::string metric_name;
    std::string problem; // base problem label as resolved
};

/// Total-variation distance between a histogram and exact probabilities.
[[nodiscard]] inline double tv_distance(const Histogram &counts, const std::vector<double> &p,
                                        std::uint64_t shots) {
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto it = counts.find(i);
        const double f = it == counts.end() ? 0.0 : static_cast<double>(it->second) /
                                                        static_cast<double>(shots);
        d += std::abs(f - p[i]);
    }
    return 0.5 * d;
}

/// Plot-axis transform applied to the sweep point.
[[nodiscard]] inline double plot_x(SweepKind kind, const SweepRecord &rec) {
    switch (kind) {
    case SweepKind::Shots: return std::log10(rec.point);
    case SweepKind::Epsilon: return std::log10(1.0 / rec.point);
    case SweepKind::Qubits: return rec.point;
    case SweepKind::Condition: return rec.condition_number;
    }
    return rec.point;
}

[[nodiscard]] inline double plot_y(SweepKind kind, const SweepRecord &rec) {
    return kind == SweepKind::Shots ? std::log10(rec.mean_metric) : rec.mean_metric;
}

inline void finish_sweep(SweepResult &res) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (auto &rec : res.records) {
        aggregate_record(rec);
        xs.push_back(plot_x(res.config.kind, rec));
        ys.push_back(plot_y(res.config.kind, rec));
    }
    res.fit = fit_line(xs, ys);
}

namespace detail {

inline RunSummary summarize(const SolveResult &r, std::uint64_t seed) {
    return {seed,
            r.converged,
            r.iterations,
            r.cost_evaluations,
            r.gradient_evaluations,
            r.final_cost,
            static_cast<double>(r.cost_evaluations)};
}

/// Repetition runs for every point; `make` supplies the point's problem.
inline void run_solve_grid(SweepResult &res,
                           const std::function<LinearProblem(double)> &make,
                           const std::function<double(double)> &epsilon_for) {
    const auto &cfg = res.config;
    std::vector<LinearProblem> problems;
    std::vector<double> kappas;
    for (double p : cfg.points) {
        problems.push_back(make(p));
        kappas.push_back(condition_number(problems.back()));
    }
    const std::size_t reps = cfg.repetitions;
    const std::size_t total = cfg.points.size() * reps;
    auto runs = parallel_map<RunSummary>(total, cfg.workers, [&](std::size_t job) {
        const std::size_t pi = job / reps;
        const std::size_t rep = job % reps;
        const LinearProblem &problem = problems[pi];
        OptimizerConfig oc = cfg.solve.optimizer;
        oc.seed = derive_seed(cfg.master_seed, {pi, rep});
        oc.epsilon = epsilon_for(cfg.points[pi]);
        oc.condition_number = kappas[pi];
        oc.cost_mode = CostMode::analytic();
        const auto spec = ansatz_for(problem, cfg.solve.layers);
        return summarize(minimize(problem, spec, oc), oc.seed);
    });
    for (std::size_t pi = 0; pi < cfg.points.size(); ++pi) {
        SweepRecord rec;
        rec.point = cfg.points[pi];
        rec.metric_name = res.metric_name;
        rec.condition_number = kappas[pi];
        rec.runs.assign(runs.begin() + static_cast<std::ptrdiff_t>(pi * reps),
                        runs.begin() + static_cast<std::ptrdiff_t>((pi + 1) * reps));
        res.records.push_back(std::move(rec));
    }
}

} // namespace detail

/// Problem label of a qubit-sweep family at `n` total qubits.
[[nodiscard]] inline std::string family_label(const std::string &family, std::size_t n) {
    if (family.rfind("test", 0) == 0) {
        const auto colon = family.find(':');
        const std::string rest = colon == std::string::npos ? "c0=1" : family.substr(colon + 1);
        return "test:" + rest + ",n=" + std::to_string(n);
    }
    if (family.rfind("heat1d", 0) == 0) {
        const auto colon = family.find(':');
        return "heat1d:n=" + std::to_string(n) +
               (colon == std::string::npos ? "" : "," + family.substr(colon + 1));
    }
    if (family.rfind("heat2d", 0) == 0) {
        if (n % 2 != 0) {
            throw ArgumentError("heat2d qubit counts must be even, got " + std::to_string(n));
        }
        const auto colon = family.find(':');
        return "heat2d:npd=" + std::to_string(n / 2) +
               (colon == std::string::npos ? "" : "," + family.substr(colon + 1));
    }
    throw UsageError("unknown qubit-sweep family '" + family + "'");
}

/**
 * Precision vs shots for a solved state. The base problem is solved
 * analytically first; each repetition then samples its distribution and
 * records the total-variation distance to the exact probabilities.
 */
[[nodiscard]] inline SweepResult sweep_shots(const SweepConfig &config) {
    config.validate();
    SweepResult res{config, {}, {}, "tv_distance", config.base};
    const LinearProblem problem = parse_problem_label(config.base);
    SolveOptions so = config.solve;
    so.optimizer.seed = derive_seed(config.master_seed, {0xba5e});
    so.optimizer.cost_mode = CostMode::analytic();
    const SolveReport base = run_solve(problem, so);
    if (!base.result.converged) {
        throw NumericalFailure("base solve of '" + config.base + "' did not converge",
                               base.result.iterations);
    }
    const auto probs = base.result.solution_state.probabilities();
    const std::size_t reps = config.repetitions;
    const std::size_t total = config.points.size() * reps;
    auto runs = parallel_map<RunSummary>(total, config.workers, [&](std::size_t job) {
        const std::size_t pi = job / reps;
        const std::size_t rep = job % reps;
        const auto shots = static_cast<std::uint64_t>(config.points[pi]);
        const std::uint64_t seed = derive_seed(config.master_seed, {pi, rep});
        const auto counts = sample_counts(base.result.solution_state, shots, seed);
        RunSummary s;
        s.seed = seed;
        s.converged = true;
        s.metric = tv_distance(counts, probs, shots);
        return s;
    });
    for (std::size_t pi = 0; pi < config.points.size(); ++pi) {
        SweepRecord rec;
        rec.point = config.points[pi];
        rec.metric_name = res.metric_name;
        rec.condition_number = base.result.condition_number;
        rec.runs.assign(runs.begin() + static_cast<std::ptrdiff_t>(pi * reps),
                        runs.begin() + static_cast<std::ptrdiff_t>((pi + 1) * reps));
        res.records.push_back(std::move(rec));
    }
    finish_sweep(res);
    return res;
}

/// Evaluations-to-solution at each precision epsilon for one problem.
[[nodiscard]] inline SweepResult sweep_epsilon(const SweepConfig &config) {
    config.validate();
    SweepResult res{config, {}, {}, "cost_evaluations", config.base};
    const LinearProblem problem = parse_problem_label(config.base);
    detail::run_solve_grid(
        res, [&](double) { return problem; }, [](double eps) { return eps; });
    finish_sweep(res);
    return res;
}

/// Evaluations-to-solution against qubit count at fixed epsilon.
[[nodiscard]] inline SweepResult sweep_qubits(const SweepConfig &config) {
    config.validate();
    SweepResult res{config, {}, {}, "cost_evaluations", config.base};
    detail::run_solve_grid(
        res,
        [&](double n) {
            return parse_problem_label(family_label(config.base, static_cast<std::size_t>(n)));
        },
        [&](double) { return config.solve.optimizer.epsilon; });
    finish_sweep(res);
    return res;
}

/// Evaluations-to-solution against the test-matrix coefficient c0 at fixed n.
[[nodiscard]] inline SweepResult sweep_condition(const SweepConfig &config) {
    config.validate();
    SweepResult res{config, {}, {}, "cost_evaluations",
                    "test:n=" + std::to_string(config.condition_qubits)};
    detail::run_solve_grid(
        res, [&](double c0) { return build_test_instance(c0, config.condition_qubits); },
        [&](double) { return config.solve.optimizer.epsilon; });
    finish_sweep(res);
    return res;
}

[[nodiscard]] inline SweepResult run_sweep(const SweepConfig &config) {
    switch (config.kind) {
    case SweepKind::Shots: return sweep_shots(config);
    case SweepKind::Epsilon: return sweep_epsilon(config);
    case SweepKind::Qubits: return sweep_qubits(config);
    case SweepKind::Condition: return sweep_condition(config);
    }
    throw ArgumentError("unhandled sweep kind");
}

// ---------------------------------------------------------------------------
// Output

[[nodiscard]] inline std::string sweep_csv_header(SweepKind kind) {
    switch (kind) {
    case SweepKind::Shots: return "shots_log10,mean_precision_log10,std,n";
    case SweepKind::Epsilon: return "inv_epsilon_log10,mean_evals,std,n";
    case SweepKind::Qubits: return "n_qubits,mean_evals,std,n";
    case SweepKind::Condition: return "kappa,mean_evals,std,n";
    }
    return "";
}

/// Plot-ready CSV, one row per sweep point. Deterministic for a fixed config.
[[nodiscard]] inline std::string sweep_csv(const SweepResult &res) {
    std::ostringstream out;
    out << sweep_csv_header(res.config.kind) << '\n';
    for (const auto &rec : res.records) {
        out << io::format_number(plot_x(res.config.kind, rec)) << ','
            << io::format_number(plot_y(res.config.kind, rec)) << ','
            << io::format_number(rec.std_metric) << ',' << rec.converged_count << '\n';
    }
    return out.str();
}

namespace detail {

inline json nan_safe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double from_nan_safe(const json &j) {
    return j.is_null() ? std::nan("") : j.get<double>();
}

} // namespace detail

[[nodiscard]] inline json sweep_json(const SweepResult &res) {
    const auto &cfg = res.config;
    json records = json::array();
    for (const auto &rec : res.records) {
        json runs = json::array();
        for (const auto &r : rec.runs) {
            runs.push_back({{"seed", r.seed},
                            {"converged", r.converged},
                            {"iterations", r.iterations},
                            {"cost_evaluations", r.cost_evaluations},
                            {"gradient_evaluations", r.gradient_evaluations},
                            {"final_cost", r.final_cost},
                            {"metric", r.metric}});
        }
        records.push_back({{"point", rec.point},
                           {"x", detail::nan_safe(plot_x(cfg.kind, rec))},
                           {"mean", detail::nan_safe(rec.mean_metric)},
                           {"std", detail::nan_safe(rec.std_metric)},
                           {"converged_count", rec.converged_count},
                           {"flagged", rec.flagged},
                           {"condition_number", rec.condition_number},
                           {"runs", runs}});
    }
    return json{{"tool", kToolName},
                {"version", kToolVersion},
                {"generated_at", detail::timestamp()},
                {"kind", to_string(cfg.kind)},
                {"metric", res.metric_name},
                {"problem", res.problem},
                {"counting", kCountingConvention},
                {"config",
                 {{"points", cfg.points},
                  {"repetitions", cfg.repetitions},
                  {"base", cfg.base},
                  {"master_seed", cfg.master_seed},
                  {"layers", cfg.solve.layers ? json(*cfg.solve.layers) : json("default")},
                  {"optimizer", cfg.solve.optimizer},
                  {"condition_qubits", cfg.condition_qubits}}},
                {"fit",
                 {{"slope", detail::nan_safe(res.fit.slope)},
                  {"intercept", detail::nan_safe(res.fit.intercept)},
                  {"r_squared", detail::nan_safe(res.fit.r_squared)},
                  {"samples", res.fit.samples}}},
                {"records", records}};
}

/// Rebuilds records (per-run summaries included) from sweep JSON and
/// re-aggregates them.
[[nodiscard]] inline SweepResult sweep_from_json(const json &j) {
    SweepResult res;
    res.config.kind = parse_sweep_kind(j.at("kind").get<std::string>());
    res.metric_name = j.at("metric").get<std::string>();
    res.problem = j.at("problem").get<std::string>();
    const auto &cfg = j.at("config");
    res.config.points = cfg.at("points").get<std::vector<double>>();
    res.config.repetitions = cfg.at("repetitions").get<std::size_t>();
    res.config.base = cfg.at("base").get<std::string>();
    res.config.master_seed = cfg.at("master_seed").get<std::uint64_t>();
    res.config.condition_qubits = cfg.at("condition_qubits").get<std::size_t>();
    for (const auto &jr : j.at("records")) {
        SweepRecord rec;
        rec.point = jr.at("point").get<double>();
        rec.metric_name = res.metric_name;
        rec.condition_number = jr.at("condition_number").get<double>();
        for (const auto &r : jr.at("runs")) {
            rec.runs.push_back({r.at("seed").get<std::uint64_t>(), r.at("converged").get<bool>(),
                                r.at("iterations").get<std::size_t>(),
                                r.at("cost_evaluations").get<std::size_t>(),
                                r.at("gradient_evaluations").get<std::size_t>(),
                                r.at("final_cost").get<double>(), r.at("metric").get<double>()});
        }
        res.records.push_back(std::move(rec));
    }
    finish_sweep(res);
    return res;
}

enum class OutputFormat { Csv, Json, Both };

[[nodiscard]] inline OutputFormat parse_output_format(const std::string &s) {
    if (s == "csv") {
        return OutputFormat::Csv;
    }
    if (s == "json") {
        return OutputFormat::Json;
    }
    if (s == "both") {
        return OutputFormat::Both;
    }
    throw UsageError("unknown format '" + s + "' (expected csv, json or both)");
}

/// Writes <dir>/<stem>.csv and/or <dir>/<stem>.json; returns the paths written.
inline std::vector<std::filesystem::path> emit_outputs(const SweepResult &res,
                                                       const std::filesystem::path &dir,
                                                       const std::string &stem,
                                                       OutputFormat format) {
    std::vector<std::filesystem::path> written;
    if (format != OutputFormat::Json) {
        const auto p = dir / (stem + ".csv");
        io::write_text(p, sweep_csv(res));
        written.push_back(p);
    }
    if (format != OutputFormat::Csv) {
        const auto p = dir / (stem + ".json");
        io::write_text(p, sweep_json(res).dump(2) + "\n");
        written.push_back(p);
    }
    return written;
}

// ---------------------------------------------------------------------------
// Sampled-state snapshot (analytic vs finite-shot probabilities)

[[nodiscard]] inline std::string snapshot_csv(const Statevector &state, std::uint64_t shots,
                                              std::uint64_t seed) {
    const auto counts = sample_counts(state, shots, seed);
    std::ostringstream out;
    out << "index,amplitude,probability,sampled_probability,sampled_amplitude\n";
    for (std::size_t i = 0; i < state.dim(); ++i) {
        const auto it = counts.find(i);
        const double f = it == counts.end() ? 0.0 : static_cast<double>(it->second) /
                                                        static_cast<double>(shots);
        const double amp = state[i].real();
        // Sampling only sees |amplitude|^2; the sign is taken from the exact state.
        const double sampled_amp = std::copysign(std::sqrt(f), amp);
        out << i << ',' << io::format_number(amp) << ',' << io::format_number(std::norm(state[i]))
            << ',' << io::format_number(f) << ',' << io::format_number(sampled_amp) << '\n';
    }
    return out.str();
}

} // namespace vqls::harness

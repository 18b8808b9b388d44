#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "linebo/benchmarks.hpp"
#include "linebo/config.hpp"
#include "linebo/linebo.hpp"
#include "linebo/trace.hpp"

namespace linebo {

inline constexpr const char* kVersion = "linebo 0.1.0";

// Independent random streams of one seeded run. Noise has its own stream per
// evaluation index, see noise_stream.
inline constexpr std::uint32_t kAlgorithmStream = 1;
inline constexpr std::uint32_t kInitStream = 3;

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

/// Noisy black box over a benchmark; the n-th call draws its noise from noise_stream(seed, n).
class NoisyOracle {
public:
    NoisyOracle(const ObjectiveSpec& spec, NoiseModel noise, std::uint64_t seed)
        : spec_(&spec), noise_(noise), seed_(seed) {}

    Observation operator()(const Vector& x) {
        Rng rng = noise_stream(seed_, static_cast<std::uint64_t>(++calls_));
        const NoisyValue v = noisy_eval(*spec_, noise_, x, rng);
        return {v.y, v.s};
    }

    [[nodiscard]] int calls() const { return calls_; }

private:
    const ObjectiveSpec* spec_;
    NoiseModel noise_;
    std::uint64_t seed_;
    int calls_ = 0;
};

/// Turns evaluation events into regret records using the noiseless truth.
class TraceRecorder {
public:
    TraceRecorder(const ObjectiveSpec& spec, RegretTrace& trace) : spec_(&spec), trace_(&trace) {}

    void record(const Vector& point, double y, const Vector& candidate) {
        RegretRecord r;
        r.eval_index = static_cast<int>(trace_->records.size()) + 1;
        r.candidate = candidate;
        r.evaluated = point;
        r.y_noisy = y;
        r.true_f = spec_->truth(candidate);
        r.regret = r.true_f - spec_->f_star;
        r.violation = spec_->constrained() && spec_->constraint(point) > 0.0;
        if (r.violation) ++trace_->diagnostics.violations;
        trace_->records.push_back(std::move(r));
    }

private:
    const ObjectiveSpec* spec_;
    RegretTrace* trace_;
};

/// Checks, at every safe selection, that the true constraint lies inside the
/// two-sided beta band of the constraint model at every certified grid point.
inline void check_coverage(const ObjectiveSpec& spec, const SafeStepView& view, RunDiagnostics& diag) {
    ++diag.coverage_checks;
    for (std::size_t i = 0; i < view.state.size(); ++i) {
        if (!view.state.safe[i]) continue;
        const auto k = static_cast<Eigen::Index>(i);
        const double truth = spec.constraint(view.state.points.col(k));
        if (std::abs(truth - view.g_mean(k)) > view.beta * view.g_std(k)) {
            diag.coverage_held = false;
            return;
        }
    }
}

/// Uniform sampling; the candidate is the point with the best noisy observation so far.
inline RegretTrace random_search(const ObjectiveSpec& spec, const NoiseModel& noise, int budget, std::uint64_t seed) {
    if (budget < 1) throw std::invalid_argument("random_search: budget must be >= 1");
    RegretTrace trace;
    TraceRecorder recorder(spec, trace);
    NoisyOracle oracle(spec, noise, seed);
    Rng rng(derive_seed(seed, kAlgorithmStream));
    Vector best;
    double best_y = std::numeric_limits<double>::infinity();
    for (int t = 0; t < budget; ++t) {
        const Vector x = uniform_in_box(spec.domain, rng);
        const Observation obs = oracle(x);
        if (obs.y < best_y) {
            best_y = obs.y;
            best = x;
        }
        recorder.record(x, obs.y, best);
    }
    trace.diagnostics.total_evals = budget;
    return trace;
}

/// One seeded run of the configured method. Throws on failure.
inline RegretTrace run_single(const ExperimentConfig& cfg, const ObjectiveSpec& spec, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const MethodSpec method = cfg.method_spec();

    Rng init_rng(derive_seed(seed, kInitStream));
    const Vector start = init_point(spec, cfg.init, init_rng);

    RegretTrace trace;
    if (method.random_search) {
        trace = random_search(spec, cfg.noise, cfg.linebo.budget, seed);
    } else {
        TraceRecorder recorder(spec, trace);
        NoisyOracle noisy(spec, cfg.noise, seed);
        Oracle oracle = [&noisy](const Vector& x) { return noisy(x); };
        LineBayesOpt opt(spec.domain, cfg.resolved_linebo(), start, derive_seed(seed, kAlgorithmStream));
        RunHooks hooks;
        hooks.on_evaluation = [&](const EvaluationEvent& e) { recorder.record(e.point, e.observation.y, e.candidate); };
        if (method.safe)
            hooks.on_safe_select = [&](const SafeStepView& v) { check_coverage(spec, v, trace.diagnostics); };
        opt.run(oracle, hooks);

        const OptimizerState& st = opt.state();
        RunDiagnostics& d = trace.diagnostics;
        d.total_evals = st.total_evals;
        d.descent_evals = st.descent_evals_total;
        d.lines = static_cast<int>(st.line_evals.size());
        for (const IncumbentTransition& t : st.transitions) {
            if (!t.accepted) continue;
            d.accepted_mean_from.push_back(t.mean_from);
            d.accepted_mean_to.push_back(t.mean_to);
        }
    }
    trace.diagnostics.start_true_f = spec.truth(start);
    trace.meta.objective = spec.name;
    trace.meta.method = cfg.method;
    trace.meta.seed = seed;
    trace.meta.config_hash = config_hash(cfg);
    trace.meta.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (static_cast<int>(trace.records.size()) != cfg.linebo.budget)
        throw std::runtime_error("run ended with " + std::to_string(trace.records.size()) + " of " +
                                 std::to_string(cfg.linebo.budget) + " evaluations");
    return trace;
}

inline RegretTrace run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
    const ObjectiveSpec spec = make_benchmark(cfg.objective, cfg.benchmark);
    return run_single(cfg, spec, seed);
}

struct RunOutcome {
    std::uint64_t seed = 0;
    std::optional<RegretTrace> trace;
    std::string error;  // empty on success
};

struct ExperimentResult {
    std::vector<RunOutcome> runs;  // in seed-list order
    std::vector<AggregateRow> aggregate;

    [[nodiscard]] int failed() const {
        return static_cast<int>(std::count_if(runs.begin(), runs.end(), [](const RunOutcome& r) { return !r.trace; }));
    }
};

inline std::string trace_basename(const std::string& method, std::uint64_t seed) {
    return method + "_seed" + std::to_string(seed);
}

inline nlohmann::json sidecar_json(const ExperimentConfig& cfg, const RunOutcome& run) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["config_hash"] = format_hash(config_hash(cfg));
    j["seed"] = run.seed;
    j["objective"] = cfg.objective;
    j["method"] = cfg.method;
    j["budget"] = cfg.linebo.budget;
    if (run.trace) {
        const RunDiagnostics& d = run.trace->diagnostics;
        j["status"] = "ok";
        j["wall_time_s"] = run.trace->meta.wall_time_s;
        j["violations"] = d.violations;
        j["coverage_held"] = d.coverage_held;
        j["coverage_checks"] = d.coverage_checks;
        j["start_true_f"] = d.start_true_f;
        j["lines"] = d.lines;
        j["descent_evals"] = d.descent_evals;
        j["final_regret"] = run.trace->records.back().regret;
    } else {
        j["status"] = "failed";
        j["error"] = run.error;
    }
    return j;
}

/// Runs every seed (in parallel when cfg.jobs > 1) and, if `out_dir` is given,
/// writes one trace CSV and one JSON sidecar per run plus aggregate.csv.
/// Trace files go out after all runs have finished.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out_dir = {}) {
    cfg.validate();
    const ObjectiveSpec spec = make_benchmark(cfg.objective, cfg.benchmark);

    ExperimentResult result;
    result.runs.resize(cfg.seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
            RunOutcome& out = result.runs[i];
            out.seed = cfg.seeds[i];
            try {
                out.trace = run_single(cfg, spec, out.seed);
            } catch (const std::exception& e) {
                out.error = e.what();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(cfg.seeds.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    std::vector<RegretTrace> ok;
    for (const RunOutcome& r : result.runs)
        if (r.trace) ok.push_back(*r.trace);
    result.aggregate = aggregate(ok);

    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        for (const RunOutcome& r : result.runs) {
            const std::string base = trace_basename(cfg.method, r.seed);
            if (r.trace) write_trace_csv((*out_dir / (base + ".csv")).string(), *r.trace);
            std::ofstream js(*out_dir / (base + ".json"));
            js << sidecar_json(cfg, r).dump(2) << '\n';
        }
        write_aggregate_csv((*out_dir / "aggregate.csv").string(), result.aggregate, result.failed());
        std::ofstream(*out_dir / "config.ini") << to_ini(cfg);
    }
    return result;
}

/// Aggregates every trace CSV in `in_dir`; failed runs are counted from sidecars.
inline std::vector<AggregateRow> aggregate_directory(const std::filesystem::path& in_dir, const std::filesystem::path& out_file,
                                                     int* failed_out = nullptr) {
    std::vector<std::filesystem::path> csvs;
    int failed = 0;
    for (const auto& entry : std::filesystem::directory_iterator(in_dir)) {
        const auto& p = entry.path();
        if (p.extension() == ".csv" && p.filename() != "aggregate.csv") csvs.push_back(p);
        if (p.extension() == ".json") {
            std::ifstream is(p);
            const nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
            if (!j.is_discarded() && j.value("status", "") == "failed") ++failed;
        }
    }
    std::sort(csvs.begin(), csvs.end());
    if (csvs.empty()) throw std::runtime_error("no trace CSV files in " + in_dir.string());
    std::vector<RegretTrace> traces;
    for (const auto& p : csvs) traces.push_back(read_trace_csv(p.string()));
    std::vector<AggregateRow> rows = aggregate(traces);
    write_aggregate_csv(out_file.string(), rows, failed);
    if (failed_out) *failed_out = failed;
    return rows;
}

}  // namespace linebo

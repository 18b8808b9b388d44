// Command-line driver: run experiments from INI configs, aggregate trace
// directories, list the built-in benchmarks.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "linebo.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kRunFailure = 2 };

int cmd_run(const std::string& config_path, const std::string& out_dir, const std::string& seeds,
            const std::string& method, int budget, int jobs) {
    linebo::ExperimentConfig cfg;
    try {
        cfg = linebo::load_config(config_path);
        if (!seeds.empty()) cfg.seeds = linebo::detail::parse_seed_list(seeds);
        if (!method.empty()) cfg.method = method;
        if (budget > 0) cfg.linebo.budget = budget;
        if (jobs > 0) cfg.jobs = jobs;
        cfg.validate();
    } catch (const linebo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }

    const linebo::ExperimentResult result = linebo::run_experiment(cfg, std::filesystem::path(out_dir));
    for (const linebo::RunOutcome& r : result.runs) {
        if (r.trace) {
            const auto& d = r.trace->diagnostics;
            std::printf("seed %llu: final regret %.6g, violations %d, %.2fs\n",
                        static_cast<unsigned long long>(r.seed), r.trace->records.back().regret, d.violations,
                        r.trace->meta.wall_time_s);
        } else {
            std::printf("seed %llu: FAILED: %s\n", static_cast<unsigned long long>(r.seed), r.error.c_str());
        }
    }
    if (!result.aggregate.empty()) {
        const linebo::AggregateRow& last = result.aggregate.back();
        std::printf("%s on %s: median final regret %.6g over %d runs (%d failed)\n", cfg.method.c_str(),
                    cfg.objective.c_str(), last.median_regret, last.runs, result.failed());
    }
    return result.failed() > 0 ? kRunFailure : kOk;
}

int cmd_aggregate(const std::string& in_dir, const std::string& out_file) {
    int failed = 0;
    const auto rows = linebo::aggregate_directory(in_dir, out_file, &failed);
    std::printf("aggregated %zu evaluation indices into %s (%d failed runs)\n", rows.size(), out_file.c_str(), failed);
    return kOk;
}

int cmd_list() {
    for (const std::string& name : linebo::benchmark_names()) {
        const linebo::ObjectiveSpec s = linebo::make_benchmark(name);
        std::printf("%-28s dim %2d  effective %d  f* %.10g%s\n", name.c_str(), s.dim, s.effective_dim, s.f_star,
                    s.constrained() ? "  constrained" : "");
    }
    std::printf("\nmethods:");
    for (const std::string& m : linebo::method_names()) std::printf(" %s", m.c_str());
    std::printf("\n");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LineBO experiment driver"};
    app.require_subcommand(1);

    std::string config_path, out_dir, seeds, method;
    int budget = 0, jobs = 0;
    CLI::App* run = app.add_subcommand("run", "Run an experiment config");
    run->add_option("--config", config_path, "INI experiment file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory for traces")->required();
    run->add_option("--seeds", seeds, "Comma-separated seed list (overrides the config)");
    run->add_option("--method", method, "Method name (overrides the config)");
    run->add_option("--budget", budget, "Evaluation budget (overrides the config)")->check(CLI::PositiveNumber);
    run->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);

    std::string in_dir, out_file;
    CLI::App* agg = app.add_subcommand("aggregate", "Aggregate a directory of trace CSVs");
    agg->add_option("--in", in_dir, "Directory with trace CSVs")->required()->check(CLI::ExistingDirectory);
    agg->add_option("--out", out_file, "Aggregate CSV to write")->required();

    CLI::App* list = app.add_subcommand("list-benchmarks", "List built-in objectives and methods");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) return cmd_run(config_path, out_dir, seeds, method, budget, jobs);
        if (*agg) return cmd_aggregate(in_dir, out_file);
        if (*list) return cmd_list();
    } catch (const linebo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRunFailure;
    }
    return kOk;
}

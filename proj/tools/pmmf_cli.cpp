// Command-line front end: run experiments, sweep regret over horizon
// lengths, emit Lorenz-curve and latency data, or just validate a config.
//
// Exit codes: 0 success, 1 config error, 2 runtime error, 3 oracle budget
// exceeded.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pmmf/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    bool strict = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Experiment config file")
        ->required();
    cmd->add_option("--out", args.out_dir, "Output directory override");
    cmd->add_option("--seed", args.seed, "Seed override");
    cmd->add_flag("--strict", args.strict,
                  "Error instead of filling infeasible selections");
}

pmmf::ExperimentConfig resolve(const CommonArgs& args) {
    pmmf::ExperimentConfig cfg = pmmf::load_config_file(args.config_path);
    if (args.out_dir) cfg.output_dir = *args.out_dir;
    if (args.seed) cfg.seed = *args.seed;
    if (args.strict) cfg.strict = true;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Provider max-min fairness re-ranking experiments"};
    app.require_subcommand(1);

    CommonArgs run_args, regret_args, lorenz_args, bench_args, validate_args;
    std::vector<int> t_override;
    std::vector<double> lambda_override;
    std::vector<std::string> reg_override;
    std::string mode_override;
    std::vector<int> items_override;
    int reps_override = 0;

    CLI::App* run = app.add_subcommand("run", "Run policies over horizons");
    add_common(run, run_args);

    CLI::App* regret =
        app.add_subcommand("regret", "Summed regret versus horizon length");
    add_common(regret, regret_args);
    regret->add_option("--T", t_override, "Horizon lengths to sweep")
        ->delimiter(',');

    CLI::App* lorenz =
        app.add_subcommand("lorenz", "Lorenz curves of provider exposures");
    add_common(lorenz, lorenz_args);
    lorenz->add_option("--lambda", lambda_override, "Trade-off values")
        ->delimiter(',');
    lorenz->add_option("--regularizer", reg_override, "mmf and/or pf")
        ->delimiter(',');
    lorenz->add_option("--mode", mode_override, "offline or online");

    CLI::App* bench =
        app.add_subcommand("bench", "Per-arrival latency versus item count");
    add_common(bench, bench_args);
    bench->add_option("--items", items_override, "Item counts to benchmark")
        ->delimiter(',');
    bench->add_option("--reps", reps_override, "Timed repetitions");

    CLI::App* validate =
        app.add_subcommand("validate-config", "Parse and validate a config");
    add_common(validate, validate_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            pmmf::ExperimentConfig cfg = resolve(run_args);
            const pmmf::RunOutput out = pmmf::cmd_run(cfg);
            std::printf("wrote %zu records to %s\n", out.records.size(),
                        out.records_path.c_str());
            std::printf("wrote summary to %s\n", out.summary_path.c_str());
        } else if (regret->parsed()) {
            pmmf::ExperimentConfig cfg = resolve(regret_args);
            if (!t_override.empty()) cfg.regret_t_list = t_override;
            const auto rows = pmmf::cmd_regret(cfg, cfg.regret_t_list);
            std::printf("wrote %zu regret rows to %s/regret.csv\n",
                        rows.size(), cfg.output_dir.c_str());
        } else if (lorenz->parsed()) {
            pmmf::ExperimentConfig cfg = resolve(lorenz_args);
            if (!lambda_override.empty()) cfg.lorenz_lambdas = lambda_override;
            if (!reg_override.empty()) {
                cfg.lorenz_regularizers.clear();
                for (const std::string& r : reg_override)
                    cfg.lorenz_regularizers.push_back(
                        pmmf::detail::parse_regularizer(r));
            }
            if (!mode_override.empty()) {
                if (mode_override == "offline")
                    cfg.lorenz_mode = pmmf::LorenzMode::Offline;
                else if (mode_override == "online")
                    cfg.lorenz_mode = pmmf::LorenzMode::Online;
                else
                    throw pmmf::ConfigError("unknown lorenz mode '" +
                                            mode_override + "'");
            }
            const auto rows = pmmf::cmd_lorenz(cfg);
            std::printf("wrote %zu lorenz curves to %s/lorenz.csv\n",
                        rows.size(), cfg.output_dir.c_str());
        } else if (bench->parsed()) {
            pmmf::ExperimentConfig cfg = resolve(bench_args);
            if (!items_override.empty()) cfg.bench_item_counts = items_override;
            if (reps_override > 0) cfg.bench_repetitions = reps_override;
            const auto rows = pmmf::cmd_bench(cfg);
            for (const auto& row : rows)
                std::printf("items=%d select=%.4fms dual=%.4fms\n",
                            row.item_count, row.select_mean_ms,
                            row.dual_mean_ms);
            std::printf("wrote bench data to %s/bench.csv\n",
                        cfg.output_dir.c_str());
        } else if (validate->parsed()) {
            pmmf::ExperimentConfig cfg = resolve(validate_args);
            std::printf("%s\n", pmmf::resolved_config_json(cfg).dump(2).c_str());
        }
    } catch (const pmmf::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const pmmf::OracleBudgetError& e) {
        std::fprintf(stderr, "oracle budget error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}

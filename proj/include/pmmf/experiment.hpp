#pragma once

// Experiment driver behind the CLI: config file parsing with defaults,
// per-horizon policy runs with JSONL reports, the regret-versus-T sweep,
// Lorenz-curve extraction, and the per-arrival latency benchmark.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmmf/core.hpp"
#include "pmmf/dataset.hpp"
#include "pmmf/dual_engine.hpp"
#include "pmmf/metrics.hpp"
#include "pmmf/oracle.hpp"
#include "pmmf/policies.hpp"
#include "pmmf/regularizer.hpp"

namespace pmmf {

using Json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FilesSpec {
    std::string scores;
    std::string providers;
    std::string arrivals;
};

enum class WeightScheme { Formula, UniformKT, Explicit };
enum class LorenzMode { Offline, Online };

struct ExperimentConfig {
    std::optional<FilesSpec> files;
    std::optional<SyntheticSpec> synthetic;
    HorizonConfig horizon{10, 256, 1.0};
    WeightScheme weight_scheme = WeightScheme::Formula;
    Vec explicit_gamma;
    std::vector<Policy> policies;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::uint64_t oracle_budget = 10'000'000;
    bool strict = false;
    bool normalize_scores = true;
    bool allow_degenerate_scores = false;
    bool compute_regret = false;
    std::vector<int> regret_t_list{2, 4, 8};
    std::vector<double> lorenz_lambdas{0.01, 0.05, 0.1};
    std::vector<Regularizer> lorenz_regularizers{Regularizer::MMF,
                                                 Regularizer::PF};
    LorenzMode lorenz_mode = LorenzMode::Offline;
    std::vector<int> bench_item_counts{1000, 10000, 100000};
    int bench_repetitions = 3;
    int bench_provider_count = 100;
    int bench_user_count = 8;
};

namespace detail {

template <typename T>
T get_or(const Json& j, const std::string& key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError("config: bad value for '" + key + "': " + e.what());
    }
}

inline Policy parse_policy(const Json& j) {
    if (!j.contains("kind"))
        throw ConfigError("config: policy entry without 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    Policy p;
    if (kind == "pmmf") p.kind = Policy::Kind::PMMF;
    else if (kind == "greedy") p.kind = Policy::Kind::Greedy;
    else if (kind == "kneighbor") p.kind = Policy::Kind::KNeighbor;
    else if (kind == "min_regularizer") p.kind = Policy::Kind::MinRegularizer;
    else if (kind == "dual_no_momentum") p.kind = Policy::Kind::DualNoMomentum;
    else throw ConfigError("config: unknown policy kind '" + kind + "'");
    p.alpha = get_or(j, "alpha", 0.4);
    p.step_coefficient = get_or(j, "step_coefficient", 1e-3);
    p.lambda_penalty = get_or(j, "lambda_penalty", 1.0);
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return p;
}

inline Regularizer parse_regularizer(const std::string& name) {
    if (name == "mmf") return Regularizer::MMF;
    if (name == "pf") return Regularizer::PF;
    throw ConfigError("config: unknown regularizer '" + name + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config(const Json& j) {
    ExperimentConfig cfg;
    if (!j.is_object()) throw ConfigError("config: top level must be an object");

    if (!j.contains("dataset"))
        throw ConfigError("config: missing 'dataset' section");
    const Json& ds = j.at("dataset");
    if (ds.contains("files") == ds.contains("synthetic"))
        throw ConfigError(
            "config: dataset needs exactly one of 'files' or 'synthetic'");
    if (ds.contains("files")) {
        const Json& f = ds.at("files");
        FilesSpec files;
        files.scores = detail::get_or<std::string>(f, "scores", "");
        files.providers = detail::get_or<std::string>(f, "providers", "");
        files.arrivals = detail::get_or<std::string>(f, "arrivals", "");
        if (files.scores.empty() || files.providers.empty() ||
            files.arrivals.empty())
            throw ConfigError(
                "config: dataset.files needs scores, providers and arrivals "
                "paths");
        cfg.files = std::move(files);
    } else {
        const Json& s = ds.at("synthetic");
        SyntheticSpec spec;
        spec.user_count = detail::get_or(s, "users", 0);
        spec.item_count = detail::get_or(s, "items", 0);
        spec.provider_count = detail::get_or(s, "providers", 0);
        const std::string score_dist =
            detail::get_or<std::string>(s, "score_distribution", "uniform");
        if (score_dist == "uniform")
            spec.score_distribution = ScoreDistribution::Uniform;
        else if (score_dist == "powerlaw")
            spec.score_distribution = ScoreDistribution::PowerLaw;
        else
            throw ConfigError("config: unknown score_distribution '" +
                              score_dist + "'");
        spec.score_exponent = detail::get_or(s, "score_exponent", 1.0);
        const std::string size_dist = detail::get_or<std::string>(
            s, "provider_size_distribution", "even");
        if (size_dist == "even")
            spec.provider_size_distribution = ProviderSizeDistribution::Even;
        else if (size_dist == "powerlaw")
            spec.provider_size_distribution = ProviderSizeDistribution::PowerLaw;
        else
            throw ConfigError("config: unknown provider_size_distribution '" +
                              size_dist + "'");
        spec.size_exponent = detail::get_or(s, "size_exponent", 1.0);
        spec.arrival_count = detail::get_or(s, "arrival_count", 0);
        cfg.synthetic = spec;
    }

    if (j.contains("horizon")) {
        const Json& h = j.at("horizon");
        cfg.horizon.K = detail::get_or(h, "K", cfg.horizon.K);
        cfg.horizon.T = detail::get_or(h, "T", cfg.horizon.T);
        cfg.horizon.lambda = detail::get_or(h, "lambda", cfg.horizon.lambda);
    }
    try {
        cfg.horizon.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    if (j.contains("weights")) {
        const Json& w = j.at("weights");
        const std::string scheme =
            detail::get_or<std::string>(w, "scheme", "formula");
        if (scheme == "formula") cfg.weight_scheme = WeightScheme::Formula;
        else if (scheme == "uniform_kt")
            cfg.weight_scheme = WeightScheme::UniformKT;
        else if (scheme == "explicit") {
            cfg.weight_scheme = WeightScheme::Explicit;
            cfg.explicit_gamma = detail::get_or(w, "gamma", Vec{});
            if (cfg.explicit_gamma.empty())
                throw ConfigError(
                    "config: weights.scheme 'explicit' needs a gamma array");
        } else {
            throw ConfigError("config: unknown weights scheme '" + scheme +
                              "'");
        }
    }

    if (!j.contains("policies") || !j.at("policies").is_array() ||
        j.at("policies").empty())
        throw ConfigError("config: needs a non-empty 'policies' array");
    for (const Json& p : j.at("policies"))
        cfg.policies.push_back(detail::parse_policy(p));

    cfg.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
    cfg.output_dir = detail::get_or<std::string>(j, "output_dir", "out");
    cfg.oracle_budget =
        detail::get_or<std::uint64_t>(j, "oracle_budget", 10'000'000);
    cfg.strict = detail::get_or(j, "strict", false);
    cfg.normalize_scores = detail::get_or(j, "normalize_scores", true);
    cfg.allow_degenerate_scores =
        detail::get_or(j, "allow_degenerate_scores", false);
    cfg.compute_regret = detail::get_or(j, "compute_regret", false);

    if (j.contains("regret")) {
        cfg.regret_t_list =
            detail::get_or(j.at("regret"), "T_list", cfg.regret_t_list);
        if (cfg.regret_t_list.empty())
            throw ConfigError("config: regret.T_list must be non-empty");
    }
    if (j.contains("lorenz")) {
        const Json& l = j.at("lorenz");
        cfg.lorenz_lambdas = detail::get_or(l, "lambdas", cfg.lorenz_lambdas);
        if (l.contains("regularizers")) {
            cfg.lorenz_regularizers.clear();
            for (const Json& r : l.at("regularizers"))
                cfg.lorenz_regularizers.push_back(
                    detail::parse_regularizer(r.get<std::string>()));
        }
        const std::string mode =
            detail::get_or<std::string>(l, "mode", "offline");
        if (mode == "offline") cfg.lorenz_mode = LorenzMode::Offline;
        else if (mode == "online") cfg.lorenz_mode = LorenzMode::Online;
        else throw ConfigError("config: unknown lorenz mode '" + mode + "'");
        if (cfg.lorenz_lambdas.empty() || cfg.lorenz_regularizers.empty())
            throw ConfigError("config: lorenz lists must be non-empty");
    }
    if (j.contains("bench")) {
        const Json& b = j.at("bench");
        cfg.bench_item_counts =
            detail::get_or(b, "item_counts", cfg.bench_item_counts);
        cfg.bench_repetitions =
            detail::get_or(b, "repetitions", cfg.bench_repetitions);
        cfg.bench_provider_count =
            detail::get_or(b, "providers", cfg.bench_provider_count);
        cfg.bench_user_count = detail::get_or(b, "users", cfg.bench_user_count);
        if (cfg.bench_item_counts.empty() || cfg.bench_repetitions < 1)
            throw ConfigError("config: bad bench section");
    }

    if (cfg.files) {
        for (const std::string& path :
             {cfg.files->scores, cfg.files->providers, cfg.files->arrivals})
            if (!std::filesystem::exists(path))
                throw ConfigError("config: referenced file does not exist: " +
                                  path);
    }
    return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw ConfigError("config: " + path + " is not valid JSON: " +
                          e.what());
    }
    return parse_config(j);
}

// Full resolved configuration (defaults filled) echoed into every output so
// a record suffices to reproduce its run.
inline Json resolved_config_json(const ExperimentConfig& cfg) {
    Json j;
    Json ds;
    if (cfg.files) {
        ds["files"] = {{"scores", cfg.files->scores},
                       {"providers", cfg.files->providers},
                       {"arrivals", cfg.files->arrivals}};
    } else if (cfg.synthetic) {
        const SyntheticSpec& s = *cfg.synthetic;
        ds["synthetic"] = {
            {"users", s.user_count},
            {"items", s.item_count},
            {"providers", s.provider_count},
            {"score_distribution",
             s.score_distribution == ScoreDistribution::Uniform ? "uniform"
                                                                : "powerlaw"},
            {"score_exponent", s.score_exponent},
            {"provider_size_distribution",
             s.provider_size_distribution == ProviderSizeDistribution::Even
                 ? "even"
                 : "powerlaw"},
            {"size_exponent", s.size_exponent},
            {"arrival_count", s.arrival_count}};
    }
    j["dataset"] = std::move(ds);
    j["horizon"] = {{"K", cfg.horizon.K},
                    {"T", cfg.horizon.T},
                    {"lambda", cfg.horizon.lambda}};
    Json w;
    switch (cfg.weight_scheme) {
    case WeightScheme::Formula: w["scheme"] = "formula"; break;
    case WeightScheme::UniformKT: w["scheme"] = "uniform_kt"; break;
    case WeightScheme::Explicit:
        w["scheme"] = "explicit";
        w["gamma"] = cfg.explicit_gamma;
        break;
    }
    j["weights"] = std::move(w);
    Json policies = Json::array();
    for (const Policy& p : cfg.policies) {
        Json e;
        e["kind"] = policy_name(p);
        if (p.kind == Policy::Kind::PMMF) e["alpha"] = p.alpha;
        if (p.kind == Policy::Kind::PMMF ||
            p.kind == Policy::Kind::DualNoMomentum)
            e["step_coefficient"] = p.step_coefficient;
        if (p.kind == Policy::Kind::MinRegularizer)
            e["lambda_penalty"] = p.lambda_penalty;
        policies.push_back(std::move(e));
    }
    j["policies"] = std::move(policies);
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    j["oracle_budget"] = cfg.oracle_budget;
    j["strict"] = cfg.strict;
    j["normalize_scores"] = cfg.normalize_scores;
    j["allow_degenerate_scores"] = cfg.allow_degenerate_scores;
    j["compute_regret"] = cfg.compute_regret;
    j["regret"] = {{"T_list", cfg.regret_t_list}};
    Json regs = Json::array();
    for (Regularizer r : cfg.lorenz_regularizers)
        regs.push_back(regularizer_name(r));
    j["lorenz"] = {{"lambdas", cfg.lorenz_lambdas},
                   {"regularizers", std::move(regs)},
                   {"mode", cfg.lorenz_mode == LorenzMode::Offline
                                ? "offline"
                                : "online"}};
    j["bench"] = {{"item_counts", cfg.bench_item_counts},
                  {"repetitions", cfg.bench_repetitions},
                  {"providers", cfg.bench_provider_count},
                  {"users", cfg.bench_user_count}};
    return j;
}

namespace detail {

inline ProviderWeights weights_for(const ExperimentConfig& cfg,
                                   const Catalog& catalog,
                                   const HorizonConfig& horizon) {
    switch (cfg.weight_scheme) {
    case WeightScheme::Formula: return default_weights(catalog, horizon);
    case WeightScheme::UniformKT:
        return uniform_kt_weights(catalog.provider_count, horizon);
    case WeightScheme::Explicit:
        try {
            ProviderWeights w =
                ProviderWeights::from_gamma(cfg.explicit_gamma, horizon);
            w.validate(catalog.provider_count);
            return w;
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }
    throw std::logic_error("weights_for: unhandled scheme");
}

}  // namespace detail

// Builds the instance a config describes, with the given horizon (the
// regret sweep rebuilds the same dataset under several horizon lengths).
inline Instance build_from_config(const ExperimentConfig& cfg,
                                  const HorizonConfig& horizon) {
    if (cfg.synthetic) {
        SyntheticSpec spec = *cfg.synthetic;
        spec.seed = cfg.seed;
        try {
            spec.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        Instance inst = generate_synthetic(spec, horizon);
        if (cfg.weight_scheme != WeightScheme::Formula) {
            ProviderWeights w =
                detail::weights_for(cfg, inst.catalog, horizon);
            inst = build_instance(std::move(inst.catalog),
                                  std::move(inst.scores), horizon,
                                  std::move(w), std::move(inst.arrivals));
        }
        return inst;
    }
    CatalogLoad load = load_provider_map(cfg.files->providers);
    StringIndex users;
    LoadOptions options{cfg.normalize_scores, cfg.allow_degenerate_scores};
    PreferenceScores scores = load_scores(cfg.files->scores,
                                          ScoreFormat::Triplets, load.items,
                                          users, options);
    ArrivalStream arrivals = load_arrivals(cfg.files->arrivals, users);
    ProviderWeights weights = detail::weights_for(cfg, load.catalog, horizon);
    return build_instance(std::move(load.catalog), std::move(scores), horizon,
                          std::move(weights), std::move(arrivals));
}

inline Instance build_from_config(const ExperimentConfig& cfg) {
    return build_from_config(cfg, cfg.horizon);
}

struct RunOutput {
    std::vector<Json> records;  // one per (policy, horizon)
    Json summary;
    std::string records_path;
    std::string summary_path;
};

// Runs every configured policy over every full horizon, writing one JSONL
// record per (policy, horizon) plus an aggregate summary.
inline RunOutput cmd_run(const ExperimentConfig& cfg) {
    const Instance inst = build_from_config(cfg);
    const std::vector<ArrivalStream> horizons =
        split_horizons(inst.arrivals, inst.horizon.T);
    const int dropped = static_cast<int>(inst.arrivals.size()) -
                        static_cast<int>(horizons.size()) * inst.horizon.T;
    const FillMode fill = cfg.strict ? FillMode::Strict : FillMode::Fill;
    const Json config_echo = resolved_config_json(cfg);

    RunOutput out;
    Json per_policy = Json::object();
    for (const Policy& policy : cfg.policies) {
        const std::string name = policy_name(policy);
        double sum_ndcg = 0.0, sum_paper = 0.0, sum_mmf = 0.0, sum_w = 0.0,
               sum_gini = 0.0, sum_regret = 0.0;
        int overshoots = 0;
        for (std::size_t h = 0; h < horizons.size(); ++h) {
            const ArrivalStream& arrivals = horizons[h];
            HorizonTrace trace;
            try {
                trace = run_policy(inst, arrivals, policy, fill);
            } catch (const std::exception& e) {
                throw std::runtime_error("run: policy '" + name +
                                         "' failed on horizon " +
                                         std::to_string(h) + ": " + e.what());
            }
            std::optional<double> regret;
            if (cfg.compute_regret)
                regret = empirical_regret(inst, arrivals, trace,
                                          Regularizer::MMF, cfg.oracle_budget);
            const RunReport report = make_report(inst, arrivals, trace, regret);
            Json record;
            record["policy"] = name;
            record["horizon_index"] = h;
            record["ndcg_at_k"] = report.ndcg_at_k;
            record["ndcg_paper_form"] = report.ndcg_paper_form;
            record["mmf_at_k"] = report.mmf_at_k;
            record["w_lambda_at_k"] = report.w_lambda_at_k;
            record["gini"] = report.lorenz.gini;
            record["overshoot_count"] = report.overshoot_count;
            if (report.regret) record["regret"] = *report.regret;
            record["config"] = config_echo;
            out.records.push_back(std::move(record));

            sum_ndcg += report.ndcg_at_k;
            sum_paper += report.ndcg_paper_form;
            sum_mmf += report.mmf_at_k;
            sum_w += report.w_lambda_at_k;
            sum_gini += report.lorenz.gini;
            overshoots += report.overshoot_count;
            if (report.regret) sum_regret += *report.regret;
        }
        const double nh = static_cast<double>(horizons.size());
        Json agg;
        agg["ndcg_at_k"] = sum_ndcg / nh;
        agg["ndcg_paper_form"] = sum_paper / nh;
        agg["mmf_at_k"] = sum_mmf / nh;
        agg["w_lambda_at_k"] = sum_w / nh;
        agg["gini"] = sum_gini / nh;
        agg["overshoot_count"] = overshoots;
        if (cfg.compute_regret) agg["summed_regret"] = sum_regret;
        per_policy[name] = std::move(agg);
    }

    out.summary["horizon_count"] = horizons.size();
    out.summary["dropped_arrivals"] = dropped;
    out.summary["policy_means"] = std::move(per_policy);
    out.summary["config"] = config_echo;

    std::filesystem::create_directories(cfg.output_dir);
    out.records_path =
        (std::filesystem::path(cfg.output_dir) / "runs.jsonl").string();
    out.summary_path =
        (std::filesystem::path(cfg.output_dir) / "summary.json").string();
    std::ofstream records_file(out.records_path);
    for (const Json& record : out.records) records_file << record.dump() << '\n';
    std::ofstream summary_file(out.summary_path);
    summary_file << out.summary.dump(2) << '\n';
    return out;
}

struct RegretRow {
    int T;
    std::string policy;
    double summed_regret;
};

// Regret-versus-T sweep with the total arrival count held fixed: for each T
// the stream splits into N/T horizons and per-horizon regrets are summed.
// Always includes a row replaying the offline oracle's own plan.
inline std::vector<RegretRow> cmd_regret(const ExperimentConfig& cfg,
                                         const std::vector<int>& t_list) {
    if (t_list.empty()) throw ConfigError("regret: empty T list");
    const FillMode fill = cfg.strict ? FillMode::Strict : FillMode::Fill;
    std::vector<RegretRow> rows;
    for (int T : t_list) {
        HorizonConfig horizon = cfg.horizon;
        horizon.T = T;
        const Instance inst = build_from_config(cfg, horizon);
        const std::vector<ArrivalStream> horizons =
            split_horizons(inst.arrivals, T);
        std::vector<double> sums(cfg.policies.size(), 0.0);
        double oracle_sum = 0.0;
        for (const ArrivalStream& arrivals : horizons) {
            const OracleResult oracle = solve_offline(
                inst, arrivals, Regularizer::MMF, cfg.oracle_budget);
            for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
                const HorizonTrace trace =
                    run_policy(inst, arrivals, cfg.policies[i], fill);
                sums[i] += oracle.w_opt - online_objective(inst, trace);
            }
            const HorizonTrace replay =
                replay_decisions(inst, arrivals, oracle.best_decisions);
            oracle_sum += oracle.w_opt - online_objective(inst, replay);
        }
        for (std::size_t i = 0; i < cfg.policies.size(); ++i)
            rows.push_back({T, policy_name(cfg.policies[i]), sums[i]});
        rows.push_back({T, "oracle", oracle_sum});
    }

    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream csv(
        (std::filesystem::path(cfg.output_dir) / "regret.csv").string());
    csv << "T,policy,summed_regret\n";
    for (const RegretRow& row : rows)
        csv << row.T << ',' << row.policy << ','
            << Json(row.summed_regret).dump() << '\n';
    return rows;
}

struct LorenzRow {
    std::string mode;
    Regularizer regularizer;
    double lambda;
    LorenzCurve curve;
};

// Lorenz curves of provider exposures per (lambda, regularizer): offline
// mode re-solves the offline program, online mode runs the dual-descent
// policy; exposures are aggregated over all full horizons.
inline std::vector<LorenzRow> cmd_lorenz(const ExperimentConfig& cfg) {
    if (cfg.lorenz_mode == LorenzMode::Online) {
        for (Regularizer r : cfg.lorenz_regularizers)
            if (r == Regularizer::PF)
                throw ConfigError(
                    "lorenz: online mode supports only the mmf regularizer");
    }
    Policy pmmf_policy;
    pmmf_policy.kind = Policy::Kind::PMMF;
    for (const Policy& p : cfg.policies)
        if (p.kind == Policy::Kind::PMMF) pmmf_policy = p;

    std::vector<LorenzRow> rows;
    for (double lambda : cfg.lorenz_lambdas) {
        require(lambda >= 0.0, "lorenz: lambda must be >= 0");
        HorizonConfig horizon = cfg.horizon;
        horizon.lambda = lambda;
        const Instance inst = build_from_config(cfg, horizon);
        const std::vector<ArrivalStream> horizons =
            split_horizons(inst.arrivals, horizon.T);
        for (Regularizer reg : cfg.lorenz_regularizers) {
            Vec exposures(static_cast<std::size_t>(inst.catalog.provider_count),
                          0.0);
            for (const ArrivalStream& arrivals : horizons) {
                Vec final_exposures;
                if (cfg.lorenz_mode == LorenzMode::Offline) {
                    final_exposures =
                        solve_offline(inst, arrivals, reg, cfg.oracle_budget)
                            .best_exposures;
                } else {
                    final_exposures =
                        run_pmmf(inst, arrivals,
                                 PmmfParams{pmmf_policy.alpha,
                                            pmmf_policy.step_coefficient},
                                 cfg.strict ? FillMode::Strict : FillMode::Fill)
                            .exposures_final;
                }
                for (std::size_t p = 0; p < exposures.size(); ++p)
                    exposures[p] += final_exposures[p];
            }
            rows.push_back({cfg.lorenz_mode == LorenzMode::Offline ? "offline"
                                                                   : "online",
                            reg, lambda, lorenz_and_gini(exposures)});
        }
    }

    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream csv(
        (std::filesystem::path(cfg.output_dir) / "lorenz.csv").string());
    csv << "mode,regularizer,lambda,provider_fraction,exposure_share,gini\n";
    for (const LorenzRow& row : rows)
        for (const LorenzPoint& pt : row.curve.points)
            csv << row.mode << ',' << regularizer_name(row.regularizer) << ','
                << Json(row.lambda).dump() << ','
                << Json(pt.provider_fraction).dump() << ','
                << Json(pt.exposure_share).dump() << ','
                << Json(row.curve.gini).dump() << '\n';
    return rows;
}

struct BenchRow {
    int item_count;
    int samples;
    double select_mean_ms;
    double select_p95_ms;
    double dual_mean_ms;
    double dual_p95_ms;
    double total_mean_ms;
};

namespace detail {

inline double mean_ms(std::vector<double>& samples) {
    double sum = 0.0;
    for (double s : samples) sum += s;
    return sum / static_cast<double>(samples.size());
}

inline double p95_ms(std::vector<double>& samples) {
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t idx = static_cast<std::size_t>(
        0.95 * static_cast<double>(sorted.size() - 1));
    return sorted[idx];
}

}  // namespace detail

// Per-arrival latency of the hot path (selection and dual update, no I/O)
// while the item count grows and the provider and user counts stay fixed.
// One untimed warm-up horizon precedes the timed repetitions.
inline std::vector<BenchRow> cmd_bench(const ExperimentConfig& cfg) {
    using Clock = std::chrono::steady_clock;
    if (cfg.horizon.lambda <= 0.0)
        throw ConfigError("bench: needs lambda > 0 (the dual path is timed)");
    std::vector<BenchRow> rows;
    for (int items : cfg.bench_item_counts) {
        SyntheticSpec spec;
        spec.user_count = cfg.bench_user_count;
        spec.item_count = items;
        spec.provider_count = cfg.bench_provider_count;
        spec.seed = cfg.seed;
        spec.arrival_count = cfg.horizon.T;
        const Instance inst = generate_synthetic(spec, cfg.horizon);
        const int T = cfg.horizon.T;
        const int P = inst.catalog.provider_count;

        std::vector<double> select_ms, dual_ms;
        select_ms.reserve(static_cast<std::size_t>(T * cfg.bench_repetitions));
        dual_ms.reserve(static_cast<std::size_t>(T * cfg.bench_repetitions));
        for (int rep = -1; rep < cfg.bench_repetitions; ++rep) {
            const bool warmup = rep < 0;
            ExposureState ex = ExposureState::fresh(inst.weights);
            DualState dual = DualState::fresh(
                P,
                1e-3 / std::sqrt(static_cast<double>(T)), 0.4);
            ProjectionWorkspace ws;
            std::vector<std::uint8_t> mask(static_cast<std::size_t>(P), 0);
            Vec row;
            for (int t = 0; t < T; ++t) {
                const int user = inst.arrivals[static_cast<std::size_t>(t)];
                inst.scores.fill_row(user, row);
                for (int p = 0; p < P; ++p)
                    mask[static_cast<std::size_t>(p)] =
                        ex.remaining[static_cast<std::size_t>(p)] <= 0.0 ? 1
                                                                         : 0;
                const auto t0 = Clock::now();
                Decision d = select_topk_dual(row, dual.mu, mask,
                                              cfg.horizon.K, T, inst.catalog);
                const auto t1 = Clock::now();
                dual = dual_update(dual, d, ex, inst.weights.gamma,
                                   cfg.horizon.lambda, ws);
                const auto t2 = Clock::now();
                ex.apply(d);
                if (!warmup) {
                    select_ms.push_back(
                        std::chrono::duration<double, std::milli>(t1 - t0)
                            .count());
                    dual_ms.push_back(
                        std::chrono::duration<double, std::milli>(t2 - t1)
                            .count());
                }
            }
        }
        BenchRow bench_row;
        bench_row.item_count = items;
        bench_row.samples = static_cast<int>(select_ms.size());
        bench_row.select_mean_ms = detail::mean_ms(select_ms);
        bench_row.select_p95_ms = detail::p95_ms(select_ms);
        bench_row.dual_mean_ms = detail::mean_ms(dual_ms);
        bench_row.dual_p95_ms = detail::p95_ms(dual_ms);
        bench_row.total_mean_ms =
            bench_row.select_mean_ms + bench_row.dual_mean_ms;
        rows.push_back(bench_row);
    }

    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream csv(
        (std::filesystem::path(cfg.output_dir) / "bench.csv").string());
    csv << "item_count,samples,select_mean_ms,select_p95_ms,dual_mean_ms,"
           "dual_p95_ms,total_mean_ms\n";
    for (const BenchRow& row : rows)
        csv << row.item_count << ',' << row.samples << ','
            << Json(row.select_mean_ms).dump() << ','
            << Json(row.select_p95_ms).dump() << ','
            << Json(row.dual_mean_ms).dump() << ','
            << Json(row.dual_p95_ms).dump() << ','
            << Json(row.total_mean_ms).dump() << '\n';
    return rows;
}

}  // namespace pmmf

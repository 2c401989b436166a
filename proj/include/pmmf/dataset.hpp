#pragma once

// Data ingestion and synthesis: CSV loaders for score/provider/arrival
// files, horizon splitting, and a deterministic synthetic-instance generator
// for property tests and desk-scale experiments.

#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "pmmf/core.hpp"

namespace pmmf {

// Bidirectional string id <-> dense index dictionary, first-seen order.
class StringIndex {
public:
    int add_or_get(const std::string& id) {
        auto it = index_.find(id);
        if (it != index_.end()) return it->second;
        const int idx = static_cast<int>(names_.size());
        names_.push_back(id);
        index_.emplace(id, idx);
        return idx;
    }

    int get(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end())
            throw std::out_of_range("unknown id: " + id);
        return it->second;
    }

    bool contains(const std::string& id) const {
        return index_.count(id) != 0;
    }

    const std::string& name(int idx) const {
        return names_.at(static_cast<std::size_t>(idx));
    }

    int size() const { return static_cast<int>(names_.size()); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
};

struct LoadOptions {
    bool normalize = true;          // min-max normalize raw scores to [0,1]
    bool allow_degenerate = false;  // all-equal scores map to 0.5 instead of erroring
};

namespace detail {

struct CsvRow {
    std::vector<std::string> fields;
    int line_number = 0;
};

class CsvReader {
public:
    CsvReader(const std::string& path, const std::vector<std::string>& header) {
        file_.open(path);
        if (!file_)
            throw std::runtime_error("cannot open file: " + path);
        path_ = path;
        std::string line;
        if (!std::getline(file_, line))
            throw std::runtime_error(path + ": empty file");
        ++line_number_;
        CsvRow head{split(line), line_number_};
        if (head.fields != header) {
            std::string expect;
            for (const auto& h : header)
                expect += (expect.empty() ? "" : ",") + h;
            throw std::runtime_error(path + ":1: expected header '" + expect +
                                     "'");
        }
    }

    bool next(CsvRow& row) {
        std::string line;
        while (std::getline(file_, line)) {
            ++line_number_;
            if (line.empty()) continue;
            row.fields = split(line);
            row.line_number = line_number_;
            return true;
        }
        return false;
    }

    std::string where(int line) const {
        return path_ + ":" + std::to_string(line);
    }

private:
    static std::vector<std::string> split(const std::string& line) {
        std::vector<std::string> out;
        std::string field;
        std::stringstream ss(line);
        while (std::getline(ss, field, ',')) {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            out.push_back(field);
        }
        if (!line.empty() && line.back() == ',') out.push_back("");
        return out;
    }

    std::ifstream file_;
    std::string path_;
    int line_number_ = 0;
};

inline double parse_score(const std::string& text, const std::string& where) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::runtime_error(where + ": cannot parse score '" + text + "'");
    }
    if (used != text.size())
        throw std::runtime_error(where + ": cannot parse score '" + text + "'");
    return value;
}

}  // namespace detail

struct CatalogLoad {
    Catalog catalog;
    StringIndex items;
    StringIndex providers;
};

// Provider map CSV with header `item_id,provider_id`; every item exactly once.
inline CatalogLoad load_provider_map(const std::string& path) {
    detail::CsvReader reader(path, {"item_id", "provider_id"});
    CatalogLoad out;
    std::vector<int> provider_of;
    detail::CsvRow row;
    bool any = false;
    while (reader.next(row)) {
        any = true;
        if (row.fields.size() != 2)
            throw std::runtime_error(reader.where(row.line_number) +
                                     ": expected 2 fields");
        const std::string& item_id = row.fields[0];
        const std::string& provider_id = row.fields[1];
        if (out.items.contains(item_id))
            throw std::runtime_error(reader.where(row.line_number) +
                                     ": item '" + item_id +
                                     "' listed more than once");
        out.items.add_or_get(item_id);
        provider_of.push_back(out.providers.add_or_get(provider_id));
    }
    if (!any)
        throw std::runtime_error(path + ": no provider rows");
    out.catalog = Catalog::build(std::move(provider_of), out.providers.size());
    return out;
}

// Canonical serialization of a loaded catalog, item-index order. A file in
// this form round-trips byte-exactly through load_provider_map.
inline std::string catalog_to_csv(const Catalog& catalog,
                                  const StringIndex& items,
                                  const StringIndex& providers) {
    std::string out = "item_id,provider_id\n";
    for (int i = 0; i < catalog.item_count; ++i) {
        out += items.name(i);
        out += ',';
        out += providers.name(catalog.provider_of[static_cast<std::size_t>(i)]);
        out += '\n';
    }
    return out;
}

enum class ScoreFormat { Triplets };

// Score CSV with header `user_id,item_id,score`. Item ids must come from the
// provider map's dictionary; users get dense indices in first-seen order.
// Raw scores are min-max normalized to [0,1] unless disabled.
inline PreferenceScores load_scores(const std::string& path, ScoreFormat format,
                                    const StringIndex& items,
                                    StringIndex& users,
                                    const LoadOptions& options = {}) {
    require(format == ScoreFormat::Triplets, "load_scores: unknown format");
    detail::CsvReader reader(path, {"user_id", "item_id", "score"});
    struct Entry {
        int user;
        int item;
        double raw;
    };
    std::vector<Entry> entries;
    std::unordered_map<std::int64_t, int> seen;  // (user,item) -> line
    detail::CsvRow row;
    double lo = 0.0, hi = 0.0;
    while (reader.next(row)) {
        if (row.fields.size() != 3)
            throw std::runtime_error(reader.where(row.line_number) +
                                     ": expected 3 fields");
        if (!items.contains(row.fields[1]))
            throw std::runtime_error(reader.where(row.line_number) +
                                     ": item '" + row.fields[1] +
                                     "' not present in the provider map");
        const int user = users.add_or_get(row.fields[0]);
        const int item = items.get(row.fields[1]);
        const double raw = detail::parse_score(
            row.fields[2], reader.where(row.line_number));
        const std::int64_t key =
            static_cast<std::int64_t>(user) * items.size() + item;
        auto inserted = seen.emplace(key, row.line_number);
        if (!inserted.second)
            throw std::runtime_error(
                reader.where(row.line_number) + ": duplicate pair (" +
                row.fields[0] + "," + row.fields[1] + "), first seen at line " +
                std::to_string(inserted.first->second));
        if (entries.empty()) {
            lo = hi = raw;
        } else {
            lo = std::min(lo, raw);
            hi = std::max(hi, raw);
        }
        entries.push_back({user, item, raw});
    }
    if (entries.empty())
        throw std::runtime_error(path + ": no score rows");

    PreferenceScores scores(users.size(), items.size());
    if (options.normalize && hi == lo) {
        if (!options.allow_degenerate)
            throw std::runtime_error(
                path + ": all scores are equal (" + std::to_string(lo) +
                "); min-max normalization is degenerate");
        for (const Entry& e : entries) scores.set(e.user, e.item, 0.5);
        return scores;
    }
    for (const Entry& e : entries) {
        const double value =
            options.normalize ? (e.raw - lo) / (hi - lo) : e.raw;
        scores.set(e.user, e.item, value);
    }
    return scores;
}

// Arrival CSV with header `user_id`, chronological, users from the score
// file's dictionary.
inline ArrivalStream load_arrivals(const std::string& path,
                                   const StringIndex& users) {
    detail::CsvReader reader(path, {"user_id"});
    ArrivalStream arrivals;
    detail::CsvRow row;
    while (reader.next(row)) {
        if (row.fields.size() != 1)
            throw std::runtime_error(reader.where(row.line_number) +
                                     ": expected 1 field");
        if (!users.contains(row.fields[0]))
            throw std::runtime_error(reader.where(row.line_number) +
                                     ": user '" + row.fields[0] +
                                     "' has no scores");
        arrivals.push_back(users.get(row.fields[0]));
    }
    if (arrivals.empty())
        throw std::runtime_error(path + ": no arrivals");
    return arrivals;
}

// Splits arrivals into floor(N/T) full horizons of exactly T, dropping the
// trailing remainder.
inline std::vector<ArrivalStream> split_horizons(const ArrivalStream& arrivals,
                                                 int T) {
    require(T >= 1, "split_horizons: T must be >= 1");
    require(!arrivals.empty(), "split_horizons: arrivals must be non-empty");
    const int N = static_cast<int>(arrivals.size());
    if (N < T)
        throw std::invalid_argument(
            "split_horizons: " + std::to_string(N) +
            " arrivals cannot fill a horizon of length " + std::to_string(T));
    std::vector<ArrivalStream> horizons;
    horizons.reserve(static_cast<std::size_t>(N / T));
    for (int start = 0; start + T <= N; start += T)
        horizons.emplace_back(arrivals.begin() + start,
                              arrivals.begin() + start + T);
    return horizons;
}

enum class ScoreDistribution { Uniform, PowerLaw };
enum class ProviderSizeDistribution { Even, PowerLaw };

struct SyntheticSpec {
    int user_count = 0;
    int item_count = 0;
    int provider_count = 0;
    ScoreDistribution score_distribution = ScoreDistribution::Uniform;
    double score_exponent = 1.0;  // score = u^exponent for PowerLaw
    ProviderSizeDistribution provider_size_distribution =
        ProviderSizeDistribution::Even;
    double size_exponent = 1.0;  // provider p weight (p+1)^-exponent
    std::uint64_t seed = 0;
    int arrival_count = 0;  // 0 means exactly one horizon (T arrivals)

    void validate() const {
        require(user_count >= 1, "synthetic: user_count must be >= 1");
        require(item_count >= 1, "synthetic: item_count must be >= 1");
        require(provider_count >= 1, "synthetic: provider_count must be >= 1");
        require(provider_count <= item_count,
                "synthetic: more providers than items");
        if (score_distribution == ScoreDistribution::PowerLaw)
            require(score_exponent > 0.0,
                    "synthetic: score exponent must be > 0");
        if (provider_size_distribution == ProviderSizeDistribution::PowerLaw)
            require(size_exponent > 0.0,
                    "synthetic: size exponent must be > 0");
        require(arrival_count >= 0, "synthetic: arrival_count must be >= 0");
    }
};

namespace detail {

// Uniform double in [0,1) from the raw engine; bit-exact across platforms,
// unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Largest-remainder allocation of item_count items proportional to weights,
// at least one item per provider.
inline std::vector<int> allocate_sizes(const std::vector<double>& weights,
                                       int item_count) {
    const int P = static_cast<int>(weights.size());
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<int> sizes(static_cast<std::size_t>(P), 1);
    int assigned = P;
    std::vector<std::pair<double, int>> remainders;
    remainders.reserve(static_cast<std::size_t>(P));
    for (int p = 0; p < P; ++p) {
        const double exact =
            weights[static_cast<std::size_t>(p)] / total * item_count;
        const int extra = std::max(0, static_cast<int>(std::floor(exact)) - 1);
        sizes[static_cast<std::size_t>(p)] += extra;
        assigned += extra;
        remainders.emplace_back(exact - std::floor(exact), p);
    }
    std::sort(remainders.begin(), remainders.end(),
              [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first > b.first;
                  return a.second < b.second;
              });
    for (std::size_t i = 0; assigned < item_count; ++i) {
        sizes[static_cast<std::size_t>(
            remainders[i % remainders.size()].second)] += 1;
        ++assigned;
    }
    while (assigned > item_count) {
        // Over-assignment can only come from the one-item floor; take back
        // from the largest providers.
        auto it = std::max_element(sizes.begin(), sizes.end());
        require(*it > 1, "synthetic: cannot honor one item per provider");
        --(*it);
        --assigned;
    }
    return sizes;
}

}  // namespace detail

// Deterministic provider sizes for a spec; exposed so tests can check the
// generator against an independent computation.
inline std::vector<int> synthetic_provider_sizes(const SyntheticSpec& spec) {
    spec.validate();
    std::vector<double> weights(static_cast<std::size_t>(spec.provider_count));
    for (int p = 0; p < spec.provider_count; ++p) {
        weights[static_cast<std::size_t>(p)] =
            spec.provider_size_distribution == ProviderSizeDistribution::Even
                ? 1.0
                : std::pow(static_cast<double>(p + 1), -spec.size_exponent);
    }
    return detail::allocate_sizes(weights, spec.item_count);
}

// Pure function of (spec, horizon): same inputs, same instance.
inline Instance generate_synthetic(const SyntheticSpec& spec,
                                   const HorizonConfig& horizon) {
    spec.validate();
    horizon.validate();

    const std::vector<int> sizes = synthetic_provider_sizes(spec);
    std::vector<int> provider_of;
    provider_of.reserve(static_cast<std::size_t>(spec.item_count));
    for (int p = 0; p < spec.provider_count; ++p)
        provider_of.insert(provider_of.end(),
                           static_cast<std::size_t>(
                               sizes[static_cast<std::size_t>(p)]),
                           p);
    Catalog catalog = Catalog::build(std::move(provider_of),
                                     spec.provider_count);

    std::mt19937_64 rng(spec.seed);
    PreferenceScores scores(spec.user_count, spec.item_count);
    for (int u = 0; u < spec.user_count; ++u) {
        for (int i = 0; i < spec.item_count; ++i) {
            const double raw = detail::uniform01(rng);
            const double value =
                spec.score_distribution == ScoreDistribution::PowerLaw
                    ? std::pow(raw, spec.score_exponent)
                    : raw;
            scores.set(u, i, value);
        }
    }

    const int N = spec.arrival_count > 0 ? spec.arrival_count : horizon.T;
    ArrivalStream arrivals(static_cast<std::size_t>(N));
    for (int t = 0; t < N; ++t)
        arrivals[static_cast<std::size_t>(t)] =
            static_cast<int>(rng() % static_cast<std::uint64_t>(
                                         spec.user_count));

    ProviderWeights weights = default_weights(catalog, horizon);
    return build_instance(std::move(catalog), std::move(scores), horizon,
                          std::move(weights), std::move(arrivals));
}

}  // namespace pmmf

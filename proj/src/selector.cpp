#include "ganlab/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ganlab/common.hpp"
#include "ganlab/io.hpp"

namespace ganlab {

namespace {

int index_of(const std::vector<std::string>& labels, const std::string& label) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

int index_of_or_insert(std::vector<std::string>& labels, const std::string& label) {
    const int found = index_of(labels, label);
    if (found >= 0) {
        return found;
    }
    labels.push_back(label);
    return static_cast<int>(labels.size()) - 1;
}

// Shared CSV -> grid loader; keeps first-appearance label order.
struct RawGrid {
    std::vector<std::string> targets;
    std::vector<std::string> sources;
    Matrix values;
    std::vector<std::uint8_t> masked;
};

RawGrid load_grid(const std::string& path) {
    const CsvTable csv = read_csv(path);
    if (csv.header != std::vector<std::string>{"target", "source", "value"}) {
        throw DataError(path + ": expected header target,source,value");
    }
    struct Entry {
        int target;
        int source;
        double value;
        bool masked;
    };
    RawGrid grid;
    std::vector<Entry> entries;
    for (const auto& row : csv.rows) {
        Entry e{};
        e.target = index_of_or_insert(grid.targets, row[0]);
        e.source = index_of_or_insert(grid.sources, row[1]);
        e.masked = row[2].empty() || row[2] == "-";
        if (!e.masked) {
            try {
                e.value = std::stod(row[2]);
            } catch (const std::exception&) {
                throw DataError(path + ": bad value \"" + row[2] + "\" for " + row[0] + "/" +
                                row[1]);
            }
            if (!std::isfinite(e.value)) {
                throw DataError(path + ": non-finite value for " + row[0] + "/" + row[1]);
            }
        }
        entries.push_back(e);
    }
    const std::size_t t = grid.targets.size();
    const std::size_t s = grid.sources.size();
    grid.values = Matrix(static_cast<int>(t), static_cast<int>(s));
    grid.masked.assign(t * s, 1);
    std::vector<std::uint8_t> seen(t * s, 0);
    for (const Entry& e : entries) {
        const std::size_t at = static_cast<std::size_t>(e.target) * s + e.source;
        if (seen[at]) {
            throw DataError(path + ": duplicate entry for " + grid.targets[e.target] + "/" +
                            grid.sources[e.source]);
        }
        seen[at] = 1;
        if (!e.masked) {
            grid.values(e.target, e.source) = e.value;
            grid.masked[at] = 0;
        }
    }
    // A dataset never counts as its own transfer source.
    for (std::size_t ti = 0; ti < t; ++ti) {
        for (std::size_t si = 0; si < s; ++si) {
            if (grid.targets[ti] == grid.sources[si]) {
                grid.masked[ti * s + si] = 1;
            }
        }
    }
    return grid;
}

}  // namespace

SelectorMetric selector_metric_from_name(const std::string& name) {
    if (name == "fid") {
        return SelectorMetric::fid;
    }
    if (name == "kid") {
        return SelectorMetric::kid;
    }
    if (name == "precision") {
        return SelectorMetric::precision;
    }
    if (name == "recall") {
        return SelectorMetric::recall;
    }
    throw ConfigError("unknown selector metric \"" + name +
                      "\" (expected fid|kid|precision|recall)");
}

const char* selector_metric_name(SelectorMetric metric) {
    switch (metric) {
        case SelectorMetric::fid:
            return "fid";
        case SelectorMetric::kid:
            return "kid";
        case SelectorMetric::precision:
            return "precision";
        case SelectorMetric::recall:
            return "recall";
    }
    return "?";
}

bool lower_is_better(SelectorMetric metric) {
    return metric == SelectorMetric::fid || metric == SelectorMetric::kid;
}

int DistanceTable::target_index(const std::string& label) const {
    return index_of(targets, label);
}

int DistanceTable::source_index(const std::string& label) const {
    return index_of(sources, label);
}

DistanceTable load_distance_table(const std::string& path, SelectorMetric metric) {
    RawGrid grid = load_grid(path);
    DistanceTable table;
    table.metric = metric;
    table.targets = std::move(grid.targets);
    table.sources = std::move(grid.sources);
    table.values = std::move(grid.values);
    table.masked = std::move(grid.masked);
    return table;
}

SourceChoice choose_source(const DistanceTable& table, const std::string& target) {
    const int t = table.target_index(target);
    if (t < 0) {
        throw DataError("choose_source: unknown target \"" + target + "\"");
    }
    const bool ascending = lower_is_better(table.metric);
    int best = -1;
    for (int s = 0; s < static_cast<int>(table.sources.size()); ++s) {
        if (table.is_masked(t, s)) {
            continue;
        }
        if (best < 0) {
            best = s;
            continue;
        }
        const double candidate = table.values(t, s);
        const double current = table.values(t, best);
        if (ascending ? candidate < current : candidate > current) {
            best = s;
        }
    }
    if (best < 0) {
        throw DataError("choose_source: no unmasked sources for target \"" + target + "\"");
    }
    SourceChoice choice;
    choice.source = table.sources[static_cast<std::size_t>(best)];
    choice.value = table.values(t, best);
    for (int s = 0; s < static_cast<int>(table.sources.size()); ++s) {
        if (s != best && !table.is_masked(t, s) && table.values(t, s) == choice.value) {
            choice.tie = true;
            break;
        }
    }
    return choice;
}

bool GroundTruthGrid::is_optimal(const std::string& target, const std::string& source) const {
    const int t = index_of(targets, target);
    if (t < 0) {
        return false;
    }
    const auto& set = optimal[static_cast<std::size_t>(t)];
    return std::find(set.begin(), set.end(), source) != set.end();
}

GroundTruthGrid load_ground_truth(const std::string& path) {
    RawGrid grid = load_grid(path);
    GroundTruthGrid truth;
    truth.targets = std::move(grid.targets);
    truth.sources = std::move(grid.sources);
    truth.values = std::move(grid.values);
    truth.masked = std::move(grid.masked);
    const std::size_t s = truth.sources.size();
    for (std::size_t ti = 0; ti < truth.targets.size(); ++ti) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t si = 0; si < s; ++si) {
            if (truth.masked[ti * s + si] || truth.sources[si] == kScratchLabel) {
                continue;
            }
            best = std::min(best, truth.values(static_cast<int>(ti), static_cast<int>(si)));
        }
        std::vector<std::string> set;
        if (std::isfinite(best)) {
            for (std::size_t si = 0; si < s; ++si) {
                if (truth.masked[ti * s + si] || truth.sources[si] == kScratchLabel) {
                    continue;
                }
                if (truth.values(static_cast<int>(ti), static_cast<int>(si)) <=
                    (1.0 + kOptimalSlack) * best) {
                    set.push_back(truth.sources[si]);
                }
            }
        }
        truth.optimal.push_back(std::move(set));
    }
    return truth;
}

RankingReport evaluate_selector(const DistanceTable& table, const GroundTruthGrid& truth) {
    for (const std::string& target : truth.targets) {
        if (table.target_index(target) < 0) {
            throw DataError("evaluate_selector: target \"" + target + "\" missing from table");
        }
    }
    for (const std::string& source : table.sources) {
        if (index_of(truth.sources, source) < 0) {
            throw DataError("evaluate_selector: source \"" + source + "\" missing from truth");
        }
    }
    RankingReport report;
    report.metric = table.metric;
    for (const std::string& target : truth.targets) {
        const SourceChoice choice = choose_source(table, target);
        RankingEntry entry;
        entry.target = target;
        entry.chosen = choice.source;
        entry.value = choice.value;
        entry.tie = choice.tie;
        entry.optimal = truth.is_optimal(target, choice.source);
        if (!entry.optimal) {
            ++report.failures;
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

DistanceTable build_distance_table(const SampleSet& target_features,
                                   const std::vector<SampleSet>& source_feature_sets,
                                   SelectorMetric metric, int k) {
    if (source_feature_sets.empty()) {
        throw DataError("build_distance_table: no sources");
    }
    DistanceTable table;
    table.metric = metric;
    table.targets.push_back(target_features.label);
    table.values = Matrix(1, static_cast<int>(source_feature_sets.size()));
    table.masked.assign(source_feature_sets.size(), 0);
    const GaussianStats target_stats =
        metric == SelectorMetric::fid ? fit_gaussian(target_features) : GaussianStats{};
    for (std::size_t s = 0; s < source_feature_sets.size(); ++s) {
        const SampleSet& source = source_feature_sets[s];
        if (source.dim() != target_features.dim()) {
            throw DimensionError("build_distance_table: feature dimension mismatch for \"" +
                                 source.label + "\"");
        }
        table.sources.push_back(source.label);
        double value = 0.0;
        switch (metric) {
            case SelectorMetric::fid:
                value = frechet_distance(target_stats, fit_gaussian(source));
                break;
            case SelectorMetric::kid:
                value = kid(target_features, source);
                break;
            case SelectorMetric::precision:
                value = knn_precision_recall(target_features, source, k).precision;
                break;
            case SelectorMetric::recall:
                value = knn_precision_recall(target_features, source, k).recall;
                break;
        }
        table.values(0, static_cast<int>(s)) = value;
        if (source.label == target_features.label) {
            table.masked[s] = 1;
        }
    }
    return table;
}

}  // namespace ganlab

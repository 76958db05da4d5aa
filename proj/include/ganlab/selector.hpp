#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ganlab/matrix.hpp"
#include "ganlab/metrics.hpp"

namespace ganlab {

enum class SelectorMetric : std::uint8_t { fid = 0, kid = 1, precision = 2, recall = 3 };

SelectorMetric selector_metric_from_name(const std::string& name);
const char* selector_metric_name(SelectorMetric metric);
// fid/kid rank ascending (smaller is closer); precision/recall descending.
bool lower_is_better(SelectorMetric metric);

// targets x sources grid of proxy-metric values. Self-pairs (and any pair
// absent from the input) are masked out of selection.
struct DistanceTable {
    SelectorMetric metric = SelectorMetric::fid;
    std::vector<std::string> targets;
    std::vector<std::string> sources;  // tie-break order
    Matrix values;
    std::vector<std::uint8_t> masked;  // row-major, parallel to values

    bool is_masked(int t, int s) const {
        return masked[static_cast<std::size_t>(t) * sources.size() + s] != 0;
    }
    int target_index(const std::string& label) const;  // -1 if absent
    int source_index(const std::string& label) const;
};

// CSV schema: header `target,source,value`, one row per pair, "-" (or empty)
// value meaning masked. Source tie-break order is first-appearance order.
DistanceTable load_distance_table(const std::string& path, SelectorMetric metric);

struct SourceChoice {
    std::string source;
    double value = 0.0;
    bool tie = false;  // another unmasked source holds exactly the same value
};

SourceChoice choose_source(const DistanceTable& table, const std::string& target);

// Finetune-result grid; per target, the optimal sources are those within 5%
// of the row minimum, with the self-pair and the from-scratch column left out.
struct GroundTruthGrid {
    std::vector<std::string> targets;
    std::vector<std::string> sources;
    Matrix values;
    std::vector<std::uint8_t> masked;
    std::vector<std::vector<std::string>> optimal;  // per target

    bool is_optimal(const std::string& target, const std::string& source) const;
};

inline constexpr double kOptimalSlack = 0.05;
inline constexpr const char* kScratchLabel = "scratch";

// Same CSV schema as distance tables; rows with source == "scratch" are
// stored but excluded from optimal sets.
GroundTruthGrid load_ground_truth(const std::string& path);

struct RankingEntry {
    std::string target;
    std::string chosen;
    double value = 0.0;
    bool tie = false;
    bool optimal = false;
};

struct RankingReport {
    SelectorMetric metric = SelectorMetric::fid;
    std::vector<RankingEntry> entries;
    int failures = 0;
};

RankingReport evaluate_selector(const DistanceTable& table, const GroundTruthGrid& truth);

// One-target table computed from features: target vs each candidate source.
// For precision/recall the target plays the "real" role and the source the
// "generated" role, so recall measures how well the source covers the target.
DistanceTable build_distance_table(const SampleSet& target_features,
                                   const std::vector<SampleSet>& source_feature_sets,
                                   SelectorMetric metric, int k = 5);

}  // namespace ganlab

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ganlab/gan.hpp"
#include "ganlab/io.hpp"
#include "ganlab/metrics.hpp"

namespace ganlab {

// Shared result shape for the scripted experiments: named per-run series,
// ordered summary scalars (each one computed from a series), and the paths
// written under the output directory.
struct ExperimentReport {
    std::map<std::string, MetricSeries> series;
    std::vector<std::pair<std::string, double>> summary;
    std::vector<std::string> files;
};

double summary_value(const ExperimentReport& report, const std::string& key);

double median(std::vector<double> values);

// Training-loop slice of a RunConfig, seeded from config.seed.
TrainConfig train_config_from(const RunConfig& config);

// Trains both sources, then the target from Source-I init, Source-II init
// and from scratch, for every seed in config.seeds; tracks exact W1 and mode
// coverage per snapshot and emits records.csv, summary.json and SVG plots.
ExperimentReport run_fig2(const RunConfig& config, const std::string& dir, bool force);

struct SweepRecord {
    int index = 0;          // 1-based checkpoint index
    std::int64_t step = 0;  // source-training step the checkpoint was taken at
    double recall_at_init = 0.0;
    double grad_similarity_at_init = 0.0;
    double w1_after_finetune = 0.0;
    std::uint64_t seed = 0;
};

struct SweepSeedResult {
    std::uint64_t seed = 0;
    std::vector<SweepRecord> records;
    double pearson_recall_w1 = 0.0;
    double pearson_grad_w1 = 0.0;
};

struct SweepResult {
    std::vector<SweepSeedResult> per_seed;
    double median_pearson_recall_w1 = 0.0;
    double median_pearson_grad_w1 = 0.0;
    std::vector<std::string> files;
};

// One Source-I training of generator_steps (extended if sweep_checkpoints *
// snapshot_every asks for more); sweep_checkpoints snapshots are then taken
// densely early and at a widened stride out to the final step. Per
// checkpoint: recall and gradient-field similarity of the checkpoint itself,
// then exact W1 after a finetune_steps finetune on the target.
SweepSeedResult sweep_one_seed(const RunConfig& config, std::uint64_t seed);

SweepResult run_fig3_sweep(const RunConfig& config, const std::string& dir, bool force);

// Per init (scratch / Source-I / Source-II): pushes a fixed latent batch
// through every snapshot generator and reports consecutive-displacement,
// trajectory-length, class-change and mode-coverage curves.
ExperimentReport run_dynamics(const RunConfig& config, const std::string& dir, bool force);

}  // namespace ganlab

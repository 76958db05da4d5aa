#include "ganlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <utility>

#include <json.hpp>

#include "ganlab/common.hpp"
#include "ganlab/svg.hpp"

namespace ganlab {

namespace {

using ordered_json = nlohmann::ordered_json;

// Seed-stream ids; training steps use the raw step number, so these stay in
// a disjoint range well below the 2^32 offset used for weight init.
constexpr std::uint64_t kStreamSource1 = 101;
constexpr std::uint64_t kStreamSource2 = 102;
constexpr std::uint64_t kStreamTargetFromSource1 = 103;
constexpr std::uint64_t kStreamTargetFromSource2 = 104;
constexpr std::uint64_t kStreamTargetScratch = 105;
constexpr std::uint64_t kStreamTargetReference = 106;
constexpr std::uint64_t kStreamDynamicsLatents = 107;
constexpr std::uint64_t kStreamSnapshotEval = 1000;
constexpr std::uint64_t kStreamFinetune = 100000;
constexpr std::uint64_t kStreamFinetuneEval = 200000;
constexpr std::uint64_t kStreamCoverageEval = 300000;

constexpr int kDynamicsLatents = 256;
constexpr int kCoverageSamples = 10000;

TrainConfig train_config(const RunConfig& config, std::uint64_t seed) {
    TrainConfig cfg = train_config_from(config);
    cfg.seed = seed;
    return cfg;
}

void require_fresh_outputs(const std::string& dir, const std::vector<std::string>& names,
                           bool force) {
    if (force) {
        return;
    }
    for (const std::string& name : names) {
        const std::string path = dir + "/" + name;
        if (std::filesystem::exists(path)) {
            throw DataError("refusing to overwrite " + path + " (use --force)");
        }
    }
}

void emit(ExperimentReport& report, const std::string& dir, const std::string& name,
          const std::string& content, bool force) {
    const std::string path = dir + "/" + name;
    write_text_atomic(path, content, force);
    report.files.push_back(path);
}

std::string json_summary(const RunConfig& config, const char* command,
                         const ExperimentReport& report) {
    ordered_json j;
    j["command"] = command;
    j["seeds"] = config.seed_list();
    j["generator_steps"] = config.generator_steps;
    j["snapshot_every"] = config.snapshot_every;
    j["finetune_steps"] = config.finetune_steps;
    j["metric_samples"] = config.metric_samples;
    for (const auto& [key, value] : report.summary) {
        j[key] = value;
    }
    return j.dump(2) + "\n";
}

struct Fig2Run {
    std::string name;
    std::uint64_t seed = 0;
    MetricSeries w1;
    MetricSeries modes;
    double final_w1 = 0.0;
    int final_modes = 0;  // at 10000 samples, threshold 10
};

}  // namespace

double summary_value(const ExperimentReport& report, const std::string& key) {
    for (const auto& [name, value] : report.summary) {
        if (name == key) {
            return value;
        }
    }
    throw Error("summary key not found: " + key);
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw DataError("median of empty list");
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) {
        return values[n / 2];
    }
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

TrainConfig train_config_from(const RunConfig& config) {
    TrainConfig cfg;
    cfg.generator_steps = config.generator_steps;
    cfg.disc_steps_per_gen = config.disc_steps_per_gen;
    cfg.batch_size = config.batch_size;
    cfg.latent_dim = config.latent_dim;
    cfg.lr = config.lr;
    cfg.beta1 = config.beta1;
    cfg.beta2 = config.beta2;
    cfg.snapshot_every = config.snapshot_every;
    cfg.saturating_gen_loss = config.saturating_gen_loss;
    cfg.seed = config.seed;
    return cfg;
}

ExperimentReport run_fig2(const RunConfig& config, const std::string& dir, bool force) {
    const std::vector<std::uint64_t> seeds = config.seed_list();
    const std::vector<std::string> outputs = {"records.csv",          "summary.json",
                                              "fig2_w1.svg",          "fig2_samples_source1.svg",
                                              "fig2_samples_source2.svg",
                                              "fig2_samples_scratch.svg"};
    require_fresh_outputs(dir, outputs, force);

    const GaussianMixtureSpec target = target_spec();
    const DataSpec target_data = target;
    const DataSpec source1_data = source1_spec();
    const DataSpec source2_data = source2_spec();
    const int n = config.metric_samples;

    ExperimentReport report;
    std::vector<Fig2Run> runs;
    std::string records = "seed,init,index,step,w1,modes\n";
    std::map<std::string, Matrix> sample_plots;  // final samples of the first seed

    for (const std::uint64_t seed : seeds) {
        const GanCheckpoint src1 =
            gan_train(source1_data, train_config(config, Rng::derive(seed, kStreamSource1)))
                .final;
        const GanCheckpoint src2 =
            gan_train(source2_data, train_config(config, Rng::derive(seed, kStreamSource2)))
                .final;
        const SampleSet target_ref =
            sample(target, n, Rng::derive(seed, kStreamTargetReference), "target");

        struct RunPlan {
            const char* name;
            std::uint64_t stream;
            const GanCheckpoint* init;
        };
        const RunPlan plans[] = {{"source1", kStreamTargetFromSource1, &src1},
                                 {"source2", kStreamTargetFromSource2, &src2},
                                 {"scratch", kStreamTargetScratch, nullptr}};
        for (const RunPlan& plan : plans) {
            const std::uint64_t run_seed = Rng::derive(seed, plan.stream);
            const TrainResult tr =
                gan_train(target_data, train_config(config, run_seed), plan.init);

            Fig2Run run;
            run.name = plan.name;
            run.seed = seed;
            // Transfer runs inherit the source's step counter; report steps
            // relative to the initialization so all curves share one x-axis.
            const std::int64_t base = plan.init ? plan.init->step : 0;
            int index = 0;
            for (const GanCheckpoint& snap : tr.snapshots) {
                ++index;
                const SampleSet gen = generate(
                    snap.generator, n, config.latent_dim,
                    Rng::derive(run_seed, kStreamSnapshotEval + static_cast<std::uint64_t>(index)));
                const double w1 = w1_exact(gen, target_ref);
                const int modes = mode_coverage(gen, target.centers);
                run.w1.entries.emplace_back(snap.step - base, w1);
                run.modes.entries.emplace_back(snap.step - base, static_cast<double>(modes));
                records += std::to_string(seed) + "," + plan.name + "," + std::to_string(index) +
                           "," + std::to_string(snap.step - base) + "," + format_real(w1) + "," +
                           std::to_string(modes) + "\n";
            }

            const SampleSet final_gen =
                generate(tr.final.generator, n, config.latent_dim,
                         Rng::derive(run_seed, kStreamFinetuneEval));
            run.final_w1 = w1_exact(final_gen, target_ref);
            const SampleSet coverage_gen =
                generate(tr.final.generator, kCoverageSamples, config.latent_dim,
                         Rng::derive(run_seed, kStreamCoverageEval));
            run.final_modes = mode_coverage(coverage_gen, target.centers);
            if (seed == seeds.front()) {
                sample_plots[plan.name] = final_gen.points;
                if (sample_plots.find("target") == sample_plots.end()) {
                    sample_plots["target"] = target_ref.points;
                }
            }
            report.series["seed" + std::to_string(seed) + "/" + plan.name + "/w1"] = run.w1;
            report.series["seed" + std::to_string(seed) + "/" + plan.name + "/modes"] =
                run.modes;
            runs.push_back(std::move(run));
        }
    }

    for (const char* name : {"source1", "source2", "scratch"}) {
        std::vector<double> w1s;
        std::vector<double> modes;
        for (const Fig2Run& run : runs) {
            if (run.name == name) {
                w1s.push_back(run.final_w1);
                modes.push_back(static_cast<double>(run.final_modes));
            }
        }
        report.summary.emplace_back(std::string("median_final_w1_") + name, median(w1s));
        report.summary.emplace_back(std::string("median_final_modes_") + name, median(modes));
    }
    for (const Fig2Run& run : runs) {
        report.summary.emplace_back(
            "final_w1_" + run.name + "_seed" + std::to_string(run.seed), run.final_w1);
        report.summary.emplace_back(
            "final_modes_" + run.name + "_seed" + std::to_string(run.seed),
            static_cast<double>(run.final_modes));
    }

    SvgPlot w1_plot("target-training W1 by initialization", "generator step", "exact W1");
    const std::map<std::string, std::string> colors = {
        {"source1", "#1f77b4"}, {"source2", "#d62728"}, {"scratch", "#2ca02c"}};
    std::map<std::string, bool> labeled;
    for (const Fig2Run& run : runs) {
        std::vector<std::pair<double, double>> line;
        for (const auto& [step, value] : run.w1.entries) {
            line.emplace_back(static_cast<double>(step), value);
        }
        const bool first = !labeled[run.name];
        labeled[run.name] = true;
        w1_plot.add_polyline(line, colors.at(run.name), 1.5, first ? run.name : "");
    }
    ExperimentReport& r = report;
    emit(r, dir, "records.csv", records, force);
    emit(r, dir, "fig2_w1.svg", w1_plot.render(), force);
    for (const char* name : {"source1", "source2", "scratch"}) {
        SvgPlot scatter(std::string("final samples, init=") + name, "x", "y");
        scatter.add_scatter(sample_plots.at("target"), "#bbbbbb", 2.0, "target");
        scatter.add_scatter(sample_plots.at(name), colors.at(name), 2.0, name);
        emit(r, dir, std::string("fig2_samples_") + name + ".svg", scatter.render(), force);
    }
    emit(r, dir, "summary.json", json_summary(config, "fig2", report), force);
    return report;
}

SweepSeedResult sweep_one_seed(const RunConfig& config, std::uint64_t seed) {
    if (config.sweep_checkpoints < 3) {
        throw ConfigError("sweep: need at least 3 checkpoints");
    }
    const GaussianMixtureSpec target = target_spec();
    const DataSpec target_data = target;
    const DataSpec source_data = source1_spec();
    const int n = config.metric_samples;

    RunConfig source_run = config;
    source_run.generator_steps =
        std::max(config.generator_steps, config.sweep_checkpoints * config.snapshot_every);
    const TrainResult source =
        gan_train(source_data, train_config(source_run, Rng::derive(seed, kStreamSource1)));
    const SampleSet target_ref =
        sample(target, n, Rng::derive(seed, kStreamTargetReference), "target");

    // When the run yields more snapshots than requested, keep the first
    // two-thirds of the budget dense (every snapshot) and spread the rest
    // evenly up to the final snapshot. Training moves fastest early, so that
    // is where dense sampling pays off, but the schedule still has to reach
    // the fully trained source or the sweep would miss the strongest
    // initializations entirely.
    const int total = static_cast<int>(source.snapshots.size());
    std::vector<int> picked;
    if (total <= config.sweep_checkpoints) {
        for (int i = 0; i < total; ++i) picked.push_back(i);
    } else {
        const int dense = 2 * config.sweep_checkpoints / 3;
        const int sparse = config.sweep_checkpoints - dense;
        for (int i = 0; i < dense; ++i) picked.push_back(i);
        for (int j = 1; j <= sparse; ++j) {
            const double stretch = static_cast<double>(j) * (total - dense) / sparse;
            picked.push_back(dense - 1 + static_cast<int>(std::llround(stretch)));
        }
    }

    SweepSeedResult result;
    result.seed = seed;
    int index = 0;
    for (const int pick : picked) {
        const GanCheckpoint& snap = source.snapshots[static_cast<std::size_t>(pick)];
        ++index;
        const std::uint64_t idx = static_cast<std::uint64_t>(index);
        SweepRecord record;
        record.index = index;
        record.step = snap.step;
        record.seed = seed;

        const SampleSet gen = generate(snap.generator, n, config.latent_dim,
                                       Rng::derive(seed, kStreamSnapshotEval + idx));
        record.recall_at_init = knn_precision_recall(target_ref, gen, config.knn_k).recall;
        record.grad_similarity_at_init =
            grad_field_similarity(snap.discriminator, gen, target.centers);

        RunConfig ft_run = config;
        const GanCheckpoint tuned =
            finetune(target_data, snap, config.finetune_steps,
                     train_config(ft_run, Rng::derive(seed, kStreamFinetune + idx)));
        const SampleSet tuned_gen = generate(tuned.generator, n, config.latent_dim,
                                             Rng::derive(seed, kStreamFinetuneEval + idx));
        record.w1_after_finetune = w1_exact(tuned_gen, target_ref);
        result.records.push_back(record);
    }

    std::vector<double> recalls;
    std::vector<double> grads;
    std::vector<double> w1s;
    for (const SweepRecord& record : result.records) {
        recalls.push_back(record.recall_at_init);
        grads.push_back(record.grad_similarity_at_init);
        w1s.push_back(record.w1_after_finetune);
    }
    try {
        result.pearson_recall_w1 = pearson(recalls, w1s);
        result.pearson_grad_w1 = pearson(grads, w1s);
    } catch (const DataError&) {
        throw Error("degenerate sweep: records have zero variance");
    }
    return result;
}

SweepResult run_fig3_sweep(const RunConfig& config, const std::string& dir, bool force) {
    const std::vector<std::uint64_t> seeds = config.seed_list();
    const std::vector<std::string> outputs = {"records.csv", "summary.json",
                                              "sweep_recall_vs_w1.svg",
                                              "sweep_grad_vs_w1.svg"};
    require_fresh_outputs(dir, outputs, force);

    SweepResult result;
    for (const std::uint64_t seed : seeds) {
        result.per_seed.push_back(sweep_one_seed(config, seed));
    }
    std::vector<double> recall_corrs;
    std::vector<double> grad_corrs;
    for (const SweepSeedResult& per_seed : result.per_seed) {
        recall_corrs.push_back(per_seed.pearson_recall_w1);
        grad_corrs.push_back(per_seed.pearson_grad_w1);
    }
    result.median_pearson_recall_w1 = median(recall_corrs);
    result.median_pearson_grad_w1 = median(grad_corrs);

    std::string records = "seed,index,step,recall,grad_similarity,w1_after_finetune\n";
    Matrix recall_points(static_cast<int>(seeds.size()) * config.sweep_checkpoints, 2);
    Matrix grad_points(recall_points.rows(), 2);
    int at = 0;
    for (const SweepSeedResult& per_seed : result.per_seed) {
        for (const SweepRecord& record : per_seed.records) {
            records += std::to_string(record.seed) + "," + std::to_string(record.index) + "," +
                       std::to_string(record.step) + "," + format_real(record.recall_at_init) +
                       "," + format_real(record.grad_similarity_at_init) + "," +
                       format_real(record.w1_after_finetune) + "\n";
            recall_points(at, 0) = record.recall_at_init;
            recall_points(at, 1) = record.w1_after_finetune;
            grad_points(at, 0) = record.grad_similarity_at_init;
            grad_points(at, 1) = record.w1_after_finetune;
            ++at;
        }
    }

    ordered_json j;
    j["command"] = "sweep";
    j["seeds"] = seeds;
    j["checkpoints"] = config.sweep_checkpoints;
    j["snapshot_every"] = config.snapshot_every;
    j["finetune_steps"] = config.finetune_steps;
    j["metric_samples"] = config.metric_samples;
    for (const SweepSeedResult& per_seed : result.per_seed) {
        j["pearson_recall_w1_seed" + std::to_string(per_seed.seed)] = per_seed.pearson_recall_w1;
        j["pearson_grad_w1_seed" + std::to_string(per_seed.seed)] = per_seed.pearson_grad_w1;
    }
    j["median_pearson_recall_w1"] = result.median_pearson_recall_w1;
    j["median_pearson_grad_w1"] = result.median_pearson_grad_w1;

    SvgPlot recall_plot("checkpoint recall vs post-finetune W1", "recall at checkpoint",
                        "exact W1 after finetune");
    recall_plot.add_scatter(recall_points, "#1f77b4", 3.0);
    SvgPlot grad_plot("gradient-field similarity vs post-finetune W1",
                      "cosine similarity at checkpoint", "exact W1 after finetune");
    grad_plot.add_scatter(grad_points, "#d62728", 3.0);

    const std::string records_path = dir + "/records.csv";
    write_text_atomic(records_path, records, force);
    result.files.push_back(records_path);
    const std::string summary_path = dir + "/summary.json";
    write_text_atomic(summary_path, j.dump(2) + "\n", force);
    result.files.push_back(summary_path);
    const std::string recall_path = dir + "/sweep_recall_vs_w1.svg";
    write_text_atomic(recall_path, recall_plot.render(), force);
    result.files.push_back(recall_path);
    const std::string grad_path = dir + "/sweep_grad_vs_w1.svg";
    write_text_atomic(grad_path, grad_plot.render(), force);
    result.files.push_back(grad_path);
    return result;
}

ExperimentReport run_dynamics(const RunConfig& config, const std::string& dir, bool force) {
    const std::vector<std::string> outputs = {
        "dynamics_distance.csv", "dynamics_lengths.csv",  "dynamics_changes.csv",
        "dynamics_coverage.csv", "dynamics_distance.svg", "dynamics_changes.svg",
        "dynamics_coverage.svg", "dynamics_lengths.svg",  "summary.json"};
    require_fresh_outputs(dir, outputs, force);

    const std::uint64_t seed = config.seed;
    const GaussianMixtureSpec target = target_spec();
    const DataSpec target_data = target;
    const PointAssigner assigner = nearest_center_assigner(target.centers);

    Rng latent_rng(Rng::derive(seed, kStreamDynamicsLatents));
    Matrix latents(kDynamicsLatents, config.latent_dim);
    for (double& v : latents.data()) {
        v = latent_rng.normal();
    }

    const GanCheckpoint src1 =
        gan_train(source1_spec(), train_config(config, Rng::derive(seed, kStreamSource1))).final;
    const GanCheckpoint src2 =
        gan_train(source2_spec(), train_config(config, Rng::derive(seed, kStreamSource2))).final;

    ExperimentReport report;
    std::string distance_csv = "init,transition,step,mean_distance\n";
    std::string lengths_csv = "init,latent,length\n";
    std::string changes_csv = "init,transition,step,probability\n";
    std::string coverage_csv = "init,index,step,modes\n";

    SvgPlot distance_plot("mean latent displacement between snapshots", "generator step",
                          "mean distance");
    SvgPlot changes_plot("class-change probability between snapshots", "generator step",
                         "probability");
    SvgPlot coverage_plot("covered modes over training", "generator step", "modes");
    SvgPlot lengths_plot("sorted trajectory lengths", "latent rank", "length");
    const std::map<std::string, std::string> colors = {
        {"source1", "#1f77b4"}, {"source2", "#d62728"}, {"scratch", "#2ca02c"}};

    struct RunPlan {
        const char* name;
        std::uint64_t stream;
        const GanCheckpoint* init;
    };
    const RunPlan plans[] = {{"scratch", kStreamTargetScratch, nullptr},
                             {"source1", kStreamTargetFromSource1, &src1},
                             {"source2", kStreamTargetFromSource2, &src2}};

    for (const RunPlan& plan : plans) {
        const std::uint64_t run_seed = Rng::derive(seed, plan.stream);
        TrainConfig cfg = train_config(config, run_seed);
        GanCheckpoint init = plan.init != nullptr ? *plan.init : fresh_checkpoint(cfg, 2);
        const TrainResult tr = gan_train(target_data, cfg, &init);

        std::vector<const GanCheckpoint*> snaps;
        snaps.push_back(&init);
        for (const GanCheckpoint& snap : tr.snapshots) {
            snaps.push_back(&snap);
        }

        std::vector<SampleSet> outputs_by_snap;
        std::vector<std::int64_t> steps;  // relative to the run's starting checkpoint
        for (const GanCheckpoint* snap : snaps) {
            outputs_by_snap.push_back(
                SampleSet{forward_eval(snap->generator, latents), plan.name});
            steps.push_back(snap->step - init.step);
        }

        MetricSeries distances;
        std::vector<std::pair<double, double>> distance_line;
        for (std::size_t t = 0; t + 1 < outputs_by_snap.size(); ++t) {
            double total = 0.0;
            for (int i = 0; i < kDynamicsLatents; ++i) {
                total += euclidean_row_distance(outputs_by_snap[t].points.row(i),
                                                outputs_by_snap[t + 1].points.row(i));
            }
            const double mean_dist = total / kDynamicsLatents;
            distances.entries.emplace_back(steps[t + 1], mean_dist);
            distance_csv += std::string(plan.name) + "," + std::to_string(t) + "," +
                            std::to_string(steps[t + 1]) + "," + format_real(mean_dist) + "\n";
            distance_line.emplace_back(static_cast<double>(steps[t + 1]), mean_dist);
        }
        distance_plot.add_polyline(distance_line, colors.at(plan.name), 1.5, plan.name);
        report.series[std::string(plan.name) + "/mean_distance"] = distances;

        std::vector<double> lengths = trajectory_lengths(outputs_by_snap);
        for (int i = 0; i < kDynamicsLatents; ++i) {
            lengths_csv += std::string(plan.name) + "," + std::to_string(i) + "," +
                           format_real(lengths[static_cast<std::size_t>(i)]) + "\n";
        }
        std::vector<double> sorted_lengths = lengths;
        std::sort(sorted_lengths.begin(), sorted_lengths.end());
        std::vector<std::pair<double, double>> lengths_line;
        for (std::size_t i = 0; i < sorted_lengths.size(); ++i) {
            lengths_line.emplace_back(static_cast<double>(i), sorted_lengths[i]);
        }
        lengths_plot.add_polyline(lengths_line, colors.at(plan.name), 1.5, plan.name);
        report.summary.emplace_back(std::string("median_traj_length_") + plan.name,
                                    median(lengths));

        const std::vector<double> changes = class_change_probability(outputs_by_snap, assigner);
        MetricSeries change_series;
        std::vector<std::pair<double, double>> changes_line;
        double change_sum = 0.0;
        for (std::size_t t = 0; t < changes.size(); ++t) {
            change_series.entries.emplace_back(steps[t + 1], changes[t]);
            changes_csv += std::string(plan.name) + "," + std::to_string(t) + "," +
                           std::to_string(steps[t + 1]) + "," + format_real(changes[t]) + "\n";
            changes_line.emplace_back(static_cast<double>(steps[t + 1]), changes[t]);
            change_sum += changes[t];
        }
        changes_plot.add_polyline(changes_line, colors.at(plan.name), 1.5, plan.name);
        report.series[std::string(plan.name) + "/class_change"] = change_series;
        report.summary.emplace_back(std::string("mean_class_change_") + plan.name,
                                    changes.empty() ? 0.0 : change_sum / changes.size());

        MetricSeries coverage;
        std::vector<std::pair<double, double>> coverage_line;
        int index = 0;
        for (const GanCheckpoint* snap : snaps) {
            const SampleSet gen =
                generate(snap->generator, kCoverageSamples, config.latent_dim,
                         Rng::derive(run_seed, kStreamCoverageEval +
                                                   static_cast<std::uint64_t>(index)));
            const int modes = mode_coverage(gen, target.centers);
            const std::int64_t step = steps[static_cast<std::size_t>(index)];
            coverage.entries.emplace_back(step, static_cast<double>(modes));
            coverage_csv += std::string(plan.name) + "," + std::to_string(index) + "," +
                            std::to_string(step) + "," + std::to_string(modes) + "\n";
            coverage_line.emplace_back(static_cast<double>(step), static_cast<double>(modes));
            ++index;
        }
        coverage_plot.add_polyline(coverage_line, colors.at(plan.name), 1.5, plan.name);
        report.series[std::string(plan.name) + "/mode_coverage"] = coverage;
        report.summary.emplace_back(std::string("final_modes_") + plan.name,
                                    coverage.entries.back().second);
    }

    emit(report, dir, "dynamics_distance.csv", distance_csv, force);
    emit(report, dir, "dynamics_lengths.csv", lengths_csv, force);
    emit(report, dir, "dynamics_changes.csv", changes_csv, force);
    emit(report, dir, "dynamics_coverage.csv", coverage_csv, force);
    emit(report, dir, "dynamics_distance.svg", distance_plot.render(), force);
    emit(report, dir, "dynamics_changes.svg", changes_plot.render(), force);
    emit(report, dir, "dynamics_coverage.svg", coverage_plot.render(), force);
    emit(report, dir, "dynamics_lengths.svg", lengths_plot.render(), force);
    emit(report, dir, "summary.json", json_summary(config, "dynamics", report), force);
    return report;
}

}  // namespace ganlab

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ganlab/common.hpp"
#include "ganlab/experiments.hpp"
#include "ganlab/gan.hpp"
#include "ganlab/io.hpp"
#include "ganlab/metrics.hpp"
#include "ganlab/parallel.hpp"
#include "ganlab/selector.hpp"

#ifndef GANLAB_FIXTURE_DIR
#define GANLAB_FIXTURE_DIR "fixtures"
#endif

namespace {

using namespace ganlab;

DataSpec data_spec_by_name(const std::string& name) {
    if (name == "target") {
        return target_spec();
    }
    if (name == "source1") {
        return source1_spec();
    }
    if (name == "source2") {
        return source2_spec();
    }
    throw ConfigError("unknown data spec \"" + name + "\" (target|source1|source2)");
}

Matrix load_points(const std::string& path) {
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".feat") == 0) {
        return read_feature_file(path);
    }
    const CsvTable csv = read_csv(path);
    const int cols = static_cast<int>(csv.header.size());
    Matrix points(static_cast<int>(csv.rows.size()), cols);
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        for (int j = 0; j < cols; ++j) {
            try {
                points(static_cast<int>(i), j) = std::stod(csv.rows[i][static_cast<std::size_t>(j)]);
            } catch (const std::exception&) {
                throw DataError(path + ": non-numeric cell \"" +
                                csv.rows[i][static_cast<std::size_t>(j)] + "\"");
            }
        }
    }
    return points;
}

SampleSet load_sample_set(const std::string& path) {
    return SampleSet{load_points(path), std::filesystem::path(path).stem().string()};
}

struct CommonFlags {
    std::string config_path;
    bool force = false;
};

// Each subcommand keeps RunConfig defaults; a --config file replaces them,
// and explicitly passed flags win over both.
RunConfig effective_config(const CommonFlags& common) {
    if (common.config_path.empty()) {
        return RunConfig{};
    }
    return RunConfig::parse_file(common.config_path);
}

int run_verify_table4(const std::string& regime, const std::string& fixtures) {
    if (regime != "real") {
        throw ConfigError(
            "only --regime real is verifiable; the generated-source regime has no published "
            "reference grids");
    }
    const GroundTruthGrid truth = load_ground_truth(fixtures + "/finetune_fid.csv");
    struct Expectation {
        SelectorMetric metric;
        const char* file;
        int expected;
    };
    const Expectation expectations[] = {{SelectorMetric::fid, "fid.csv", 3},
                                        {SelectorMetric::kid, "kid.csv", 5},
                                        {SelectorMetric::precision, "precision.csv", 11},
                                        {SelectorMetric::recall, "recall.csv", 2}};
    bool all_ok = true;
    for (const Expectation& expectation : expectations) {
        const DistanceTable table = load_distance_table(
            fixtures + "/" + expectation.file, expectation.metric);
        const RankingReport report = evaluate_selector(table, truth);
        const bool ok = std::abs(report.failures - expectation.expected) <= 1;
        std::printf("%-9s failures=%2d expected=%2d (tolerance +-1) %s\n",
                    selector_metric_name(expectation.metric), report.failures,
                    expectation.expected, ok ? "PASS" : "FAIL");
        if (report.failures != expectation.expected) {
            for (const RankingEntry& entry : report.entries) {
                if (!entry.optimal) {
                    std::printf("  target %-5s chose %-5s (%s)%s\n", entry.target.c_str(),
                                entry.chosen.c_str(), format_real(entry.value).c_str(),
                                entry.tie ? " [tie]" : "");
                }
            }
        }
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap();

    CLI::App app{"2D GAN transfer toolkit: training, metrics, source ranking, experiments"};
    app.require_subcommand(1);

    CommonFlags common;

    // train
    auto* train_cmd = app.add_subcommand("train", "pretrain a GAN on a synthetic dataset");
    std::string train_data = "source1";
    std::string train_out;
    std::uint64_t train_seed = 0;
    int train_steps = -1;
    train_cmd->add_option("--data", train_data, "target|source1|source2");
    train_cmd->add_option("--out", train_out, "checkpoint output path")->required();
    train_cmd->add_option("--seed", train_seed, "RNG seed (default 0)");
    train_cmd->add_option("--steps", train_steps, "generator steps (default 5000)");
    train_cmd->add_option("--config", common.config_path, "run-config file");
    train_cmd->add_flag("--force", common.force, "overwrite existing outputs");

    // finetune
    auto* ft_cmd = app.add_subcommand("finetune", "finetune a checkpoint on the target");
    std::string ft_init;
    std::string ft_out;
    std::string ft_data = "target";
    std::uint64_t ft_seed = 0;
    int ft_steps = -1;
    ft_cmd->add_option("--init", ft_init, "starting checkpoint")->required();
    ft_cmd->add_option("--out", ft_out, "checkpoint output path")->required();
    ft_cmd->add_option("--data", ft_data, "target|source1|source2");
    ft_cmd->add_option("--seed", ft_seed, "RNG seed (default 0)");
    ft_cmd->add_option("--steps", ft_steps, "finetune steps (default 1000)");
    ft_cmd->add_option("--config", common.config_path, "run-config file");
    ft_cmd->add_flag("--force", common.force, "overwrite existing outputs");

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "compute a metric between two files");
    std::string metrics_kind;
    std::string metrics_a;
    std::string metrics_b;
    int metrics_k = 5;
    int metrics_projections = 512;
    std::uint64_t metrics_seed = 0;
    metrics_cmd
        ->add_option("--kind", metrics_kind, "w1|sliced-w1|fid|kid|precision|recall|coverage")
        ->required();
    metrics_cmd->add_option("--a", metrics_a, "first sample/feature file")->required();
    metrics_cmd->add_option("--b", metrics_b, "second sample/feature file");
    metrics_cmd->add_option("--k", metrics_k, "neighbor count for precision/recall");
    metrics_cmd->add_option("--projections", metrics_projections, "sliced-w1 directions");
    metrics_cmd->add_option("--seed", metrics_seed, "RNG seed (default 0)");

    // generate
    auto* gen_cmd = app.add_subcommand("generate", "sample a generator or a data spec to a file");
    std::string gen_init;
    std::string gen_data;
    std::string gen_out;
    int gen_n = 1000;
    std::uint64_t gen_seed = 0;
    gen_cmd->add_option("--init", gen_init, "checkpoint to sample from");
    gen_cmd->add_option("--data", gen_data, "target|source1|source2 (instead of --init)");
    gen_cmd->add_option("--out", gen_out, ".feat or .csv output path")->required();
    gen_cmd->add_option("--n", gen_n, "sample count (default 1000)");
    gen_cmd->add_option("--seed", gen_seed, "RNG seed (default 0)");
    gen_cmd->add_flag("--force", common.force, "overwrite existing outputs");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "checkpoint sweep with finetunes");
    std::string sweep_dir;
    std::string sweep_seeds;
    int sweep_checkpoints = -1;
    int sweep_ft_steps = -1;
    bool sweep_full = false;
    sweep_cmd->add_option("--out-dir", sweep_dir, "output directory")->required();
    sweep_cmd->add_option("--seeds", sweep_seeds, "comma-separated seeds (default 0,1,2)");
    sweep_cmd->add_option("--checkpoints", sweep_checkpoints, "checkpoint count (default 30)");
    sweep_cmd->add_option("--finetune-steps", sweep_ft_steps, "finetune steps (default 1000)");
    sweep_cmd->add_flag("--full", sweep_full, "full-scale sweep (100 checkpoints)");
    sweep_cmd->add_option("--config", common.config_path, "run-config file");
    sweep_cmd->add_flag("--force", common.force, "overwrite existing outputs");

    // fig2
    auto* fig2_cmd = app.add_subcommand("fig2", "three-initialization target-training study");
    std::string fig2_dir;
    std::string fig2_seeds;
    int fig2_steps = -1;
    fig2_cmd->add_option("--out-dir", fig2_dir, "output directory")->required();
    fig2_cmd->add_option("--seeds", fig2_seeds, "comma-separated seeds (default 0,1,2)");
    fig2_cmd->add_option("--steps", fig2_steps, "generator steps per training (default 5000)");
    fig2_cmd->add_option("--config", common.config_path, "run-config file");
    fig2_cmd->add_flag("--force", common.force, "overwrite existing outputs");

    // dynamics
    auto* dyn_cmd = app.add_subcommand("dynamics", "latent-trajectory statistics per init");
    std::string dyn_dir;
    std::uint64_t dyn_seed = 0;
    int dyn_steps = -1;
    dyn_cmd->add_option("--out-dir", dyn_dir, "output directory")->required();
    dyn_cmd->add_option("--seed", dyn_seed, "RNG seed (default 0)");
    dyn_cmd->add_option("--steps", dyn_steps, "generator steps per training (default 5000)");
    dyn_cmd->add_option("--config", common.config_path, "run-config file");
    dyn_cmd->add_flag("--force", common.force, "overwrite existing outputs");

    // rank-sources
    auto* rank_cmd = app.add_subcommand("rank-sources", "rank candidate sources for a target");
    std::string rank_target;
    std::vector<std::string> rank_sources;
    std::string rank_metric = "fid";
    std::string rank_fixture;
    std::string rank_target_label;
    int rank_k = 5;
    rank_cmd->add_option("--target", rank_target, "target sample/feature file");
    rank_cmd->add_option("--source", rank_sources, "source sample/feature file (repeatable)");
    rank_cmd->add_option("--metric", rank_metric, "fid|kid|precision|recall");
    rank_cmd->add_option("--fixture", rank_fixture, "rank from a fixture table instead");
    rank_cmd->add_option("--target-label", rank_target_label, "target row in the fixture");
    rank_cmd->add_option("--k", rank_k, "neighbor count for precision/recall");

    // verify-table4
    auto* verify_cmd = app.add_subcommand("verify-table4", "selector failure counts vs fixtures");
    std::string verify_regime = "real";
    std::string verify_fixtures = GANLAB_FIXTURE_DIR;
    verify_cmd->add_option("--regime", verify_regime, "real (generated has no reference)");
    verify_cmd->add_option("--fixtures", verify_fixtures, "fixture directory");

    // config
    auto* config_cmd = app.add_subcommand("config", "configuration utilities");
    bool config_dump = false;
    config_cmd->add_flag("--dump", config_dump, "print the effective configuration");
    config_cmd->add_option("--config", common.config_path, "run-config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*train_cmd) {
            RunConfig config = effective_config(common);
            if (train_cmd->count("--seed") != 0U) {
                config.seed = train_seed;
            }
            if (train_steps >= 0) {
                config.generator_steps = train_steps;
            }
            std::printf("seed = %llu\n", static_cast<unsigned long long>(config.seed));
            const DataSpec data = data_spec_by_name(train_data);
            const TrainResult result = gan_train(data, train_config_from(config));
            write_checkpoint_file(train_out, result.final, common.force);
            std::printf("trained %d steps on %s; final disc loss %s, gen loss %s\n",
                        config.generator_steps, train_data.c_str(),
                        result.disc_losses.empty() ? "-" : format_real(result.disc_losses.back()).c_str(),
                        result.gen_losses.empty() ? "-" : format_real(result.gen_losses.back()).c_str());
            std::printf("wrote %s\n", train_out.c_str());
        } else if (*ft_cmd) {
            RunConfig config = effective_config(common);
            if (ft_cmd->count("--seed") != 0U) {
                config.seed = ft_seed;
            }
            const int steps = ft_steps >= 0 ? ft_steps : config.finetune_steps;
            std::printf("seed = %llu\n", static_cast<unsigned long long>(config.seed));
            const GanCheckpoint start = read_checkpoint_file(ft_init);
            const DataSpec data = data_spec_by_name(ft_data);
            const GanCheckpoint tuned = finetune(data, start, steps, train_config_from(config));
            write_checkpoint_file(ft_out, tuned, common.force);
            std::printf("finetuned %d steps from %s (step %lld)\n", steps, ft_init.c_str(),
                        static_cast<long long>(start.step));
            std::printf("wrote %s\n", ft_out.c_str());
        } else if (*metrics_cmd) {
            std::printf("seed = %llu\n", static_cast<unsigned long long>(metrics_seed));
            const SampleSet a = load_sample_set(metrics_a);
            double value = 0.0;
            if (metrics_kind == "coverage") {
                value = static_cast<double>(mode_coverage(a, target_spec().centers));
            } else {
                if (metrics_b.empty()) {
                    throw ConfigError("--b is required for --kind " + metrics_kind);
                }
                const SampleSet b = load_sample_set(metrics_b);
                if (metrics_kind == "w1") {
                    value = w1_exact(a, b);
                } else if (metrics_kind == "sliced-w1") {
                    value = w1_sliced(a, b, metrics_projections, metrics_seed);
                } else if (metrics_kind == "fid") {
                    value = frechet_distance(fit_gaussian(a), fit_gaussian(b));
                } else if (metrics_kind == "kid") {
                    value = kid(a, b);
                } else if (metrics_kind == "precision") {
                    value = knn_precision_recall(a, b, metrics_k).precision;
                } else if (metrics_kind == "recall") {
                    value = knn_precision_recall(a, b, metrics_k).recall;
                } else {
                    throw ConfigError("unknown metric kind \"" + metrics_kind + "\"");
                }
            }
            std::printf("%s = %s\n", metrics_kind.c_str(), format_real(value).c_str());
        } else if (*gen_cmd) {
            std::printf("seed = %llu\n", static_cast<unsigned long long>(gen_seed));
            SampleSet samples{Matrix(0, 0), ""};
            if (!gen_init.empty()) {
                const GanCheckpoint ckpt = read_checkpoint_file(gen_init);
                samples = generate(ckpt.generator, gen_n, ckpt.generator.in_dim(), gen_seed);
            } else if (!gen_data.empty()) {
                samples = sample(data_spec_by_name(gen_data), gen_n, gen_seed);
            } else {
                throw ConfigError("generate needs --init or --data");
            }
            if (gen_out.size() >= 5 && gen_out.compare(gen_out.size() - 5, 5, ".feat") == 0) {
                write_feature_file(gen_out, samples.points, common.force);
            } else {
                write_samples_csv(gen_out, samples, common.force);
            }
            std::printf("wrote %d samples to %s\n", samples.n(), gen_out.c_str());
        } else if (*sweep_cmd) {
            RunConfig config = effective_config(common);
            if (!sweep_seeds.empty()) {
                config.seeds = sweep_seeds;
            }
            if (sweep_checkpoints > 0) {
                config.sweep_checkpoints = sweep_checkpoints;
            }
            if (sweep_ft_steps >= 0) {
                config.finetune_steps = sweep_ft_steps;
            }
            if (sweep_full) {
                config.sweep_checkpoints = 100;
            }
            std::printf("seeds = %s\n", config.seeds.c_str());
            const SweepResult result = run_fig3_sweep(config, sweep_dir, common.force);
            for (const SweepSeedResult& per_seed : result.per_seed) {
                std::printf("seed %llu: pearson(recall, w1) = %s, pearson(grad, w1) = %s\n",
                            static_cast<unsigned long long>(per_seed.seed),
                            format_real(per_seed.pearson_recall_w1).c_str(),
                            format_real(per_seed.pearson_grad_w1).c_str());
            }
            std::printf("median pearson(recall, w1) = %s\n",
                        format_real(result.median_pearson_recall_w1).c_str());
            std::printf("median pearson(grad, w1) = %s\n",
                        format_real(result.median_pearson_grad_w1).c_str());
            for (const std::string& file : result.files) {
                std::printf("wrote %s\n", file.c_str());
            }
        } else if (*fig2_cmd) {
            RunConfig config = effective_config(common);
            if (!fig2_seeds.empty()) {
                config.seeds = fig2_seeds;
            }
            if (fig2_steps >= 0) {
                config.generator_steps = fig2_steps;
            }
            std::printf("seeds = %s\n", config.seeds.c_str());
            const ExperimentReport report = run_fig2(config, fig2_dir, common.force);
            for (const char* name : {"source1", "source2", "scratch"}) {
                std::printf("median final w1 (%s) = %s, median final modes = %g\n", name,
                            format_real(summary_value(report, std::string("median_final_w1_") + name))
                                .c_str(),
                            summary_value(report, std::string("median_final_modes_") + name));
            }
            for (const std::string& file : report.files) {
                std::printf("wrote %s\n", file.c_str());
            }
        } else if (*dyn_cmd) {
            RunConfig config = effective_config(common);
            if (dyn_cmd->count("--seed") != 0U) {
                config.seed = dyn_seed;
            }
            if (dyn_steps >= 0) {
                config.generator_steps = dyn_steps;
            }
            std::printf("seed = %llu\n", static_cast<unsigned long long>(config.seed));
            const ExperimentReport report = run_dynamics(config, dyn_dir, common.force);
            for (const auto& [key, value] : report.summary) {
                std::printf("%s = %s\n", key.c_str(), format_real(value).c_str());
            }
            for (const std::string& file : report.files) {
                std::printf("wrote %s\n", file.c_str());
            }
        } else if (*rank_cmd) {
            const SelectorMetric metric = selector_metric_from_name(rank_metric);
            if (!rank_fixture.empty()) {
                if (rank_target_label.empty()) {
                    throw ConfigError("--target-label is required with --fixture");
                }
                const DistanceTable table = load_distance_table(rank_fixture, metric);
                const SourceChoice choice = choose_source(table, rank_target_label);
                std::printf("chosen: %s (%s = %s)%s\n", choice.source.c_str(),
                            rank_metric.c_str(), format_real(choice.value).c_str(),
                            choice.tie ? " [tie]" : "");
            } else {
                if (rank_target.empty() || rank_sources.empty()) {
                    throw ConfigError("rank-sources needs --target and at least one --source");
                }
                const SampleSet target = load_sample_set(rank_target);
                std::vector<SampleSet> sources;
                for (const std::string& path : rank_sources) {
                    sources.push_back(load_sample_set(path));
                }
                const DistanceTable table =
                    build_distance_table(target, sources, metric, rank_k);
                for (std::size_t s = 0; s < table.sources.size(); ++s) {
                    std::printf("%-20s %s = %s\n", table.sources[s].c_str(), rank_metric.c_str(),
                                format_real(table.values(0, static_cast<int>(s))).c_str());
                }
                const SourceChoice choice = choose_source(table, table.targets.front());
                std::printf("chosen: %s%s\n", choice.source.c_str(), choice.tie ? " [tie]" : "");
            }
        } else if (*verify_cmd) {
            return run_verify_table4(verify_regime, verify_fixtures);
        } else if (*config_cmd) {
            if (!config_dump) {
                std::fprintf(stderr, "nothing to do; use `config --dump`\n");
                return 1;
            }
            const RunConfig config = effective_config(common);
            std::fputs(config.dump().c_str(), stdout);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}

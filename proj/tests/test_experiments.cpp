#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ganlab/common.hpp"
#include "ganlab/experiments.hpp"
#include "ganlab/io.hpp"

using namespace ganlab;
namespace fs = std::filesystem;

namespace {

const fs::path kScratch = "scratch_test_experiments";

struct ScratchDir {
    ScratchDir() {
        fs::remove_all(kScratch);
        fs::create_directories(kScratch);
    }
    std::string operator()(const std::string& name) const { return (kScratch / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Small enough to finish in seconds while still exercising every code path.
RunConfig micro_config() {
    RunConfig c;
    c.generator_steps = 4;
    c.snapshot_every = 2;
    c.disc_steps_per_gen = 1;
    c.batch_size = 8;
    c.latent_dim = 8;
    c.metric_samples = 32;
    c.knn_k = 3;
    c.seeds = "0";
    c.seed = 0;
    c.finetune_steps = 2;
    c.sweep_checkpoints = 3;
    return c;
}

int count_lines(const std::string& text) {
    int lines = 0;
    for (char ch : text)
        if (ch == '\n') ++lines;
    return lines;
}

}  // namespace

TEST_CASE("median handles odd, even and empty inputs") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK(median({7.0}) == 7.0);
    CHECK_THROWS_AS(median({}), DataError);
}

TEST_CASE("train_config_from copies the training slice of a run config") {
    RunConfig rc;
    rc.generator_steps = 123;
    rc.disc_steps_per_gen = 7;
    rc.batch_size = 18;
    rc.latent_dim = 12;
    rc.lr = 0.01;
    rc.beta1 = 0.4;
    rc.beta2 = 0.99;
    rc.snapshot_every = 11;
    rc.saturating_gen_loss = true;
    rc.seed = 99;
    const TrainConfig tc = train_config_from(rc);
    CHECK(tc.generator_steps == 123);
    CHECK(tc.disc_steps_per_gen == 7);
    CHECK(tc.batch_size == 18);
    CHECK(tc.latent_dim == 12);
    CHECK(tc.lr == 0.01);
    CHECK(tc.beta1 == 0.4);
    CHECK(tc.beta2 == 0.99);
    CHECK(tc.snapshot_every == 11);
    CHECK(tc.saturating_gen_loss);
    CHECK(tc.seed == 99);
}

TEST_CASE("run_fig2 writes the documented artifacts") {
    ScratchDir dir;
    const RunConfig config = micro_config();
    const ExperimentReport report = run_fig2(config, dir("fig2"), false);

    const std::vector<std::string> expected = {
        "records.csv",          "summary.json",           "fig2_w1.svg",
        "fig2_samples_source1.svg", "fig2_samples_source2.svg", "fig2_samples_scratch.svg"};
    CHECK(report.files.size() == expected.size());
    for (const std::string& name : expected) CHECK(fs::exists(dir("fig2") + "/" + name));

    const std::string records = slurp(dir("fig2") + "/records.csv");
    CHECK(records.rfind("seed,init,index,step,w1,modes\n", 0) == 0);
    // One row per (seed, init, snapshot): 1 * 3 * 2 plus the header.
    CHECK(count_lines(records) == 1 + 1 * 3 * 2);

    // Per-init series were captured for the single seed.
    CHECK(report.series.count("seed0/source1/w1") == 1);
    CHECK(report.series.count("seed0/scratch/modes") == 1);
    CHECK(report.series.at("seed0/source1/w1").entries.size() == 2);
    CHECK(report.series.at("seed0/source1/w1").entries[0].first == 2);
    CHECK(report.series.at("seed0/source1/w1").entries[1].first == 4);

    // Summary scalars exist and are coherent.
    for (const char* name : {"source1", "source2", "scratch"}) {
        const double w1 = summary_value(report, std::string("median_final_w1_") + name);
        CHECK(w1 > 0.0);
        const double modes = summary_value(report, std::string("median_final_modes_") + name);
        CHECK(modes >= 0.0);
        CHECK(modes <= 10.0);
        CHECK(summary_value(report, std::string("final_w1_") + name + "_seed0") == w1);
    }
    CHECK_THROWS_AS(summary_value(report, "no_such_key"), Error);

    const std::string summary = slurp(dir("fig2") + "/summary.json");
    CHECK(summary.find("\"command\": \"fig2\"") != std::string::npos);
    CHECK(summary.find("median_final_w1_source1") != std::string::npos);
}

TEST_CASE("run_fig2 output is byte-identical across reruns and seeds add rows") {
    ScratchDir dir;
    const RunConfig config = micro_config();
    run_fig2(config, dir("a"), false);
    run_fig2(config, dir("b"), false);
    for (const char* name : {"/records.csv", "/summary.json", "/fig2_w1.svg",
                             "/fig2_samples_source1.svg", "/fig2_samples_source2.svg",
                             "/fig2_samples_scratch.svg"})
        CHECK(slurp(dir("a") + name) == slurp(dir("b") + name));

    RunConfig two_seeds = micro_config();
    two_seeds.seeds = "0,5";
    const ExperimentReport report = run_fig2(two_seeds, dir("two"), false);
    const std::string records = slurp(dir("two") + "/records.csv");
    CHECK(count_lines(records) == 1 + 2 * 3 * 2);
    // The seed-0 rows are unchanged by adding a second seed.
    const std::string single = slurp(dir("a") + "/records.csv");
    CHECK(records.rfind(single, 0) == 0);
    CHECK(summary_value(report, "final_w1_source1_seed5") > 0.0);
}

TEST_CASE("run_fig2 refuses to clobber existing outputs unless forced") {
    ScratchDir dir;
    const RunConfig config = micro_config();
    run_fig2(config, dir("fig2"), false);
    CHECK_THROWS_AS(run_fig2(config, dir("fig2"), false), DataError);
    const std::string before = slurp(dir("fig2") + "/records.csv");
    CHECK_NOTHROW(run_fig2(config, dir("fig2"), true));
    CHECK(slurp(dir("fig2") + "/records.csv") == before);
}

TEST_CASE("sweep_one_seed validates the checkpoint count") {
    RunConfig config = micro_config();
    config.sweep_checkpoints = 2;
    CHECK_THROWS_AS(sweep_one_seed(config, 0), ConfigError);
}

TEST_CASE("sweep keeps early checkpoints dense and stretches the rest to the end") {
    // Six snapshots exist (900 steps, every 150) but only four fit the
    // budget: the first two thirds stay dense, the tail widens its stride
    // and still reaches the final snapshot. Training hyperparameters mirror
    // the determinism rehearsal so recall actually moves at this scale.
    RunConfig config;
    config.generator_steps = 900;
    config.snapshot_every = 150;
    config.sweep_checkpoints = 4;
    config.finetune_steps = 50;
    config.batch_size = 32;
    config.latent_dim = 16;
    config.metric_samples = 128;
    config.knn_k = 3;
    config.lr = 0.002;
    config.seeds = "0";

    const SweepSeedResult result = sweep_one_seed(config, 0);
    REQUIRE(result.records.size() == 4);
    CHECK(result.records[0].step == 150);
    CHECK(result.records[1].step == 300);
    CHECK(result.records[2].step == 600);
    CHECK(result.records[3].step == 900);
}

TEST_CASE("a sweep whose recall never moves is reported as degenerate") {
    // Four steps of training cannot reach the radius-20 modes, so recall is
    // zero at every checkpoint and the correlation is undefined.
    ScratchDir dir;
    const RunConfig config = micro_config();
    try {
        run_fig3_sweep(config, dir("sweep"), false);
        FAIL("expected degenerate-sweep error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("degenerate sweep") != std::string::npos);
    }
}

TEST_CASE("run_dynamics writes per-init trajectory statistics") {
    ScratchDir dir;
    const RunConfig config = micro_config();
    const ExperimentReport report = run_dynamics(config, dir("dyn"), false);

    const std::vector<std::string> expected = {
        "dynamics_distance.csv", "dynamics_lengths.csv",  "dynamics_changes.csv",
        "dynamics_coverage.csv", "dynamics_distance.svg", "dynamics_changes.svg",
        "dynamics_coverage.svg", "dynamics_lengths.svg",  "summary.json"};
    CHECK(report.files.size() == expected.size());
    for (const std::string& name : expected) CHECK(fs::exists(dir("dyn") + "/" + name));

    // Three inits, each with the starting checkpoint plus two snapshots.
    const std::string coverage = slurp(dir("dyn") + "/dynamics_coverage.csv");
    CHECK(coverage.rfind("init,index,step,modes\n", 0) == 0);
    CHECK(count_lines(coverage) == 1 + 3 * 3);
    // Steps are reported relative to each run's starting checkpoint.
    CHECK(coverage.find("scratch,0,0,") != std::string::npos);
    CHECK(coverage.find("source1,0,0,") != std::string::npos);

    const std::string distance = slurp(dir("dyn") + "/dynamics_distance.csv");
    CHECK(distance.rfind("init,transition,step,mean_distance\n", 0) == 0);
    CHECK(count_lines(distance) == 1 + 3 * 2);

    const std::string lengths = slurp(dir("dyn") + "/dynamics_lengths.csv");
    CHECK(count_lines(lengths) == 1 + 3 * 256);

    for (const char* name : {"source1", "source2", "scratch"}) {
        CHECK(summary_value(report, std::string("median_traj_length_") + name) >= 0.0);
        const double change = summary_value(report, std::string("mean_class_change_") + name);
        CHECK(change >= 0.0);
        CHECK(change <= 1.0);
        CHECK(report.series.count(std::string(name) + "/mean_distance") == 1);
        CHECK(report.series.count(std::string(name) + "/mode_coverage") == 1);
    }
}

TEST_CASE("run_dynamics reruns are byte-identical and respect force") {
    ScratchDir dir;
    const RunConfig config = micro_config();
    run_dynamics(config, dir("a"), false);
    run_dynamics(config, dir("b"), false);
    for (const char* name :
         {"/dynamics_distance.csv", "/dynamics_lengths.csv", "/dynamics_changes.csv",
          "/dynamics_coverage.csv", "/summary.json"})
        CHECK(slurp(dir("a") + name) == slurp(dir("b") + name));

    CHECK_THROWS_AS(run_dynamics(config, dir("a"), false), DataError);
    CHECK_NOTHROW(run_dynamics(config, dir("a"), true));
}

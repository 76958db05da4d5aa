#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "ganlab/common.hpp"
#include "ganlab/gan.hpp"
#include "ganlab/matrix.hpp"
#include "ganlab/metrics.hpp"
#include "ganlab/rng.hpp"

using namespace ganlab;

namespace {

TrainConfig tiny_config(std::uint64_t seed = 0) {
    TrainConfig cfg;
    cfg.generator_steps = 4;
    cfg.disc_steps_per_gen = 2;
    cfg.batch_size = 8;
    cfg.latent_dim = 8;
    cfg.snapshot_every = 2;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("target spec: ten equal modes on a radius-20 circle") {
    const GaussianMixtureSpec target = target_spec();
    REQUIRE(target.centers.rows() == 10);
    REQUIRE(target.centers.cols() == 2);
    for (int c = 0; c < 10; ++c) {
        const double r = std::hypot(target.centers(c, 0), target.centers(c, 1));
        CHECK(r == doctest::Approx(20.0).epsilon(1e-12));
        CHECK(target.sigmas[static_cast<std::size_t>(c)] == 0.25);
        CHECK(target.weights[static_cast<std::size_t>(c)] == 0.1);
    }
    CHECK(target.centers(0, 0) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(target.centers(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("source specs: ring parameters and the shared-mode mixture") {
    const RingPlusNoiseSpec ring = source1_spec();
    CHECK(ring.radius == 20.0);
    CHECK(ring.noise_sigma == 4.0);

    const GaussianMixtureSpec s2 = source2_spec();
    const GaussianMixtureSpec target = target_spec();
    REQUIRE(s2.centers.rows() == 3);
    // Shared modes are exactly the first three target centers.
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < 2; ++j) CHECK(s2.centers(c, j) == target.centers(c, j));
    for (double s : s2.sigmas) CHECK(s == 0.5);
    for (double w : s2.weights) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("sampling is deterministic and respects the requested shape") {
    const SampleSet a = sample(target_spec(), 200, 5);
    const SampleSet b = sample(target_spec(), 200, 5);
    const SampleSet c = sample(target_spec(), 200, 6);
    CHECK(a.points == b.points);
    CHECK_FALSE(a.points == c.points);
    CHECK(a.n() == 200);
    CHECK(a.dim() == 2);

    const SampleSet ring = sample(source1_spec(), 300, 1);
    CHECK(ring.n() == 300);
    double mean_radius = 0.0;
    for (int i = 0; i < ring.n(); ++i)
        mean_radius += std::hypot(ring.points(i, 0), ring.points(i, 1));
    mean_radius /= ring.n();
    // Radius 20 ring with sigma-4 noise keeps the mean radius near 20.
    CHECK(mean_radius > 17.0);
    CHECK(mean_radius < 23.0);

    CHECK_THROWS_AS(sample(target_spec(), 0, 1), ConfigError);
}

TEST_CASE("a large target sample covers all ten modes") {
    const SampleSet s = sample(target_spec(), 10000, 0);
    CHECK(mode_coverage(s, target_spec().centers) == 10);
}

TEST_CASE("TrainConfig::validate rejects broken settings") {
    CHECK_NOTHROW(tiny_config().validate());

    TrainConfig zero_steps = tiny_config();
    zero_steps.generator_steps = 0;  // allowed: a no-op training
    CHECK_NOTHROW(zero_steps.validate());

    auto expect_bad = [](auto mutate) {
        TrainConfig cfg = tiny_config();
        mutate(cfg);
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    };
    expect_bad([](TrainConfig& c) { c.generator_steps = -1; });
    expect_bad([](TrainConfig& c) { c.disc_steps_per_gen = 0; });
    expect_bad([](TrainConfig& c) { c.batch_size = 1; });
    expect_bad([](TrainConfig& c) { c.latent_dim = 0; });
    expect_bad([](TrainConfig& c) { c.snapshot_every = 0; });
    expect_bad([](TrainConfig& c) { c.lr = 0.0; });
    expect_bad([](TrainConfig& c) { c.beta1 = 1.0; });
    expect_bad([](TrainConfig& c) { c.beta2 = -0.1; });
}

TEST_CASE("fresh_checkpoint builds the documented architectures") {
    const TrainConfig cfg = tiny_config();
    const GanCheckpoint ckpt = fresh_checkpoint(cfg, 2);

    const MlpModel& g = ckpt.generator;
    REQUIRE(g.layers.size() == 6);
    CHECK(g.in_dim() == cfg.latent_dim);
    CHECK(g.out_dim() == 2);
    const int widths[] = {64, 128, 128, 128, 64};
    for (int l = 0; l < 5; ++l) {
        CHECK(g.layers[static_cast<std::size_t>(l)].out_dim == widths[l]);
        CHECK(g.layers[static_cast<std::size_t>(l)].activation == Activation::relu);
        CHECK(g.layers[static_cast<std::size_t>(l)].batch_norm);
    }
    CHECK(g.layers[5].activation == Activation::identity);
    CHECK_FALSE(g.layers[5].batch_norm);

    const MlpModel& d = ckpt.discriminator;
    REQUIRE(d.layers.size() == 5);
    CHECK(d.in_dim() == 2);
    CHECK(d.out_dim() == 1);
    const int d_widths[] = {64, 128, 128, 64};
    for (int l = 0; l < 4; ++l) {
        CHECK(d.layers[static_cast<std::size_t>(l)].out_dim == d_widths[l]);
        CHECK(d.layers[static_cast<std::size_t>(l)].activation == Activation::relu);
        CHECK_FALSE(d.layers[static_cast<std::size_t>(l)].batch_norm);
    }

    CHECK(ckpt.gen_opt.t == 0);
    CHECK(ckpt.disc_opt.t == 0);
    CHECK(ckpt.step == 0);
}

TEST_CASE("gan_train bookkeeping: steps, snapshots, losses") {
    const TrainResult result = gan_train(target_spec(), tiny_config());
    CHECK(result.final.step == 4);
    CHECK(result.disc_losses.size() == 4);
    CHECK(result.gen_losses.size() == 4);
    REQUIRE(result.snapshots.size() == 2);
    CHECK(result.snapshots[0].step == 2);
    CHECK(result.snapshots[1].step == 4);
    CHECK(result.final.gen_opt.t == 4);
    CHECK(result.final.disc_opt.t == 4 * 2);

    // Zero generator steps: a validated no-op.
    TrainConfig noop = tiny_config();
    noop.generator_steps = 0;
    const TrainResult untouched = gan_train(target_spec(), noop);
    CHECK(untouched.final.step == 0);
    CHECK(untouched.snapshots.empty());
    CHECK(untouched.disc_losses.empty());
}

TEST_CASE("training is bit-reproducible per seed") {
    const TrainResult a = gan_train(target_spec(), tiny_config(3));
    const TrainResult b = gan_train(target_spec(), tiny_config(3));
    const TrainResult c = gan_train(target_spec(), tiny_config(4));

    REQUIRE(a.final.generator.weights.size() == b.final.generator.weights.size());
    for (std::size_t l = 0; l < a.final.generator.weights.size(); ++l) {
        CHECK(a.final.generator.weights[l] == b.final.generator.weights[l]);
        CHECK(a.final.generator.bn_running_mean[l].same_shape(
            b.final.generator.bn_running_mean[l]));
    }
    for (std::size_t l = 0; l < a.final.discriminator.weights.size(); ++l)
        CHECK(a.final.discriminator.weights[l] == b.final.discriminator.weights[l]);
    CHECK(a.gen_losses == b.gen_losses);
    CHECK(a.disc_losses == b.disc_losses);

    CHECK_FALSE(a.final.generator.weights[0] == c.final.generator.weights[0]);
}

TEST_CASE("training moves parameters and batch-norm statistics") {
    const GanCheckpoint before = fresh_checkpoint(tiny_config(), 2);
    const TrainResult after = gan_train(target_spec(), tiny_config());
    CHECK_FALSE(after.final.generator.weights[0] == before.generator.weights[0]);
    // Hidden generator layers run in train mode during the generator step, so
    // their running statistics must move away from the 0/1 init.
    bool stats_moved = false;
    for (double v : after.final.generator.bn_running_mean[0].data())
        if (v != 0.0) stats_moved = true;
    CHECK(stats_moved);
}

TEST_CASE("resuming from a checkpoint accumulates steps and resets the optimizer") {
    const TrainResult first = gan_train(target_spec(), tiny_config());
    TrainConfig more = tiny_config();
    more.generator_steps = 2;
    const TrainResult second = gan_train(target_spec(), more, &first.final);
    CHECK(second.final.step == 6);
    // Fresh Adam state: t counts only the new steps.
    CHECK(second.final.gen_opt.t == 2);
    CHECK(second.final.disc_opt.t == 2 * more.disc_steps_per_gen);

    // Mismatched latent width is rejected.
    TrainConfig wide = tiny_config();
    wide.latent_dim = 16;
    CHECK_THROWS_AS(gan_train(target_spec(), wide, &first.final), DimensionError);
}

TEST_CASE("finetune is a target training with reduced steps") {
    const TrainResult source = gan_train(source2_spec(), tiny_config(7));
    const GanCheckpoint tuned = finetune(target_spec(), source.final, 3, tiny_config(7));
    CHECK(tuned.step == source.final.step + 3);
    CHECK(tuned.gen_opt.t == 3);
    CHECK_FALSE(tuned.generator.weights[0] == source.final.generator.weights[0]);
}

TEST_CASE("divergence is detected and reported") {
    TrainConfig cfg = tiny_config();
    cfg.lr = 1e280;
    cfg.generator_steps = 3;
    CHECK_THROWS_AS(gan_train(target_spec(), cfg), TrainingDiverged);
}

TEST_CASE("generate runs the generator in eval mode deterministically") {
    const TrainResult tr = gan_train(target_spec(), tiny_config(2));
    const SampleSet a = generate(tr.final.generator, 16, 8, 99);
    const SampleSet b = generate(tr.final.generator, 16, 8, 99);
    const SampleSet c = generate(tr.final.generator, 16, 8, 100);
    CHECK(a.points == b.points);
    CHECK_FALSE(a.points == c.points);
    CHECK(a.n() == 16);
    CHECK(a.dim() == 2);

    const SampleSet empty = generate(tr.final.generator, 0, 8, 1);
    CHECK(empty.n() == 0);
    CHECK_THROWS_AS(generate(tr.final.generator, -1, 8, 1), ConfigError);
    CHECK_THROWS_AS(generate(tr.final.generator, 4, 9, 1), DimensionError);
}

TEST_CASE("mixture and ring specs validate their shapes") {
    GaussianMixtureSpec bad = target_spec();
    bad.weights.pop_back();
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    GaussianMixtureSpec negative = target_spec();
    negative.sigmas[0] = -1.0;
    CHECK_THROWS_AS(negative.validate(), ConfigError);

    RingPlusNoiseSpec ring;
    ring.radius = 0.0;
    CHECK_THROWS_AS(ring.validate(), ConfigError);
}

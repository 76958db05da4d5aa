#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ganlab/matrix.hpp"
#include "ganlab/metrics.hpp"
#include "ganlab/nn.hpp"
#include "ganlab/rng.hpp"

namespace ganlab {

struct GaussianMixtureSpec {
    Matrix centers;              // one row per component
    std::vector<double> sigmas;  // isotropic, per component
    std::vector<double> weights;

    void validate() const;
};

struct RingPlusNoiseSpec {
    double radius = 20.0;
    double noise_sigma = 4.0;

    void validate() const;
};

using DataSpec = std::variant<GaussianMixtureSpec, RingPlusNoiseSpec>;

int data_dim(const DataSpec& spec);

// Ten equal-weight components of sigma 0.25 spaced evenly on a radius-20
// circle.
GaussianMixtureSpec target_spec();
// Uniform angle on the radius-20 circle plus isotropic Gaussian noise of
// sigma 4.
RingPlusNoiseSpec source1_spec();
// Three consecutive target centers, sigma 0.5, equal weights.
GaussianMixtureSpec source2_spec();

SampleSet sample(const GaussianMixtureSpec& spec, int n, std::uint64_t seed,
                 std::string label = "mixture");
SampleSet sample(const RingPlusNoiseSpec& spec, int n, std::uint64_t seed,
                 std::string label = "ring");
SampleSet sample(const DataSpec& spec, int n, std::uint64_t seed, std::string label = "data");

struct TrainConfig {
    int generator_steps = 5000;
    int disc_steps_per_gen = 4;
    int batch_size = 64;
    int latent_dim = 64;
    double lr = 0.0002;
    double beta1 = 0.5;
    double beta2 = 0.999;
    int snapshot_every = 50;
    std::uint64_t seed = 0;
    bool saturating_gen_loss = false;

    void validate() const;
};

struct GanCheckpoint {
    MlpModel generator;
    MlpModel discriminator;
    AdamState gen_opt;
    AdamState disc_opt;
    std::int64_t step = 0;
    std::uint64_t seed = 0;
};

MlpModel make_generator(int latent_dim, int out_dim, Rng& rng);
MlpModel make_discriminator(int in_dim, Rng& rng);
GanCheckpoint fresh_checkpoint(const TrainConfig& config, int out_dim);

struct TrainResult {
    GanCheckpoint final;
    std::vector<GanCheckpoint> snapshots;
    std::vector<double> disc_losses;  // one entry per generator step
    std::vector<double> gen_losses;
};

// Alternating Adam updates: disc_steps_per_gen discriminator steps per
// generator step, fresh batches throughout, snapshot every snapshot_every
// generator steps. Optimizer state always starts fresh, also when resuming
// from a checkpoint. RNG draws are a pure function of (seed, step).
TrainResult gan_train(const DataSpec& data, const TrainConfig& config,
                      const GanCheckpoint* init = nullptr);

// gan_train on the target with a reduced step count and fresh optimizer.
GanCheckpoint finetune(const DataSpec& target, const GanCheckpoint& start, int steps,
                       TrainConfig config);

// Push n standard-normal latents through the generator in eval mode.
SampleSet generate(const MlpModel& g, int n, int latent_dim, std::uint64_t seed,
                   std::string label = "generated");

}  // namespace ganlab

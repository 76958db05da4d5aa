#include "ganlab/gan.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>

#include "ganlab/common.hpp"

namespace ganlab {

namespace {

// Large fixed stream ids so weight-init draws never collide with the
// per-step streams (which use the step number directly).
constexpr std::uint64_t kGenInitStream = (1ULL << 32) + 1;
constexpr std::uint64_t kDiscInitStream = (1ULL << 32) + 2;

double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Matrix standard_normal(int rows, int cols, Rng& rng) {
    Matrix out(rows, cols);
    for (double& v : out.data()) {
        v = rng.normal();
    }
    return out;
}

void fill_mixture(const GaussianMixtureSpec& spec, Matrix& out, Rng& rng) {
    const int d = spec.centers.cols();
    const int k = spec.centers.rows();
    for (int i = 0; i < out.rows(); ++i) {
        const double u = rng.uniform();
        int component = k - 1;
        double cumulative = 0.0;
        for (int c = 0; c < k; ++c) {
            cumulative += spec.weights[static_cast<std::size_t>(c)];
            if (u < cumulative) {
                component = c;
                break;
            }
        }
        const double sigma = spec.sigmas[static_cast<std::size_t>(component)];
        for (int j = 0; j < d; ++j) {
            out(i, j) = spec.centers(component, j) + sigma * rng.normal();
        }
    }
}

void fill_ring(const RingPlusNoiseSpec& spec, Matrix& out, Rng& rng) {
    for (int i = 0; i < out.rows(); ++i) {
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        out(i, 0) = spec.radius * std::cos(angle) + spec.noise_sigma * rng.normal();
        out(i, 1) = spec.radius * std::sin(angle) + spec.noise_sigma * rng.normal();
    }
}

void fill_batch(const DataSpec& spec, Matrix& out, Rng& rng) {
    if (const auto* mixture = std::get_if<GaussianMixtureSpec>(&spec)) {
        fill_mixture(*mixture, out, rng);
    } else {
        fill_ring(std::get<RingPlusNoiseSpec>(spec), out, rng);
    }
}

}  // namespace

void GaussianMixtureSpec::validate() const {
    const int k = centers.rows();
    if (k < 1) {
        throw ConfigError("mixture spec: needs at least one component");
    }
    if (static_cast<int>(sigmas.size()) != k || static_cast<int>(weights.size()) != k) {
        throw ConfigError("mixture spec: sigmas/weights must match component count");
    }
    double total = 0.0;
    for (int c = 0; c < k; ++c) {
        if (!(sigmas[static_cast<std::size_t>(c)] > 0.0)) {
            throw ConfigError("mixture spec: sigma must be positive");
        }
        const double w = weights[static_cast<std::size_t>(c)];
        if (!(w >= 0.0)) {
            throw ConfigError("mixture spec: weights must be nonnegative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ConfigError("mixture spec: weights must sum to 1");
    }
}

void RingPlusNoiseSpec::validate() const {
    if (!(radius > 0.0) || !(noise_sigma > 0.0)) {
        throw ConfigError("ring spec: radius and noise sigma must be positive");
    }
}

int data_dim(const DataSpec& spec) {
    if (const auto* mixture = std::get_if<GaussianMixtureSpec>(&spec)) {
        return mixture->centers.cols();
    }
    return 2;
}

GaussianMixtureSpec target_spec() {
    GaussianMixtureSpec spec;
    spec.centers = Matrix(10, 2);
    for (int c = 0; c < 10; ++c) {
        const double angle = 2.0 * M_PI * c / 10.0;
        spec.centers(c, 0) = 20.0 * std::cos(angle);
        spec.centers(c, 1) = 20.0 * std::sin(angle);
    }
    spec.sigmas.assign(10, 0.25);
    spec.weights.assign(10, 0.1);
    return spec;
}

RingPlusNoiseSpec source1_spec() {
    return RingPlusNoiseSpec{20.0, 4.0};
}

GaussianMixtureSpec source2_spec() {
    const GaussianMixtureSpec target = target_spec();
    GaussianMixtureSpec spec;
    spec.centers = Matrix(3, 2);
    for (int c = 0; c < 3; ++c) {
        spec.centers(c, 0) = target.centers(c, 0);
        spec.centers(c, 1) = target.centers(c, 1);
    }
    spec.sigmas.assign(3, 0.5);
    spec.weights.assign(3, 1.0 / 3.0);
    return spec;
}

SampleSet sample(const GaussianMixtureSpec& spec, int n, std::uint64_t seed, std::string label) {
    spec.validate();
    if (n < 1) {
        throw ConfigError("sample: n must be >= 1");
    }
    Rng rng(seed);
    Matrix points(n, spec.centers.cols());
    fill_mixture(spec, points, rng);
    return SampleSet{std::move(points), std::move(label)};
}

SampleSet sample(const RingPlusNoiseSpec& spec, int n, std::uint64_t seed, std::string label) {
    spec.validate();
    if (n < 1) {
        throw ConfigError("sample: n must be >= 1");
    }
    Rng rng(seed);
    Matrix points(n, 2);
    fill_ring(spec, points, rng);
    return SampleSet{std::move(points), std::move(label)};
}

SampleSet sample(const DataSpec& spec, int n, std::uint64_t seed, std::string label) {
    if (const auto* mixture = std::get_if<GaussianMixtureSpec>(&spec)) {
        return sample(*mixture, n, seed, std::move(label));
    }
    return sample(std::get<RingPlusNoiseSpec>(spec), n, seed, std::move(label));
}

void TrainConfig::validate() const {
    if (generator_steps < 0) {
        throw ConfigError("train config: generator_steps must be >= 0");
    }
    if (disc_steps_per_gen < 1 || batch_size < 1 || latent_dim < 1 || snapshot_every < 1) {
        throw ConfigError("train config: counts must be >= 1");
    }
    // Batch-norm backward needs at least two rows to form batch statistics.
    if (batch_size < 2) {
        throw ConfigError("train config: batch_size must be >= 2");
    }
    if (!(lr > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("train config: bad Adam hyperparameters");
    }
}

MlpModel make_generator(int latent_dim, int out_dim, Rng& rng) {
    const std::vector<int> hidden = {64, 128, 128, 128, 64};
    std::vector<LayerSpec> specs;
    int in = latent_dim;
    for (int width : hidden) {
        specs.push_back(LayerSpec{in, width, Activation::relu, true});
        in = width;
    }
    specs.push_back(LayerSpec{in, out_dim, Activation::identity, false});
    return build_mlp(specs, rng);
}

MlpModel make_discriminator(int in_dim, Rng& rng) {
    const std::vector<int> hidden = {64, 128, 128, 64};
    std::vector<LayerSpec> specs;
    int in = in_dim;
    for (int width : hidden) {
        specs.push_back(LayerSpec{in, width, Activation::relu, false});
        in = width;
    }
    specs.push_back(LayerSpec{in, 1, Activation::identity, false});
    return build_mlp(specs, rng);
}

GanCheckpoint fresh_checkpoint(const TrainConfig& config, int out_dim) {
    GanCheckpoint ckpt;
    Rng gen_rng(Rng::derive(config.seed, kGenInitStream));
    Rng disc_rng(Rng::derive(config.seed, kDiscInitStream));
    ckpt.generator = make_generator(config.latent_dim, out_dim, gen_rng);
    ckpt.discriminator = make_discriminator(out_dim, disc_rng);
    ckpt.gen_opt = make_adam_state(ckpt.generator, config.lr, config.beta1, config.beta2);
    ckpt.disc_opt = make_adam_state(ckpt.discriminator, config.lr, config.beta1, config.beta2);
    ckpt.step = 0;
    ckpt.seed = config.seed;
    return ckpt;
}

TrainResult gan_train(const DataSpec& data, const TrainConfig& config, const GanCheckpoint* init) {
    config.validate();
    const int dim = data_dim(data);

    TrainResult result;
    if (init != nullptr) {
        result.final = *init;
        if (result.final.generator.in_dim() != config.latent_dim ||
            result.final.generator.out_dim() != dim ||
            result.final.discriminator.in_dim() != dim ||
            result.final.discriminator.out_dim() != 1) {
            throw DimensionError("gan_train: checkpoint does not match config/data dims");
        }
        result.final.gen_opt =
            make_adam_state(result.final.generator, config.lr, config.beta1, config.beta2);
        result.final.disc_opt =
            make_adam_state(result.final.discriminator, config.lr, config.beta1, config.beta2);
        result.final.seed = config.seed;
    } else {
        result.final = fresh_checkpoint(config, dim);
    }

    GanCheckpoint& ckpt = result.final;
    MlpModel& gen = ckpt.generator;
    MlpModel& disc = ckpt.discriminator;
    const int batch = config.batch_size;
    Matrix real(batch, dim);

    for (int step = 1; step <= config.generator_steps; ++step) {
        Rng rng(Rng::derive(config.seed, static_cast<std::uint64_t>(step)));

        double disc_loss = 0.0;
        for (int k = 0; k < config.disc_steps_per_gen; ++k) {
            fill_batch(data, real, rng);
            const Matrix latents = standard_normal(batch, config.latent_dim, rng);
            // Fake batches for the discriminator come from the generator in
            // eval mode; batch statistics are only used (and updated) during
            // the generator's own update.
            const Matrix fake = forward_eval(gen, latents);

            ForwardResult real_fwd = forward(disc, real, Mode::train);
            ForwardResult fake_fwd = forward(disc, fake, Mode::train);

            Matrix real_grad(batch, 1);
            Matrix fake_grad(batch, 1);
            disc_loss = 0.0;
            for (int i = 0; i < batch; ++i) {
                const double real_logit = real_fwd.output(i, 0);
                const double fake_logit = fake_fwd.output(i, 0);
                disc_loss += softplus(-real_logit) + softplus(fake_logit);
                real_grad(i, 0) = -sigmoid(-real_logit) / batch;
                fake_grad(i, 0) = sigmoid(fake_logit) / batch;
            }
            disc_loss /= batch;
            if (!std::isfinite(disc_loss)) {
                throw TrainingDiverged("discriminator loss became non-finite at step " +
                                       std::to_string(ckpt.step + 1));
            }

            GradientBundle grads = backward(disc, real_fwd.cache, real_grad);
            grads += backward(disc, fake_fwd.cache, fake_grad);
            adam_step(disc, grads, ckpt.disc_opt);
        }

        const Matrix latents = standard_normal(batch, config.latent_dim, rng);
        ForwardResult gen_fwd = forward(gen, latents, Mode::train);
        ForwardResult disc_fwd = forward(disc, gen_fwd.output, Mode::train);

        Matrix logit_grad(batch, 1);
        double gen_loss = 0.0;
        for (int i = 0; i < batch; ++i) {
            const double logit = disc_fwd.output(i, 0);
            if (config.saturating_gen_loss) {
                gen_loss += -softplus(logit);
                logit_grad(i, 0) = -sigmoid(logit) / batch;
            } else {
                gen_loss += softplus(-logit);
                logit_grad(i, 0) = -sigmoid(-logit) / batch;
            }
        }
        gen_loss /= batch;
        if (!std::isfinite(gen_loss)) {
            throw TrainingDiverged("generator loss became non-finite at step " +
                                   std::to_string(ckpt.step + 1));
        }

        const GradientBundle disc_grads = backward(disc, disc_fwd.cache, logit_grad);
        const GradientBundle gen_grads = backward(gen, gen_fwd.cache, disc_grads.input_gradient);
        adam_step(gen, gen_grads, ckpt.gen_opt);

        ckpt.step += 1;
        result.disc_losses.push_back(disc_loss);
        result.gen_losses.push_back(gen_loss);
        if (step % config.snapshot_every == 0) {
            result.snapshots.push_back(ckpt);
        }
    }
    return result;
}

GanCheckpoint finetune(const DataSpec& target, const GanCheckpoint& start, int steps,
                       TrainConfig config) {
    config.generator_steps = steps;
    TrainResult result = gan_train(target, config, &start);
    return std::move(result.final);
}

SampleSet generate(const MlpModel& g, int n, int latent_dim, std::uint64_t seed,
                   std::string label) {
    if (n < 0) {
        throw ConfigError("generate: n must be >= 0");
    }
    if (g.in_dim() != latent_dim) {
        throw DimensionError("generate: latent dim mismatch (model expects " +
                             std::to_string(g.in_dim()) + ")");
    }
    if (n == 0) {
        return SampleSet{Matrix(0, g.out_dim()), std::move(label)};
    }
    Rng rng(seed);
    const Matrix latents = standard_normal(n, latent_dim, rng);
    return SampleSet{forward_eval(g, latents), std::move(label)};
}

}  // namespace ganlab

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ganlab/matrix.hpp"
#include "ganlab/rng.hpp"

namespace ganlab {

enum class Activation : std::uint8_t { relu = 0, identity = 1 };
enum class Mode : std::uint8_t { train = 0, eval = 1 };

struct LayerSpec {
    int in_dim = 0;
    int out_dim = 0;
    Activation activation = Activation::identity;
    bool batch_norm = false;

    bool operator==(const LayerSpec&) const = default;
};

// Batch-norm constants. The running update is new = (1-momentum)*old + momentum*batch.
inline constexpr double kBnEpsilon = 1e-5;
inline constexpr double kBnMomentum = 0.1;

// Fully-connected network: per layer, linear -> optional batch-norm -> activation.
// Layout: weights[l] is in_dim×out_dim, biases[l] is 1×out_dim, batch-norm
// vectors are 1×out_dim (empty matrices for layers without batch-norm).
struct MlpModel {
    std::vector<LayerSpec> layers;
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;
    std::vector<Matrix> bn_gamma;
    std::vector<Matrix> bn_beta;
    std::vector<Matrix> bn_running_mean;
    std::vector<Matrix> bn_running_var;
    Mode mode = Mode::train;
    // Bumped whenever parameters change; forward caches are stamped with it
    // so backward can reject stale caches.
    std::uint64_t revision = 0;

    int in_dim() const { return layers.empty() ? 0 : layers.front().in_dim; }
    int out_dim() const { return layers.empty() ? 0 : layers.back().out_dim; }

    void validate() const;  // throws DimensionError on inconsistency
};

// Fan-in uniform init: weights and biases ~ U(-1/sqrt(in_dim), +1/sqrt(in_dim)),
// gamma = 1, beta = 0, running mean 0, running var 1. Draw order is fixed
// (layer by layer, weights row-major then biases), so init is seed-determined.
MlpModel build_mlp(const std::vector<LayerSpec>& specs, Rng& rng);

struct LayerCache {
    Matrix input;                  // batch into the layer
    Matrix pre_act;                // input to the activation
    Matrix bn_xhat;                // normalized pre-affine values (bn layers)
    std::vector<double> bn_inv_std;  // 1/sqrt(var+eps) per feature (bn layers)
};

struct ForwardCache {
    std::vector<LayerCache> layers;
    Mode mode = Mode::train;
    int batch = 0;
    std::uint64_t model_revision = 0;
};

struct ForwardResult {
    Matrix output;
    ForwardCache cache;
};

// Train mode uses batch statistics and updates the model's running stats;
// eval mode reads running stats and never mutates the model.
ForwardResult forward(MlpModel& model, const Matrix& input, Mode mode);
// Eval-only forward usable on const models.
ForwardResult forward(const MlpModel& model, const Matrix& input);
Matrix forward_eval(const MlpModel& model, const Matrix& input);

struct GradientBundle {
    std::vector<Matrix> weight_grads;
    std::vector<Matrix> bias_grads;
    std::vector<Matrix> gamma_grads;  // empty for non-bn layers
    std::vector<Matrix> beta_grads;
    Matrix input_gradient;

    GradientBundle& operator+=(const GradientBundle& other);
    bool all_finite() const;
};

// Exact analytic gradients for every parameter and for the input batch.
GradientBundle backward(const MlpModel& model, const ForwardCache& cache,
                        const Matrix& output_grad);

struct AdamState {
    double lr = 0.0002;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t t = 0;
    std::vector<Matrix> m;  // aligned with the model's parameter list
    std::vector<Matrix> v;
};

// Moment buffers shaped like the model's parameters, all zero, t = 0.
AdamState make_adam_state(const MlpModel& model, double lr, double beta1, double beta2);

// One tensor's Adam update with bias correction; t_new is the step count
// after incrementing (>= 1).
void adam_apply(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                double lr, double beta1, double beta2, double eps, std::int64_t t_new);

// Full-model update; increments state.t by one.
void adam_step(MlpModel& model, const GradientBundle& grads, AdamState& state);

// Per-row gradient of the scalar pre-sigmoid logit with respect to the input.
// The discriminator must output one value per row; evaluated in eval mode.
Matrix input_gradient_of_logit(const MlpModel& disc, const Matrix& points);

}  // namespace ganlab

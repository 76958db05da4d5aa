#include "ganlab/nn.hpp"

#include <cmath>
#include <cstddef>

#include "ganlab/common.hpp"
#include "ganlab/kernels.hpp"

namespace ganlab {

void MlpModel::validate() const {
    const std::size_t L = layers.size();
    if (weights.size() != L || biases.size() != L || bn_gamma.size() != L ||
        bn_beta.size() != L || bn_running_mean.size() != L || bn_running_var.size() != L)
        throw DimensionError("model: per-layer containers out of sync");
    for (std::size_t l = 0; l < L; ++l) {
        const LayerSpec& spec = layers[l];
        if (spec.in_dim < 1 || spec.out_dim < 1)
            throw DimensionError("model: layer dimensions must be >= 1");
        if (l > 0 && layers[l - 1].out_dim != spec.in_dim)
            throw DimensionError("model: layer dimension chain broken");
        if (weights[l].rows() != spec.in_dim || weights[l].cols() != spec.out_dim)
            throw DimensionError("model: weight shape mismatch");
        if (biases[l].rows() != 1 || biases[l].cols() != spec.out_dim)
            throw DimensionError("model: bias shape mismatch");
        if (spec.batch_norm) {
            for (const Matrix* mat :
                 {&bn_gamma[l], &bn_beta[l], &bn_running_mean[l], &bn_running_var[l]})
                if (mat->rows() != 1 || mat->cols() != spec.out_dim)
                    throw DimensionError("model: batch-norm vector shape mismatch");
            for (double var : bn_running_var[l].data())
                if (!(var > 0.0)) throw DimensionError("model: running variance must be > 0");
        }
    }
}

MlpModel build_mlp(const std::vector<LayerSpec>& specs, Rng& rng) {
    MlpModel model;
    model.layers = specs;
    for (const LayerSpec& spec : specs) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(spec.in_dim));
        Matrix w(spec.in_dim, spec.out_dim);
        for (double& x : w.data()) x = rng.uniform(-bound, bound);
        Matrix b(1, spec.out_dim);
        for (double& x : b.data()) x = rng.uniform(-bound, bound);
        model.weights.push_back(std::move(w));
        model.biases.push_back(std::move(b));
        if (spec.batch_norm) {
            Matrix gamma(1, spec.out_dim), beta(1, spec.out_dim);
            Matrix mean(1, spec.out_dim), var(1, spec.out_dim);
            for (double& x : gamma.data()) x = 1.0;
            for (double& x : var.data()) x = 1.0;
            model.bn_gamma.push_back(std::move(gamma));
            model.bn_beta.push_back(std::move(beta));
            model.bn_running_mean.push_back(std::move(mean));
            model.bn_running_var.push_back(std::move(var));
        } else {
            model.bn_gamma.emplace_back();
            model.bn_beta.emplace_back();
            model.bn_running_mean.emplace_back();
            model.bn_running_var.emplace_back();
        }
    }
    model.validate();
    return model;
}

namespace {

ForwardResult forward_impl(const MlpModel& model, const Matrix& input, Mode mode,
                           MlpModel* mutable_model) {
    if (model.layers.empty()) throw DimensionError("forward: empty model");
    if (input.cols() != model.in_dim())
        throw DimensionError("forward: input width does not match first layer");

    const int n = input.rows();
    ForwardResult result;
    result.cache.mode = mode;
    result.cache.batch = n;
    result.cache.model_revision = model.revision;
    result.cache.layers.resize(model.layers.size());

    Matrix current = input;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const LayerSpec& spec = model.layers[l];
        LayerCache& cache = result.cache.layers[l];
        cache.input = current;

        Matrix z = matmul(current, model.weights[l]);
        const double* bias = model.biases[l].row_ptr(0);
        for (int i = 0; i < n; ++i) {
            double* row = z.row_ptr(i);
            for (int j = 0; j < spec.out_dim; ++j) row[j] += bias[j];
        }

        if (spec.batch_norm) {
            const int f = spec.out_dim;
            cache.bn_inv_std.resize(f);
            cache.bn_xhat = Matrix(n, f);
            if (mode == Mode::train) {
                if (n < 2)
                    throw DimensionError("forward: batch-norm in train mode needs batch >= 2");
                for (int j = 0; j < f; ++j) {
                    double mean = 0.0;
                    for (int i = 0; i < n; ++i) mean += z(i, j);
                    mean /= n;
                    double var = 0.0;
                    for (int i = 0; i < n; ++i) {
                        const double d = z(i, j) - mean;
                        var += d * d;
                    }
                    var /= n;
                    const double inv_std = 1.0 / std::sqrt(var + kBnEpsilon);
                    cache.bn_inv_std[j] = inv_std;
                    for (int i = 0; i < n; ++i) cache.bn_xhat(i, j) = (z(i, j) - mean) * inv_std;
                    if (mutable_model) {
                        double& rm = mutable_model->bn_running_mean[l](0, j);
                        double& rv = mutable_model->bn_running_var[l](0, j);
                        rm = (1.0 - kBnMomentum) * rm + kBnMomentum * mean;
                        rv = (1.0 - kBnMomentum) * rv + kBnMomentum * var;
                    }
                }
            } else {
                for (int j = 0; j < f; ++j) {
                    const double rm = model.bn_running_mean[l](0, j);
                    const double rv = model.bn_running_var[l](0, j);
                    const double inv_std = 1.0 / std::sqrt(rv + kBnEpsilon);
                    cache.bn_inv_std[j] = inv_std;
                    for (int i = 0; i < n; ++i) cache.bn_xhat(i, j) = (z(i, j) - rm) * inv_std;
                }
            }
            const double* gamma = model.bn_gamma[l].row_ptr(0);
            const double* beta = model.bn_beta[l].row_ptr(0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < f; ++j) z(i, j) = gamma[j] * cache.bn_xhat(i, j) + beta[j];
        }

        cache.pre_act = z;
        if (spec.activation == Activation::relu)
            for (double& x : z.data()) x = x > 0.0 ? x : 0.0;
        current = std::move(z);
    }
    result.output = std::move(current);
    return result;
}

}  // namespace

ForwardResult forward(MlpModel& model, const Matrix& input, Mode mode) {
    return forward_impl(model, input, mode, mode == Mode::train ? &model : nullptr);
}

ForwardResult forward(const MlpModel& model, const Matrix& input) {
    return forward_impl(model, input, Mode::eval, nullptr);
}

Matrix forward_eval(const MlpModel& model, const Matrix& input) {
    return forward_impl(model, input, Mode::eval, nullptr).output;
}

GradientBundle& GradientBundle::operator+=(const GradientBundle& other) {
    if (weight_grads.size() != other.weight_grads.size())
        throw DimensionError("gradient bundle: layer count mismatch");
    for (std::size_t l = 0; l < weight_grads.size(); ++l) {
        weight_grads[l] += other.weight_grads[l];
        bias_grads[l] += other.bias_grads[l];
        if (!gamma_grads[l].empty()) {
            gamma_grads[l] += other.gamma_grads[l];
            beta_grads[l] += other.beta_grads[l];
        }
    }
    // Input gradients are per-batch and intentionally not combined.
    return *this;
}

bool GradientBundle::all_finite() const {
    for (const auto* group : {&weight_grads, &bias_grads, &gamma_grads, &beta_grads})
        for (const Matrix& g : *group)
            if (!g.all_finite()) return false;
    return input_gradient.all_finite();
}

GradientBundle backward(const MlpModel& model, const ForwardCache& cache,
                        const Matrix& output_grad) {
    const std::size_t L = model.layers.size();
    if (cache.layers.size() != L) throw Error("backward: cache does not match model");
    if (cache.model_revision != model.revision)
        throw Error("backward: stale forward cache (model parameters changed)");
    if (output_grad.rows() != cache.batch || output_grad.cols() != model.out_dim())
        throw DimensionError("backward: output_grad shape mismatch");

    const int n = cache.batch;
    GradientBundle result;
    result.weight_grads.resize(L);
    result.bias_grads.resize(L);
    result.gamma_grads.resize(L);
    result.beta_grads.resize(L);

    Matrix grad = output_grad;  // d loss / d layer-output, walking backwards
    for (std::size_t idx = L; idx-- > 0;) {
        const LayerSpec& spec = model.layers[idx];
        const LayerCache& lc = cache.layers[idx];
        const int f = spec.out_dim;

        if (spec.activation == Activation::relu) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < f; ++j)
                    if (!(lc.pre_act(i, j) > 0.0)) grad(i, j) = 0.0;
        }

        if (spec.batch_norm) {
            Matrix dgamma(1, f), dbeta(1, f);
            for (int j = 0; j < f; ++j) {
                double sg = 0.0, sb = 0.0;
                for (int i = 0; i < n; ++i) {
                    sg += grad(i, j) * lc.bn_xhat(i, j);
                    sb += grad(i, j);
                }
                dgamma(0, j) = sg;
                dbeta(0, j) = sb;
            }
            result.gamma_grads[idx] = dgamma;
            result.beta_grads[idx] = dbeta;

            if (cache.mode == Mode::train) {
                // Through the batch statistics.
                for (int j = 0; j < f; ++j) {
                    const double scale = model.bn_gamma[idx](0, j) * lc.bn_inv_std[j];
                    const double mean_db = dbeta(0, j) / n;
                    const double mean_dg = dgamma(0, j) / n;
                    for (int i = 0; i < n; ++i)
                        grad(i, j) =
                            scale * (grad(i, j) - mean_db - lc.bn_xhat(i, j) * mean_dg);
                }
            } else {
                for (int j = 0; j < f; ++j) {
                    const double scale = model.bn_gamma[idx](0, j) * lc.bn_inv_std[j];
                    for (int i = 0; i < n; ++i) grad(i, j) *= scale;
                }
            }
        }

        // Linear part: z = x W + b.
        result.weight_grads[idx] = matmul_trans_a(lc.input, grad);
        Matrix dbias(1, f);
        for (int j = 0; j < f; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += grad(i, j);
            dbias(0, j) = s;
        }
        result.bias_grads[idx] = std::move(dbias);
        grad = matmul_trans_b(grad, model.weights[idx]);
    }
    result.input_gradient = std::move(grad);
    return result;
}

AdamState make_adam_state(const MlpModel& model, double lr, double beta1, double beta2) {
    AdamState state;
    state.lr = lr;
    state.beta1 = beta1;
    state.beta2 = beta2;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        state.m.emplace_back(model.weights[l].rows(), model.weights[l].cols());
        state.m.emplace_back(1, model.biases[l].cols());
        if (model.layers[l].batch_norm) {
            state.m.emplace_back(1, model.bn_gamma[l].cols());
            state.m.emplace_back(1, model.bn_beta[l].cols());
        }
    }
    state.v = state.m;
    return state;
}

void adam_apply(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                double lr, double beta1, double beta2, double eps, std::int64_t t_new) {
    if (!param.same_shape(grad) || !param.same_shape(m) || !param.same_shape(v))
        throw DimensionError("adam: shape mismatch");
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_new));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_new));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad.data()[i];
        double& mi = m.data()[i];
        double& vi = v.data()[i];
        mi = beta1 * mi + (1.0 - beta1) * g;
        vi = beta2 * vi + (1.0 - beta2) * g * g;
        const double mhat = mi / bc1;
        const double vhat = vi / bc2;
        param.data()[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

void adam_step(MlpModel& model, const GradientBundle& grads, AdamState& state) {
    if (state.t < 0) throw Error("adam: negative step count");
    const std::int64_t t_new = state.t + 1;
    std::size_t slot = 0;
    auto next = [&]() -> std::pair<Matrix&, Matrix&> {
        if (slot >= state.m.size()) throw DimensionError("adam: state and model out of sync");
        auto pair = std::pair<Matrix&, Matrix&>(state.m[slot], state.v[slot]);
        ++slot;
        return pair;
    };
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        {
            auto [m, v] = next();
            adam_apply(model.weights[l], grads.weight_grads[l], m, v, state.lr, state.beta1,
                       state.beta2, state.eps, t_new);
        }
        {
            auto [m, v] = next();
            adam_apply(model.biases[l], grads.bias_grads[l], m, v, state.lr, state.beta1,
                       state.beta2, state.eps, t_new);
        }
        if (model.layers[l].batch_norm) {
            {
                auto [m, v] = next();
                adam_apply(model.bn_gamma[l], grads.gamma_grads[l], m, v, state.lr, state.beta1,
                           state.beta2, state.eps, t_new);
            }
            {
                auto [m, v] = next();
                adam_apply(model.bn_beta[l], grads.beta_grads[l], m, v, state.lr, state.beta1,
                           state.beta2, state.eps, t_new);
            }
        }
    }
    if (slot != state.m.size()) throw DimensionError("adam: state and model out of sync");
    state.t = t_new;
    ++model.revision;
}

Matrix input_gradient_of_logit(const MlpModel& disc, const Matrix& points) {
    if (disc.out_dim() != 1)
        throw DimensionError("input_gradient_of_logit: discriminator must output a scalar");
    ForwardResult fwd = forward(disc, points);  // eval mode
    Matrix ones(points.rows(), 1);
    for (double& x : ones.data()) x = 1.0;
    return backward(disc, fwd.cache, ones).input_gradient;
}

}  // namespace ganlab

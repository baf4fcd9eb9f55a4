#include "l3inv/neuralnet.hpp"

#include <cmath>
#include <string>

#include "l3inv/errors.hpp"
#include "l3inv/seeding.hpp"

namespace l3inv::nn {

void MlpConfig::validate() const {
    if (layer_sizes.size() < 2) throw InvalidConfig("need at least an input and an output layer");
    for (std::size_t s : layer_sizes)
        if (s < 1) throw InvalidConfig("every layer needs at least one unit");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw InvalidConfig("learning rate must be positive");
    if (batch_size < 1) throw InvalidConfig("batch size must be positive");
    if (hidden_activation == Activation::sigmoid && !(sigmoid_k > 0.0))
        throw InvalidConfig("sigmoid spread k must be positive");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw InvalidConfig("Adam decay rates must lie in [0, 1)");
    if (!(adam_epsilon >= 0.0)) throw InvalidConfig("Adam epsilon must be nonnegative");
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.data().size() + l.bias.size();
    return n;
}

double sigmoid(double net, double k) { return 1.0 / (1.0 + std::exp(-k * net)); }

MlpModel init_model(const MlpConfig& config) {
    config.validate();
    MlpModel model;
    model.config = config;
    Rng rng(derive_seed(config.init_seed, streams::kInit));
    for (std::size_t l = 1; l < config.layer_sizes.size(); ++l) {
        const std::size_t fan_in = config.layer_sizes[l - 1];
        const std::size_t fan_out = config.layer_sizes[l];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        DenseLayer layer{Matrix(fan_in, fan_out), std::vector<double>(fan_out, 0.0)};
        for (double& w : layer.weights.data()) w = rng.uniform(-limit, limit);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

namespace {

void check_model(const MlpModel& model) {
    if (model.layers.size() + 1 != model.config.layer_sizes.size())
        throw ShapeMismatch("model layer count does not match its configuration");
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        if (layer.weights.rows() != model.config.layer_sizes[l] ||
            layer.weights.cols() != model.config.layer_sizes[l + 1] ||
            layer.bias.size() != layer.weights.cols())
            throw ShapeMismatch("layer " + std::to_string(l) + " has inconsistent shape");
    }
}

// out = in * W + b
void affine(const Matrix& in, const DenseLayer& layer, Matrix& out) {
    const std::size_t n = in.rows();
    const std::size_t fan_in = layer.weights.rows();
    const std::size_t fan_out = layer.weights.cols();
    out = Matrix(n, fan_out);
    for (std::size_t p = 0; p < n; ++p) {
        auto o = out.row(p);
        for (std::size_t j = 0; j < fan_out; ++j) o[j] = layer.bias[j];
        const auto x = in.row(p);
        for (std::size_t i = 0; i < fan_in; ++i) {
            const double xi = x[i];
            const auto w = layer.weights.row(i);
            for (std::size_t j = 0; j < fan_out; ++j) o[j] += xi * w[j];
        }
    }
}

void activate(const MlpConfig& cfg, const Matrix& net, Matrix& out) {
    out = net;
    auto& d = out.data();
    if (cfg.hidden_activation == Activation::relu) {
        for (double& v : d) v = v > 0.0 ? v : 0.0;
    } else {
        for (double& v : d) v = sigmoid(v, cfg.sigmoid_k);
    }
}

Matrix run_forward(const MlpModel& model, const Matrix& inputs, ForwardCache* cache) {
    check_model(model);
    if (inputs.cols() != model.input_size())
        throw ShapeMismatch("input width " + std::to_string(inputs.cols()) + " != " +
                            std::to_string(model.input_size()));
    const std::size_t depth = model.layers.size();
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.net.assign(depth, Matrix());
    c.outputs.assign(depth, Matrix());
    for (std::size_t l = 0; l < depth; ++l) {
        const Matrix& in = l == 0 ? inputs : c.outputs[l - 1];
        affine(in, model.layers[l], c.net[l]);
        if (l + 1 == depth)
            c.outputs[l] = c.net[l];
        else
            activate(model.config, c.net[l], c.outputs[l]);
    }
    return c.outputs.back();
}

}  // namespace

Matrix forward(const MlpModel& model, const Matrix& inputs) {
    return run_forward(model, inputs, nullptr);
}

Matrix forward(const MlpModel& model, const Matrix& inputs, ForwardCache& cache) {
    return run_forward(model, inputs, &cache);
}

double mse_loss(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size() || predictions.empty())
        throw ShapeMismatch("prediction/target length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = targets[i] - predictions[i];
        sum += d * d;
    }
    return sum / static_cast<double>(predictions.size());
}

double mse_loss(const Matrix& predictions, const Matrix& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
        throw ShapeMismatch("prediction/target shape mismatch");
    return mse_loss(std::span<const double>(predictions.data()),
                    std::span<const double>(targets.data()));
}

Gradients backward(const MlpModel& model, const ForwardCache& cache, const Matrix& inputs,
                   const Matrix& targets) {
    check_model(model);
    const std::size_t depth = model.layers.size();
    if (cache.net.size() != depth || cache.outputs.size() != depth)
        throw ShapeMismatch("forward cache depth does not match model");
    const Matrix& predictions = cache.outputs.back();
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols() ||
        inputs.rows() != targets.rows() || inputs.cols() != model.input_size())
        throw ShapeMismatch("backward inputs do not match the cached forward pass");

    const std::size_t n = inputs.rows();
    const double scale = 2.0 / static_cast<double>(n * predictions.cols());

    // delta = dLoss/dnet for the current layer
    Matrix delta(n, predictions.cols());
    for (std::size_t k = 0; k < delta.data().size(); ++k)
        delta.data()[k] = scale * (predictions.data()[k] - targets.data()[k]);

    Gradients grads(depth);
    for (std::size_t l = depth; l-- > 0;) {
        const DenseLayer& layer = model.layers[l];
        const Matrix& in = l == 0 ? inputs : cache.outputs[l - 1];
        const std::size_t fan_in = layer.weights.rows();
        const std::size_t fan_out = layer.weights.cols();

        DenseLayer& g = grads[l];
        g.weights = Matrix(fan_in, fan_out);
        g.bias.assign(fan_out, 0.0);
        for (std::size_t p = 0; p < n; ++p) {
            const auto d = delta.row(p);
            const auto x = in.row(p);
            for (std::size_t i = 0; i < fan_in; ++i) {
                const double xi = x[i];
                auto gw = g.weights.row(i);
                for (std::size_t j = 0; j < fan_out; ++j) gw[j] += xi * d[j];
            }
            for (std::size_t j = 0; j < fan_out; ++j) g.bias[j] += d[j];
        }

        if (l == 0) break;
        const Matrix& prev_net = cache.net[l - 1];
        const Matrix& prev_out = cache.outputs[l - 1];
        Matrix prev(n, fan_in);
        for (std::size_t p = 0; p < n; ++p) {
            const auto d = delta.row(p);
            auto e = prev.row(p);
            for (std::size_t i = 0; i < fan_in; ++i) {
                const auto w = layer.weights.row(i);
                double s = 0.0;
                for (std::size_t j = 0; j < fan_out; ++j) s += w[j] * d[j];
                double slope;
                if (model.config.hidden_activation == Activation::relu) {
                    slope = prev_net(p, i) > 0.0 ? 1.0 : 0.0;
                } else {
                    const double o = prev_out(p, i);
                    slope = model.config.sigmoid_k * o * (1.0 - o);
                }
                e[i] = s * slope;
            }
        }
        delta = std::move(prev);
    }
    return grads;
}

AdamState make_adam_state(const MlpModel& model) {
    AdamState s;
    for (const auto& l : model.layers) {
        DenseLayer zero{Matrix(l.weights.rows(), l.weights.cols()),
                        std::vector<double>(l.bias.size(), 0.0)};
        s.m.push_back(zero);
        s.v.push_back(std::move(zero));
    }
    return s;
}

namespace {

bool same_shape(const DenseLayer& a, const DenseLayer& b) {
    return a.weights.rows() == b.weights.rows() && a.weights.cols() == b.weights.cols() &&
           a.bias.size() == b.bias.size();
}

}  // namespace

void adam_step(MlpModel& model, const Gradients& gradients, AdamState& state,
               double learning_rate) {
    const std::size_t depth = model.layers.size();
    if (gradients.size() != depth || state.m.size() != depth || state.v.size() != depth)
        throw ShapeMismatch("optimizer state does not match model depth");
    for (std::size_t l = 0; l < depth; ++l)
        if (!same_shape(model.layers[l], gradients[l]) || !same_shape(model.layers[l], state.m[l]) ||
            !same_shape(model.layers[l], state.v[l]))
            throw ShapeMismatch("optimizer state does not match layer " + std::to_string(l));

    const auto& cfg = model.config;
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(cfg.adam_beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.adam_beta2, t);

    const auto update = [&](std::vector<double>& w, const std::vector<double>& g,
                            std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t k = 0; k < w.size(); ++k) {
            m[k] = cfg.adam_beta1 * m[k] + (1.0 - cfg.adam_beta1) * g[k];
            v[k] = cfg.adam_beta2 * v[k] + (1.0 - cfg.adam_beta2) * g[k] * g[k];
            const double m_hat = m[k] / correction1;
            const double v_hat = v[k] / correction2;
            w[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
        }
    };
    for (std::size_t l = 0; l < depth; ++l) {
        update(model.layers[l].weights.data(), gradients[l].weights.data(),
               state.m[l].weights.data(), state.v[l].weights.data());
        update(model.layers[l].bias, gradients[l].bias, state.m[l].bias, state.v[l].bias);
    }
}

}  // namespace l3inv::nn

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace l3inv::nn {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    [[nodiscard]] std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }
    [[nodiscard]] std::vector<double>& data() { return data_; }
    [[nodiscard]] const std::vector<double>& data() const { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class Activation { relu, sigmoid };

struct MlpConfig {
    /// Input, hidden..., output. Six layers: 100 inputs, four hidden, one output.
    std::vector<std::size_t> layer_sizes{100, 128, 64, 32, 16, 1};
    Activation hidden_activation = Activation::relu;
    double sigmoid_k = 1.0;  // spread constant of the logistic transfer function
    double learning_rate = 1e-4;
    std::size_t batch_size = 32;
    std::size_t epochs = 100;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t init_seed = 0;

    /// Throws InvalidConfig.
    void validate() const;

    friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

/// Weights w(i, j) connect node i of the previous layer to node j of this one.
struct DenseLayer {
    Matrix weights;  // fan_in x fan_out
    std::vector<double> bias;

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct MlpModel {
    MlpConfig config;
    std::vector<DenseLayer> layers;

    [[nodiscard]] std::size_t input_size() const { return config.layer_sizes.front(); }
    [[nodiscard]] std::size_t output_size() const { return config.layer_sizes.back(); }
    [[nodiscard]] std::size_t parameter_count() const;

    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Same shape as the model's layers.
using Gradients = std::vector<DenseLayer>;

struct ForwardCache {
    std::vector<Matrix> net;      // pre-activations, one per layer
    std::vector<Matrix> outputs;  // activation(net), one per layer
};

struct AdamState {
    std::vector<DenseLayer> m;
    std::vector<DenseLayer> v;
    std::uint64_t step = 0;
};

/// Logistic f(net) = 1 / (1 + exp(-k net)).
[[nodiscard]] double sigmoid(double net, double k);

/// He-uniform weights in [-sqrt(6/fan_in), sqrt(6/fan_in)], zero biases.
[[nodiscard]] MlpModel init_model(const MlpConfig& config);

/// Rows of `inputs` are patterns. Throws ShapeMismatch.
[[nodiscard]] Matrix forward(const MlpModel& model, const Matrix& inputs);
[[nodiscard]] Matrix forward(const MlpModel& model, const Matrix& inputs, ForwardCache& cache);

/// Mean over all elements of (target - prediction)^2.
[[nodiscard]] double mse_loss(const Matrix& predictions, const Matrix& targets);
[[nodiscard]] double mse_loss(std::span<const double> predictions, std::span<const double> targets);

/// Gradient of mse_loss with respect to every weight and bias, by layerwise
/// error propagation. The ReLU derivative at net == 0 is taken as 0.
[[nodiscard]] Gradients backward(const MlpModel& model, const ForwardCache& cache,
                                 const Matrix& inputs, const Matrix& targets);

[[nodiscard]] AdamState make_adam_state(const MlpModel& model);

/// Bias-corrected Adam update in place; increments state.step.
void adam_step(MlpModel& model, const Gradients& gradients, AdamState& state,
               double learning_rate);

}  // namespace l3inv::nn

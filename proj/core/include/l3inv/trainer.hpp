#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "l3inv/checkpoint.hpp"
#include "l3inv/dataset.hpp"
#include "l3inv/neuralnet.hpp"

namespace l3inv::train {

/// Metrics of one split. mse/msle/mae are in normalized target space; the
/// meter-space pair compares denormalized lengths.
struct SplitMetrics {
    double mse = 0.0;
    double msle = 0.0;
    double mae = 0.0;
    double mae_meters = 0.0;
    double mape_percent_meters = 0.0;

    friend bool operator==(const SplitMetrics&, const SplitMetrics&) = default;
};

struct EpochRow {
    std::size_t epoch = 0;  // 1-based
    data::Split split = data::Split::train;
    SplitMetrics metrics;
    double seconds = 0.0;  // wall clock of the whole epoch
};

struct TrainReport {
    std::vector<EpochRow> rows;
    std::uint64_t train_seed = 0;
    std::uint64_t init_seed = 0;
    std::uint64_t dataset_seed = 0;
    std::size_t selected_epoch = 0;  // epoch whose weights were returned; 0 = untrained

    [[nodiscard]] std::vector<EpochRow> rows_for(data::Split split) const;
};

struct TrainOptions {
    /// Return the weights of the epoch with the lowest validation MSE instead
    /// of the final epoch.
    bool select_best_val = false;
    std::function<void(const EpochRow&)> on_row;
};

struct TrainResult {
    nn::MlpModel model;
    TrainReport report;
};

/// Epoch loop: seeded shuffle of the training split, mini-batch Adam on the
/// MSE loss, then metrics on every non-empty split. Only the training split
/// influences the weights. Throws DataModelMismatch or NumericalFailure.
[[nodiscard]] TrainResult train(const data::Dataset& dataset, const nn::MlpConfig& config,
                                std::uint64_t train_seed, const TrainOptions& options = {});
[[nodiscard]] TrainResult train(const std::filesystem::path& dataset_dir,
                                const nn::MlpConfig& config, std::uint64_t train_seed,
                                const TrainOptions& options = {});

/// Throws UnknownSplit if the split holds no samples.
[[nodiscard]] SplitMetrics evaluate(const nn::MlpModel& model, const data::Dataset& dataset,
                                    data::Split split);
[[nodiscard]] SplitMetrics evaluate(const nn::MlpModel& model,
                                    const std::filesystem::path& dataset_dir,
                                    std::string_view split);

/// Metrics from normalized predictions against the given samples' labels.
[[nodiscard]] SplitMetrics evaluate_predictions(std::span<const double> predictions,
                                                std::span<const data::CurveSample* const> samples,
                                                const data::TargetBounds& bounds);

[[nodiscard]] nn::Preprocessing preprocessing_of(const data::DatasetManifest& manifest);

/// Channel length in meters for one raw I_d curve. Throws ShapeMismatch.
[[nodiscard]] double predict(const nn::MlpModel& model, std::span<const double> raw_curve,
                             const nn::Preprocessing& preprocessing);

/// CSV with header epoch,split,mse,msle,mae,mae_meters,mape_percent_meters,seconds.
/// Without `wall_clock` the seconds column is written as 0 so that reports
/// are reproducible byte for byte.
[[nodiscard]] std::string report_csv(const TrainReport& report, bool wall_clock = false);
void write_report(const TrainReport& report, const std::filesystem::path& path,
                  bool wall_clock = false);

}  // namespace l3inv::train

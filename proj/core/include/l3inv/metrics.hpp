#pragma once

#include <optional>
#include <span>

namespace l3inv::nn {

struct MetricSuite {
    double mse = 0.0;
    double msle = 0.0;
    double mae = 0.0;
    std::optional<double> mape_percent;
};

/// MSE, MSLE, MAE and optionally MAPE (percent). MSLE clamps predictions at 0
/// before ln(1 + p). Throws ShapeMismatch, or DegenerateTarget when MAPE is
/// requested and a target is zero.
[[nodiscard]] MetricSuite metric_suite(std::span<const double> predictions,
                                       std::span<const double> targets, bool with_mape = true);

}  // namespace l3inv::nn

#include "l3inv/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "l3inv/errors.hpp"

namespace l3inv::nn {

MetricSuite metric_suite(std::span<const double> predictions, std::span<const double> targets,
                         bool with_mape) {
    if (predictions.size() != targets.size() || predictions.empty())
        throw ShapeMismatch("prediction/target length mismatch");
    double se = 0.0, sle = 0.0, ae = 0.0, ape = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double p = predictions[i];
        const double t = targets[i];
        const double d = p - t;
        se += d * d;
        const double ld = std::log1p(std::max(0.0, p)) - std::log1p(t);
        sle += ld * ld;
        ae += std::abs(d);
        if (with_mape) {
            if (t == 0.0) throw DegenerateTarget("MAPE is undefined for a zero target");
            ape += std::abs(d) / std::abs(t);
        }
    }
    const auto n = static_cast<double>(predictions.size());
    MetricSuite out{se / n, sle / n, ae / n, std::nullopt};
    if (with_mape) out.mape_percent = 100.0 * ape / n;
    return out;
}

}  // namespace l3inv::nn

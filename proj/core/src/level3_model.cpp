#include "l3inv/level3_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "l3inv/errors.hpp"

namespace l3inv {

std::size_t VdsGrid::size() const {
    return static_cast<std::size_t>(std::llround((stop - start) / step)) + 1;
}

std::vector<double> VdsGrid::points() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i);
    return out;
}

void VdsGrid::validate() const {
    if (!(std::isfinite(start) && std::isfinite(stop) && std::isfinite(step)))
        throw InvalidRange("V_ds grid has non-finite bounds");
    if (!(step > 0.0)) throw InvalidRange("V_ds grid step must be positive");
    if (!(stop > start)) throw InvalidRange("V_ds grid stop must exceed start");
}

}  // namespace l3inv

namespace l3inv::device {

bool is_physical(const DeviceParams& p) {
    const double fields[] = {p.channel_length,    p.channel_width,    p.drain_resistance,
                             p.source_resistance, p.threshold_voltage, p.transconductance,
                             p.body_threshold,    p.surface_potential, p.mobility_degradation};
    for (double f : fields)
        if (!std::isfinite(f)) return false;
    return p.channel_length > 0.0 && p.channel_width > 0.0 && p.transconductance > 0.0 &&
           p.drain_resistance >= 0.0 && p.source_resistance >= 0.0 && p.body_threshold >= 0.0 &&
           p.surface_potential >= 0.0 && p.mobility_degradation >= 0.0;
}

double body_factor(const DeviceParams& p) {
    if (p.body_threshold == 0.0) return 0.0;
    const double phi = std::max(p.surface_potential, kMinSurfacePotential);
    return p.body_threshold / (4.0 * std::sqrt(phi));
}

EffectiveParams effective_params(const DeviceParams& p, double v_gs_internal) {
    const double overdrive = std::max(0.0, v_gs_internal - p.threshold_voltage);
    EffectiveParams e;
    e.body_factor = body_factor(p);
    e.kp_eff = p.transconductance / (1.0 + p.mobility_degradation * overdrive);
    e.beta = e.kp_eff * p.channel_width / p.channel_length;
    e.v_dssat = overdrive / (1.0 + e.body_factor);
    return e;
}

double intrinsic_ids(const DeviceParams& p, double v_gs_internal, double v_ds_internal) {
    const double overdrive = v_gs_internal - p.threshold_voltage;
    if (!(overdrive > 0.0)) return 0.0;
    const EffectiveParams e = effective_params(p, v_gs_internal);
    const double bulk = 1.0 + e.body_factor;
    if (v_ds_internal <= e.v_dssat) {
        const double v = std::max(0.0, v_ds_internal);
        return e.beta * (overdrive * v - bulk * v * v / 2.0);
    }
    return e.beta / (2.0 * bulk) * overdrive * overdrive;
}

namespace {

// Root of I = f(I) for nonincreasing f with f(0) = upper > 0. Damped fixed
// point from `upper`, then bisection on [0, upper].
template <typename Fn>
double solve_series(Fn&& f, double upper, const BiasPoint& bias) {
    double current = upper;
    for (int k = 0; k < kSeriesMaxIterations; ++k) {
        const double next = f(current);
        if (std::abs(current - next) <= kSeriesRelTolerance * current) return current;
        current = (1.0 - kSeriesDamping) * current + kSeriesDamping * next;
    }

    double lo = 0.0;
    double hi = upper;
    for (int k = 0; k < kSeriesMaxIterations; ++k) {
        const double mid = lo + 0.5 * (hi - lo);
        // Bracket has shrunk to adjacent doubles: the root is resolved to one ulp.
        if (mid <= lo || mid >= hi) return hi;
        const double residual = mid - f(mid);
        if (std::abs(residual) <= kSeriesRelTolerance * mid) return mid;
        if (residual < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    throw NonConvergence("series-resistance solve did not converge at v_gs=" +
                         std::to_string(bias.v_gs) + " v_ds=" + std::to_string(bias.v_ds));
}

}  // namespace

double terminal_ids(const DeviceParams& p, BiasPoint bias) {
    const double r_s = p.source_resistance;
    const double r_total = p.source_resistance + p.drain_resistance;
    if (r_s == 0.0 && p.drain_resistance == 0.0)
        return intrinsic_ids(p, bias.v_gs, bias.v_ds);

    constexpr double kDeepSaturation = std::numeric_limits<double>::infinity();
    const auto saturated = [&](double current) {
        return intrinsic_ids(p, bias.v_gs - current * r_s, kDeepSaturation);
    };
    const double sat_upper = saturated(0.0);
    if (sat_upper == 0.0) return 0.0;

    // The saturation root does not depend on v_ds, so every grid point past the
    // knee returns the same bits.
    const double i_sat = solve_series(saturated, sat_upper, bias);
    const double v_dssat = effective_params(p, bias.v_gs - i_sat * r_s).v_dssat;
    if (bias.v_ds - i_sat * r_total >= v_dssat) return i_sat;

    const auto full = [&](double current) {
        return intrinsic_ids(p, bias.v_gs - current * r_s,
                             std::max(0.0, bias.v_ds - current * r_total));
    };
    const double upper = full(0.0);
    if (upper == 0.0) return 0.0;
    // f <= f_sat pointwise, hence the linear-region root never exceeds i_sat.
    return std::min(solve_series(full, upper, bias), i_sat);
}

std::vector<double> transfer_curve(const DeviceParams& p, double v_gs, const VdsGrid& grid) {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = terminal_ids(p, {v_gs, grid.at(i)});
    return out;
}

std::vector<double> default_vgs_list() {
    std::vector<double> out;
    for (int v = 1; v <= 12; ++v) out.push_back(static_cast<double>(v));
    return out;
}

std::vector<std::vector<double>> curve_set(const DeviceParams& p,
                                           std::span<const double> v_gs_list,
                                           const VdsGrid& grid) {
    std::vector<std::vector<double>> curves;
    curves.reserve(v_gs_list.size());
    for (double v_gs : v_gs_list) curves.push_back(transfer_curve(p, v_gs, grid));
    return curves;
}

}  // namespace l3inv::device

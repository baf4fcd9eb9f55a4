#pragma once

#include <span>
#include <vector>

#include "l3inv/vds_grid.hpp"

namespace l3inv::device {

/// Physical parameters of one simulated power MOSFET. Member defaults are the
/// nominal device values; the sampler draws every field over its range.
struct DeviceParams {
    double channel_length = 1e-7;     // L [m]
    double channel_width = 1.0;       // W [m]
    double drain_resistance = 1e-3;   // R_d [ohm]
    double source_resistance = 1e-3;  // R_s [ohm]
    double threshold_voltage = 3.0;   // V_t [V]
    double transconductance = 2e-5;   // KP [A/V^2]
    double body_threshold = 0.0;      // gamma [V^0.5]
    double surface_potential = 0.6;   // phi [V]
    double mobility_degradation = 0.0;  // theta [1/V]
    double temperature_celsius = 25.0;  // stored only; no thermal scaling

    friend bool operator==(const DeviceParams&, const DeviceParams&) = default;
};

/// L, W, KP > 0 and R_d, R_s, gamma, phi, theta >= 0 (all finite).
[[nodiscard]] bool is_physical(const DeviceParams& params);

struct BiasPoint {
    double v_gs = 0.0;
    double v_ds = 0.0;
};

/// Bias-dependent quantities entering the drain-current equation.
struct EffectiveParams {
    double body_factor = 0.0;  // f_b
    double kp_eff = 0.0;       // KP degraded by theta
    double beta = 0.0;         // kp_eff * W / L
    double v_dssat = 0.0;
};

/// Smallest surface potential used in the body-factor denominator.
inline constexpr double kMinSurfacePotential = 1e-3;

/// Damped fixed-point settings for the series-resistance solve.
inline constexpr double kSeriesDamping = 0.5;
inline constexpr double kSeriesRelTolerance = 1e-12;
inline constexpr int kSeriesMaxIterations = 200;

/// f_b = gamma / (4 sqrt(phi)) at zero source-bulk bias; exactly 0 when gamma == 0.
[[nodiscard]] double body_factor(const DeviceParams& params);

[[nodiscard]] EffectiveParams effective_params(const DeviceParams& params, double v_gs_internal);

/// Drain current of the intrinsic device (no series resistance).
/// Cutoff below V_t, quadratic linear branch up to V_dssat, flat saturation above.
[[nodiscard]] double intrinsic_ids(const DeviceParams& params, double v_gs_internal,
                                   double v_ds_internal);

/// Drain current with R_s and R_d in series. Solves
///   I = intrinsic_ids(v_gs - I R_s, max(0, v_ds - I (R_s + R_d)))
/// by damped fixed-point iteration with a bisection fallback. The saturation
/// root is tried first; the full equation is solved only when that root lands
/// in the linear region. Throws NonConvergence if both the fixed-point and the
/// bisection stage exhaust their iteration caps.
[[nodiscard]] double terminal_ids(const DeviceParams& params, BiasPoint bias);

/// One I_d(V_ds) curve at fixed V_gs sampled on `grid`.
[[nodiscard]] std::vector<double> transfer_curve(const DeviceParams& params, double v_gs,
                                                 const VdsGrid& grid);

/// Gate voltages 1, 2, ..., 12 V.
[[nodiscard]] std::vector<double> default_vgs_list();

/// One transfer curve per entry of `v_gs_list`, in list order.
[[nodiscard]] std::vector<std::vector<double>> curve_set(const DeviceParams& params,
                                                         std::span<const double> v_gs_list,
                                                         const VdsGrid& grid);

}  // namespace l3inv::device

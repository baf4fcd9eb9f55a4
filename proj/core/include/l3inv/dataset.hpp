#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "l3inv/level3_model.hpp"
#include "l3inv/vds_grid.hpp"

namespace l3inv::data {

inline constexpr int kDatasetSchemaVersion = 1;
inline constexpr double kTemperatureCelsius = 25.0;
inline constexpr double kCurrentFloor = 1e-12;  // A, added before log10
inline constexpr double kStdFloor = 1e-12;

enum class SamplingLaw { uniform, log_uniform };

struct ParameterRange {
    double min = 0.0;
    double max = 0.0;
    SamplingLaw law = SamplingLaw::uniform;

    friend bool operator==(const ParameterRange&, const ParameterRange&) = default;
};

/// Sampling ranges of the nine varied device parameters. The defaults are the
/// full admissible bounds; narrower ranges may be configured but not wider.
struct ParameterRanges {
    ParameterRange channel_length{1e-7, 5e-6, SamplingLaw::log_uniform};
    ParameterRange channel_width{1e-2, 10.0, SamplingLaw::log_uniform};
    ParameterRange drain_resistance{1e-4, 1e-2, SamplingLaw::log_uniform};
    ParameterRange source_resistance{1e-4, 1e-2, SamplingLaw::log_uniform};
    ParameterRange threshold_voltage{2.0, 8.0, SamplingLaw::uniform};
    ParameterRange transconductance{2e-7, 20.0, SamplingLaw::log_uniform};
    ParameterRange body_threshold{0.0, 10.0, SamplingLaw::uniform};
    ParameterRange surface_potential{0.0, 6.0, SamplingLaw::uniform};
    ParameterRange mobility_degradation{0.0, 10.0, SamplingLaw::uniform};

    static constexpr std::size_t kCount = 9;
    /// Column names, in sampling order: L, W, R_d, R_s, V_t, KP, gamma, phi, theta.
    static const std::array<std::string_view, kCount>& names();
    [[nodiscard]] std::array<ParameterRange*, kCount> fields();
    [[nodiscard]] std::array<const ParameterRange*, kCount> fields() const;

    /// Throws InvalidRange if any min >= max, a bound is outside the admissible
    /// range, or a log-uniform range touches zero.
    void validate() const;

    friend bool operator==(const ParameterRanges&, const ParameterRanges&) = default;
};

/// Device `device_index` of the stream keyed by `master_seed`. `attempt`
/// selects the retry stream used after a solver failure.
[[nodiscard]] device::DeviceParams sample_params(const ParameterRanges& ranges,
                                                 std::uint64_t device_index,
                                                 std::uint64_t master_seed,
                                                 std::uint64_t attempt = 0);

enum class Split : std::uint8_t { train, val, test };
enum class SplitGranularity { device, curve };

[[nodiscard]] std::string_view to_string(Split split);
/// Throws UnknownSplit.
[[nodiscard]] Split split_from_string(std::string_view name);

struct SplitFractions {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;

    friend bool operator==(const SplitFractions&, const SplitFractions&) = default;
};

struct Normalization {
    std::vector<double> mean;
    std::vector<double> std;
    double current_floor = kCurrentFloor;

    friend bool operator==(const Normalization&, const Normalization&) = default;
};

/// Min-max transform of log10 L onto [0, 1].
struct TargetBounds {
    double l_min = 1e-7;
    double l_max = 5e-6;

    [[nodiscard]] double normalize(double length) const;
    [[nodiscard]] double denormalize(double normalized) const;

    friend bool operator==(const TargetBounds&, const TargetBounds&) = default;
};

struct CurveSample {
    std::size_t device_id = 0;
    double v_gs = 0.0;
    std::vector<double> features;
    std::vector<double> raw_currents;
    double label_length = 0.0;       // meters
    double label_normalized = 0.0;
    device::DeviceParams params;

    friend bool operator==(const CurveSample&, const CurveSample&) = default;
};

struct DatasetManifest {
    int schema_version = kDatasetSchemaVersion;
    std::uint64_t master_seed = 0;
    std::size_t n_devices = 0;
    std::vector<double> v_gs_list;
    VdsGrid grid;
    ParameterRanges ranges;
    Normalization normalization;
    TargetBounds target_bounds;
    SplitFractions split_fractions;
    SplitGranularity split_granularity = SplitGranularity::device;
    /// Indexed by device_id (device granularity) or sample index (curve granularity).
    std::vector<Split> split_assignment;
    std::size_t retry_count = 0;
    /// Resolved run configuration echoed for provenance; compact JSON or empty.
    std::string run_config;

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct Dataset {
    std::vector<CurveSample> samples;
    DatasetManifest manifest;

    [[nodiscard]] Split split_of(std::size_t sample_index) const;
    /// Sample indices belonging to `split`, in sample order.
    [[nodiscard]] std::vector<std::size_t> indices(Split split) const;
};

struct BuildOptions {
    SplitFractions fractions;
    SplitGranularity granularity = SplitGranularity::device;
    unsigned threads = 0;  // 0 = hardware concurrency
};

/// Retries per device after the first solver failure.
inline constexpr int kDeviceRetries = 3;

/// Simulates `n_devices` devices, one sample per (device, V_gs) pair, assigns
/// splits, and normalizes features with training-split statistics.
/// Throws InvalidRange, or GenerationFailure when too many devices fail.
[[nodiscard]] Dataset build_dataset(std::size_t n_devices, const ParameterRanges& ranges,
                                    const VdsGrid& grid, std::span<const double> v_gs_list,
                                    std::uint64_t master_seed, const BuildOptions& options = {});

/// x_i = (log10(I_i + floor) - mean_i) / max(std_i, kStdFloor)
[[nodiscard]] std::vector<double> normalize_features(std::span<const double> raw_currents,
                                                     const Normalization& normalization);

/// Per-feature log-current statistics over the training-split samples only.
[[nodiscard]] Normalization compute_normalization(const std::vector<CurveSample>& samples,
                                                  const DatasetManifest& manifest);

/// Seeded shuffle of device ids (or sample indices) cut into train/val/test.
void split_dataset(const std::vector<CurveSample>& samples, DatasetManifest& manifest,
                   const SplitFractions& fractions, std::uint64_t master_seed);

/// Recomputes features and normalized labels from raw currents and the manifest.
void apply_normalization(Dataset& dataset);

/// Writes `manifest.json` and `data.csv` into `directory` (created if needed).
void write_dataset(const Dataset& dataset, const std::filesystem::path& directory);
/// Throws IoError, SchemaMismatch, or CorruptData.
[[nodiscard]] Dataset read_dataset(const std::filesystem::path& directory);

}  // namespace l3inv::data

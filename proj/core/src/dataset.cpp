#include "l3inv/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>

#include "l3inv/errors.hpp"
#include "l3inv/seeding.hpp"

namespace l3inv::data {

namespace {

const ParameterRanges kAdmissible{};

double draw(const ParameterRange& range, Rng& rng) {
    const double u = rng.uniform01();
    double value;
    if (range.law == SamplingLaw::log_uniform) {
        const double lo = std::log10(range.min);
        const double hi = std::log10(range.max);
        value = std::pow(10.0, lo + u * (hi - lo));
    } else {
        value = range.min + u * (range.max - range.min);
    }
    return std::clamp(value, range.min, range.max);
}

}  // namespace

const std::array<std::string_view, ParameterRanges::kCount>& ParameterRanges::names() {
    static const std::array<std::string_view, kCount> kNames = {
        "L", "W", "R_d", "R_s", "V_t", "KP", "gamma", "phi", "theta"};
    return kNames;
}

std::array<ParameterRange*, ParameterRanges::kCount> ParameterRanges::fields() {
    return {&channel_length,    &channel_width,    &drain_resistance,
            &source_resistance, &threshold_voltage, &transconductance,
            &body_threshold,    &surface_potential, &mobility_degradation};
}

std::array<const ParameterRange*, ParameterRanges::kCount> ParameterRanges::fields() const {
    return {&channel_length,    &channel_width,    &drain_resistance,
            &source_resistance, &threshold_voltage, &transconductance,
            &body_threshold,    &surface_potential, &mobility_degradation};
}

void ParameterRanges::validate() const {
    const auto mine = fields();
    const auto bounds = kAdmissible.fields();
    for (std::size_t i = 0; i < kCount; ++i) {
        const ParameterRange& r = *mine[i];
        const ParameterRange& b = *bounds[i];
        const std::string name(names()[i]);
        if (!(std::isfinite(r.min) && std::isfinite(r.max)))
            throw InvalidRange(name + ": non-finite range");
        if (!(r.min < r.max)) throw InvalidRange(name + ": min must be below max");
        if (r.min < b.min || r.max > b.max)
            throw InvalidRange(name + ": range exceeds admissible bounds");
        if (r.law == SamplingLaw::log_uniform && !(r.min > 0.0))
            throw InvalidRange(name + ": log-uniform range must be positive");
    }
}

device::DeviceParams sample_params(const ParameterRanges& ranges, std::uint64_t device_index,
                                   std::uint64_t master_seed, std::uint64_t attempt) {
    ranges.validate();
    Rng rng(derive_seed(master_seed, streams::kDevice, device_index, attempt));
    device::DeviceParams p;
    p.channel_length = draw(ranges.channel_length, rng);
    p.channel_width = draw(ranges.channel_width, rng);
    p.drain_resistance = draw(ranges.drain_resistance, rng);
    p.source_resistance = draw(ranges.source_resistance, rng);
    p.threshold_voltage = draw(ranges.threshold_voltage, rng);
    p.transconductance = draw(ranges.transconductance, rng);
    p.body_threshold = draw(ranges.body_threshold, rng);
    p.surface_potential = draw(ranges.surface_potential, rng);
    p.mobility_degradation = draw(ranges.mobility_degradation, rng);
    p.temperature_celsius = kTemperatureCelsius;
    return p;
}

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

Split split_from_string(std::string_view name) {
    if (name == "train") return Split::train;
    if (name == "val") return Split::val;
    if (name == "test") return Split::test;
    throw UnknownSplit("unknown split '" + std::string(name) + "'");
}

double TargetBounds::normalize(double length) const {
    const double lo = std::log10(l_min);
    const double hi = std::log10(l_max);
    return (std::log10(length) - lo) / (hi - lo);
}

double TargetBounds::denormalize(double normalized) const {
    const double lo = std::log10(l_min);
    const double hi = std::log10(l_max);
    return std::pow(10.0, normalized * (hi - lo) + lo);
}

Split Dataset::split_of(std::size_t sample_index) const {
    if (manifest.split_granularity == SplitGranularity::curve)
        return manifest.split_assignment.at(sample_index);
    return manifest.split_assignment.at(samples.at(sample_index).device_id);
}

std::vector<std::size_t> Dataset::indices(Split split) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (split_of(i) == split) out.push_back(i);
    return out;
}

std::vector<double> normalize_features(std::span<const double> raw_currents,
                                       const Normalization& normalization) {
    if (normalization.mean.size() != raw_currents.size() ||
        normalization.std.size() != raw_currents.size())
        throw ShapeMismatch("curve length " + std::to_string(raw_currents.size()) +
                            " does not match normalization width " +
                            std::to_string(normalization.mean.size()));
    std::vector<double> out(raw_currents.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double scale = std::max(normalization.std[i], kStdFloor);
        out[i] = (std::log10(raw_currents[i] + normalization.current_floor) -
                  normalization.mean[i]) /
                 scale;
    }
    return out;
}

void split_dataset(const std::vector<CurveSample>& samples, DatasetManifest& manifest,
                   const SplitFractions& fractions, std::uint64_t master_seed) {
    if (fractions.train < 0.0 || fractions.val < 0.0 || fractions.test < 0.0 ||
        std::abs(fractions.train + fractions.val + fractions.test - 1.0) > 1e-9)
        throw InvalidRange("split fractions must be nonnegative and sum to 1");

    const std::size_t units = manifest.split_granularity == SplitGranularity::device
                                  ? manifest.n_devices
                                  : samples.size();
    std::vector<std::size_t> order(units);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(master_seed, streams::kSplit));
    rng.shuffle(std::span<std::size_t>(order));

    const auto n = static_cast<double>(units);
    auto n_train = static_cast<std::size_t>(std::llround(fractions.train * n));
    auto n_val = static_cast<std::size_t>(std::llround(fractions.val * n));
    n_train = std::min(n_train, units);
    n_val = std::min(n_val, units - n_train);

    manifest.split_assignment.assign(units, Split::test);
    for (std::size_t k = 0; k < units; ++k) {
        Split s = Split::test;
        if (k < n_train)
            s = Split::train;
        else if (k < n_train + n_val)
            s = Split::val;
        manifest.split_assignment[order[k]] = s;
    }
    manifest.split_fractions = fractions;
}

Normalization compute_normalization(const std::vector<CurveSample>& samples,
                                    const DatasetManifest& manifest) {
    const std::size_t width = manifest.grid.size();
    Normalization norm;
    norm.current_floor = kCurrentFloor;
    norm.mean.assign(width, 0.0);
    norm.std.assign(width, 1.0);

    const auto in_train = [&](std::size_t i) {
        const Split s = manifest.split_granularity == SplitGranularity::curve
                            ? manifest.split_assignment.at(i)
                            : manifest.split_assignment.at(samples[i].device_id);
        return s == Split::train;
    };

    std::size_t count = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!in_train(i)) continue;
        ++count;
        for (std::size_t j = 0; j < width; ++j)
            norm.mean[j] += std::log10(samples[i].raw_currents[j] + kCurrentFloor);
    }
    if (count == 0) return norm;
    for (double& m : norm.mean) m /= static_cast<double>(count);

    std::vector<double> sq(width, 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!in_train(i)) continue;
        for (std::size_t j = 0; j < width; ++j) {
            const double d = std::log10(samples[i].raw_currents[j] + kCurrentFloor) - norm.mean[j];
            sq[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < width; ++j)
        norm.std[j] = std::max(std::sqrt(sq[j] / static_cast<double>(count)), kStdFloor);
    return norm;
}

void apply_normalization(Dataset& dataset) {
    const auto& m = dataset.manifest;
    for (CurveSample& s : dataset.samples) {
        s.features = normalize_features(s.raw_currents, m.normalization);
        s.label_normalized = std::clamp(m.target_bounds.normalize(s.label_length), 0.0, 1.0);
    }
}

namespace {

struct DeviceResult {
    device::DeviceParams params;
    std::vector<std::vector<double>> curves;
    std::size_t attempts_used = 0;
    bool ok = false;
};

// Tries attempts [first, last) in order; stops at the first success.
void simulate_device(DeviceResult& out, const ParameterRanges& ranges, const VdsGrid& grid,
                     std::span<const double> v_gs_list, std::uint64_t master_seed,
                     std::size_t index, std::size_t first, std::size_t last) {
    for (std::size_t attempt = first; attempt < last; ++attempt) {
        ++out.attempts_used;
        device::DeviceParams p = sample_params(ranges, index, master_seed, attempt);
        try {
            out.curves = device::curve_set(p, v_gs_list, grid);
            out.params = p;
            out.ok = true;
            return;
        } catch (const NonConvergence&) {
        }
    }
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

// Attempts beyond the regular retries, used only to keep the sample count
// exact when fewer than 1% of devices are pathological.
constexpr std::size_t kExtendedAttempts = 64;

}  // namespace

Dataset build_dataset(std::size_t n_devices, const ParameterRanges& ranges, const VdsGrid& grid,
                      std::span<const double> v_gs_list, std::uint64_t master_seed,
                      const BuildOptions& options) {
    if (n_devices < 10) throw InvalidRange("n_devices must be at least 10");
    if (v_gs_list.empty()) throw InvalidRange("v_gs list must not be empty");
    ranges.validate();
    grid.validate();

    std::vector<DeviceResult> results(n_devices);
    const std::size_t regular = 1 + kDeviceRetries;
    parallel_for(n_devices, options.threads, [&](std::size_t i) {
        simulate_device(results[i], ranges, grid, v_gs_list, master_seed, i, 0, regular);
    });

    std::size_t failed = 0;
    for (const auto& r : results) failed += r.ok ? 0 : 1;
    if (static_cast<double>(failed) > 0.01 * static_cast<double>(n_devices))
        throw GenerationFailure(std::to_string(failed) + " of " + std::to_string(n_devices) +
                                " devices failed after " + std::to_string(kDeviceRetries) +
                                " retries");
    for (std::size_t i = 0; i < n_devices; ++i) {
        if (results[i].ok) continue;
        simulate_device(results[i], ranges, grid, v_gs_list, master_seed, i, regular,
                        kExtendedAttempts);
        if (!results[i].ok)
            throw GenerationFailure("device " + std::to_string(i) + " failed after " +
                                    std::to_string(kExtendedAttempts) + " attempts");
    }

    Dataset ds;
    auto& m = ds.manifest;
    m.master_seed = master_seed;
    m.n_devices = n_devices;
    m.v_gs_list.assign(v_gs_list.begin(), v_gs_list.end());
    m.grid = grid;
    m.ranges = ranges;
    m.target_bounds = {ranges.channel_length.min, ranges.channel_length.max};
    m.split_granularity = options.granularity;
    for (const auto& r : results) m.retry_count += r.attempts_used - 1;

    ds.samples.reserve(n_devices * v_gs_list.size());
    for (std::size_t i = 0; i < n_devices; ++i) {
        for (std::size_t k = 0; k < v_gs_list.size(); ++k) {
            CurveSample s;
            s.device_id = i;
            s.v_gs = v_gs_list[k];
            s.raw_currents = std::move(results[i].curves[k]);
            s.label_length = results[i].params.channel_length;
            s.params = results[i].params;
            ds.samples.push_back(std::move(s));
        }
    }

    split_dataset(ds.samples, m, options.fractions, master_seed);
    m.normalization = compute_normalization(ds.samples, m);
    apply_normalization(ds);
    return ds;
}

}  // namespace l3inv::data

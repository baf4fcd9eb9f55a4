#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "l3inv/dataset.hpp"
#include "l3inv/neuralnet.hpp"

namespace l3inv::cli {

/// Every tunable of a generate/train run. Defaults reproduce the reference
/// setup; a config file overrides them and command-line flags override both.
struct RunConfig {
    struct DatasetSection {
        std::size_t n_devices = 5000;
        std::uint64_t seed = 0;
        VdsGrid grid;
        std::vector<double> v_gs_list = device::default_vgs_list();
        data::ParameterRanges ranges;
        data::SplitFractions split_fractions;
        data::SplitGranularity split_granularity = data::SplitGranularity::device;
        unsigned threads = 0;
    } dataset;

    nn::MlpConfig mlp;
    std::uint64_t train_seed = 0;
    bool select_best_val = false;
    bool wall_clock = false;

    struct Paths {
        std::string data;
        std::string model;
        std::string report;
        std::string curve;
        std::string split;
    } paths;
};

/// Hidden widths of the default network.
[[nodiscard]] std::vector<std::size_t> default_hidden_widths();

/// Overlays the keys present in `j` onto `config`. Throws InvalidConfig on
/// unknown enum values or malformed fields.
void apply_json(RunConfig& config, const nlohmann::json& j);
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);
[[nodiscard]] nlohmann::json to_json(const RunConfig& config);

}  // namespace l3inv::cli

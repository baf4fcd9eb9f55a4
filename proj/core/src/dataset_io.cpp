#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "l3inv/dataset.hpp"
#include "l3inv/errors.hpp"
#include "l3inv/number_format.hpp"

namespace l3inv::data {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kDataFile = "data.csv";

std::string_view law_name(SamplingLaw law) {
    return law == SamplingLaw::log_uniform ? "log_uniform" : "uniform";
}

SamplingLaw law_from(const std::string& name) {
    if (name == "log_uniform") return SamplingLaw::log_uniform;
    if (name == "uniform") return SamplingLaw::uniform;
    throw CorruptData("unknown sampling law '" + name + "'");
}

json manifest_to_json(const DatasetManifest& m) {
    json j;
    j["schema_version"] = m.schema_version;
    j["master_seed"] = m.master_seed;
    j["n_devices"] = m.n_devices;
    j["temperature_celsius"] = kTemperatureCelsius;
    j["v_gs_list"] = m.v_gs_list;
    j["grid"] = {{"start", m.grid.start}, {"stop", m.grid.stop}, {"step", m.grid.step},
                 {"points", m.grid.size()}};
    json ranges = json::object();
    const auto fields = m.ranges.fields();
    for (std::size_t i = 0; i < ParameterRanges::kCount; ++i)
        ranges[std::string(ParameterRanges::names()[i])] = {
            {"min", fields[i]->min}, {"max", fields[i]->max}, {"law", law_name(fields[i]->law)}};
    j["parameter_ranges"] = ranges;
    j["normalization"] = {{"current_floor", m.normalization.current_floor},
                          {"std_floor", kStdFloor},
                          {"mean", m.normalization.mean},
                          {"std", m.normalization.std}};
    j["target_bounds"] = {{"L_min", m.target_bounds.l_min}, {"L_max", m.target_bounds.l_max}};
    j["split_fractions"] = {{"train", m.split_fractions.train},
                            {"val", m.split_fractions.val},
                            {"test", m.split_fractions.test}};
    j["split_granularity"] = m.split_granularity == SplitGranularity::curve ? "curve" : "device";
    json assignment = json::array();
    for (Split s : m.split_assignment) assignment.push_back(to_string(s));
    j["split_assignment"] = assignment;
    j["retry_count"] = m.retry_count;
    if (!m.run_config.empty()) j["run_config"] = json::parse(m.run_config);
    return j;
}

DatasetManifest manifest_from_json(const json& j) {
    DatasetManifest m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != kDatasetSchemaVersion)
        throw SchemaMismatch("unsupported dataset schema_version " +
                             std::to_string(m.schema_version));
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.n_devices = j.at("n_devices").get<std::size_t>();
    m.v_gs_list = j.at("v_gs_list").get<std::vector<double>>();
    const json& g = j.at("grid");
    m.grid = {g.at("start").get<double>(), g.at("stop").get<double>(), g.at("step").get<double>()};
    const json& ranges = j.at("parameter_ranges");
    auto fields = m.ranges.fields();
    for (std::size_t i = 0; i < ParameterRanges::kCount; ++i) {
        const json& r = ranges.at(std::string(ParameterRanges::names()[i]));
        *fields[i] = {r.at("min").get<double>(), r.at("max").get<double>(),
                      law_from(r.at("law").get<std::string>())};
    }
    const json& n = j.at("normalization");
    m.normalization.current_floor = n.at("current_floor").get<double>();
    m.normalization.mean = n.at("mean").get<std::vector<double>>();
    m.normalization.std = n.at("std").get<std::vector<double>>();
    const json& t = j.at("target_bounds");
    m.target_bounds = {t.at("L_min").get<double>(), t.at("L_max").get<double>()};
    const json& f = j.at("split_fractions");
    m.split_fractions = {f.at("train").get<double>(), f.at("val").get<double>(),
                         f.at("test").get<double>()};
    const std::string granularity = j.at("split_granularity").get<std::string>();
    if (granularity == "device")
        m.split_granularity = SplitGranularity::device;
    else if (granularity == "curve")
        m.split_granularity = SplitGranularity::curve;
    else
        throw CorruptData("unknown split granularity '" + granularity + "'");
    for (const auto& s : j.at("split_assignment"))
        m.split_assignment.push_back(split_from_string(s.get<std::string>()));
    m.retry_count = j.at("retry_count").get<std::size_t>();
    if (j.contains("run_config")) m.run_config = j.at("run_config").dump();
    return m;
}

std::vector<double> param_row(const device::DeviceParams& p) {
    return {p.channel_length,    p.channel_width,    p.drain_resistance,
            p.source_resistance, p.threshold_voltage, p.transconductance,
            p.body_threshold,    p.surface_potential, p.mobility_degradation};
}

std::string index_label(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "i_%03zu", i);
    return buf;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
}

}  // namespace

void write_dataset(const Dataset& dataset, const fs::path& directory) {
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());

    {
        std::ofstream out(directory / kManifestFile, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + (directory / kManifestFile).string());
        out << manifest_to_json(dataset.manifest).dump(2) << '\n';
        if (!out) throw IoError("write failed for manifest");
    }

    std::ofstream out(directory / kDataFile, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (directory / kDataFile).string());
    const std::size_t width = dataset.manifest.grid.size();
    out << "device_id,v_gs";
    for (std::size_t i = 0; i < width; ++i) out << ',' << index_label(i);
    for (std::string_view name : ParameterRanges::names()) out << ',' << name;
    out << '\n';
    std::string line;
    for (const CurveSample& s : dataset.samples) {
        line.clear();
        line += std::to_string(s.device_id);
        line += ',';
        line += format_double(s.v_gs);
        for (double i_d : s.raw_currents) {
            line += ',';
            line += format_double(i_d);
        }
        for (double v : param_row(s.params)) {
            line += ',';
            line += format_double(v);
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write failed for data table");
}

Dataset read_dataset(const fs::path& directory) {
    Dataset ds;
    {
        std::ifstream in(directory / kManifestFile, std::ios::binary);
        if (!in) throw IoError("cannot read " + (directory / kManifestFile).string());
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw CorruptData(std::string("manifest is not valid JSON: ") + e.what());
        }
        try {
            ds.manifest = manifest_from_json(j);
        } catch (const json::exception& e) {
            throw CorruptData(std::string("manifest field error: ") + e.what());
        }
    }
    const auto& m = ds.manifest;
    const std::size_t width = m.grid.size();
    if (m.normalization.mean.size() != width || m.normalization.std.size() != width)
        throw CorruptData("normalization width does not match grid");

    std::ifstream in(directory / kDataFile, std::ios::binary);
    if (!in) throw IoError("cannot read " + (directory / kDataFile).string());
    std::string line;
    if (!std::getline(in, line)) throw CorruptData("data table is empty");
    const std::size_t expected_fields = 2 + width + ParameterRanges::kCount;
    if (split_fields(line).size() != expected_fields)
        throw CorruptData("data header has wrong column count");

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != expected_fields)
            throw CorruptData("row " + std::to_string(row) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(expected_fields));
        CurveSample s;
        double id = 0.0;
        if (!parse_double(fields[0], id) || id < 0.0 || id != std::floor(id) ||
            id >= static_cast<double>(m.n_devices))
            throw CorruptData("row " + std::to_string(row) + ": bad device_id");
        s.device_id = static_cast<std::size_t>(id);
        std::vector<double> values(expected_fields - 1);
        for (std::size_t k = 1; k < expected_fields; ++k)
            if (!parse_double(fields[k], values[k - 1]))
                throw CorruptData("row " + std::to_string(row) + ": unparsable field " +
                                  std::to_string(k));
        s.v_gs = values[0];
        s.raw_currents.assign(values.begin() + 1, values.begin() + 1 + static_cast<long>(width));
        const double* p = values.data() + 1 + width;
        s.params = {p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8], kTemperatureCelsius};
        s.label_length = s.params.channel_length;
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.size() != m.n_devices * m.v_gs_list.size())
        throw CorruptData("data table has " + std::to_string(ds.samples.size()) +
                          " rows, manifest implies " +
                          std::to_string(m.n_devices * m.v_gs_list.size()));
    const std::size_t units =
        m.split_granularity == SplitGranularity::device ? m.n_devices : ds.samples.size();
    if (m.split_assignment.size() != units)
        throw CorruptData("split assignment length does not match dataset");
    apply_normalization(ds);
    return ds;
}

}  // namespace l3inv::data

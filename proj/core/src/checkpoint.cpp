#include "l3inv/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "l3inv/errors.hpp"

namespace l3inv::nn {

using nlohmann::json;

namespace {

json config_to_json(const MlpConfig& c) {
    return {{"layer_sizes", c.layer_sizes},
            {"hidden_activation", c.hidden_activation == Activation::relu ? "relu" : "sigmoid"},
            {"sigmoid_k", c.sigmoid_k},
            {"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"adam_beta1", c.adam_beta1},
            {"adam_beta2", c.adam_beta2},
            {"adam_epsilon", c.adam_epsilon},
            {"init_seed", c.init_seed}};
}

MlpConfig config_from_json(const json& j) {
    MlpConfig c;
    c.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    const auto act = j.at("hidden_activation").get<std::string>();
    if (act == "relu")
        c.hidden_activation = Activation::relu;
    else if (act == "sigmoid")
        c.hidden_activation = Activation::sigmoid;
    else
        throw CorruptData("unknown activation '" + act + "'");
    c.sigmoid_k = j.at("sigmoid_k").get<double>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.adam_beta1 = j.at("adam_beta1").get<double>();
    c.adam_beta2 = j.at("adam_beta2").get<double>();
    c.adam_epsilon = j.at("adam_epsilon").get<double>();
    c.init_seed = j.at("init_seed").get<std::uint64_t>();
    return c;
}

}  // namespace

std::string to_json_text(const Checkpoint& cp) {
    json j;
    j["schema_version"] = kCheckpointSchemaVersion;
    j["config"] = config_to_json(cp.model.config);
    json layers = json::array();
    for (const auto& l : cp.model.layers)
        layers.push_back({{"fan_in", l.weights.rows()},
                          {"fan_out", l.weights.cols()},
                          {"weights", l.weights.data()},
                          {"bias", l.bias}});
    j["layers"] = layers;
    if (cp.preprocessing) {
        const auto& p = *cp.preprocessing;
        j["preprocessing"] = {{"current_floor", p.normalization.current_floor},
                              {"mean", p.normalization.mean},
                              {"std", p.normalization.std},
                              {"L_min", p.target_bounds.l_min},
                              {"L_max", p.target_bounds.l_max}};
    }
    if (!cp.run_config.empty()) j["run_config"] = json::parse(cp.run_config);
    return j.dump(2) + "\n";
}

Checkpoint from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw CorruptData(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        const int version = j.at("schema_version").get<int>();
        if (version != kCheckpointSchemaVersion)
            throw SchemaMismatch("unsupported checkpoint schema_version " + std::to_string(version));
        Checkpoint cp;
        cp.model.config = config_from_json(j.at("config"));
        for (const auto& l : j.at("layers")) {
            const auto fan_in = l.at("fan_in").get<std::size_t>();
            const auto fan_out = l.at("fan_out").get<std::size_t>();
            DenseLayer layer{Matrix(fan_in, fan_out), l.at("bias").get<std::vector<double>>()};
            auto w = l.at("weights").get<std::vector<double>>();
            if (w.size() != fan_in * fan_out || layer.bias.size() != fan_out)
                throw CorruptData("layer array sizes do not match declared shape");
            layer.weights.data() = std::move(w);
            cp.model.layers.push_back(std::move(layer));
        }
        const auto& sizes = cp.model.config.layer_sizes;
        if (cp.model.layers.size() + 1 != sizes.size())
            throw CorruptData("layer count does not match config");
        for (std::size_t l = 0; l < cp.model.layers.size(); ++l)
            if (cp.model.layers[l].weights.rows() != sizes[l] ||
                cp.model.layers[l].weights.cols() != sizes[l + 1])
                throw CorruptData("layer shape does not match config");
        if (j.contains("preprocessing")) {
            const auto& p = j.at("preprocessing");
            Preprocessing pre;
            pre.normalization.current_floor = p.at("current_floor").get<double>();
            pre.normalization.mean = p.at("mean").get<std::vector<double>>();
            pre.normalization.std = p.at("std").get<std::vector<double>>();
            pre.target_bounds = {p.at("L_min").get<double>(), p.at("L_max").get<double>()};
            cp.preprocessing = std::move(pre);
        }
        if (j.contains("run_config")) cp.run_config = j.at("run_config").dump();
        return cp;
    } catch (const json::exception& e) {
        throw CorruptData(std::string("checkpoint field error: ") + e.what());
    }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out << to_json_text(checkpoint);
    if (!out) throw IoError("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read checkpoint " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

}  // namespace l3inv::nn

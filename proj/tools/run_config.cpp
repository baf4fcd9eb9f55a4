#include "run_config.hpp"

#include <fstream>

#include "l3inv/errors.hpp"

namespace l3inv::cli {

using nlohmann::json;

std::vector<std::size_t> default_hidden_widths() { return {128, 64, 32, 16}; }

namespace {

template <typename T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void apply_json(RunConfig& c, const json& j) {
    try {
        if (j.contains("dataset")) {
            const json& d = j.at("dataset");
            take(d, "n_devices", c.dataset.n_devices);
            take(d, "seed", c.dataset.seed);
            take(d, "threads", c.dataset.threads);
            take(d, "v_gs_list", c.dataset.v_gs_list);
            if (d.contains("grid")) {
                const json& g = d.at("grid");
                take(g, "start", c.dataset.grid.start);
                take(g, "stop", c.dataset.grid.stop);
                take(g, "step", c.dataset.grid.step);
            }
            if (d.contains("ranges")) {
                const json& r = d.at("ranges");
                auto fields = c.dataset.ranges.fields();
                for (std::size_t i = 0; i < data::ParameterRanges::kCount; ++i) {
                    const std::string name(data::ParameterRanges::names()[i]);
                    if (!r.contains(name)) continue;
                    take(r.at(name), "min", fields[i]->min);
                    take(r.at(name), "max", fields[i]->max);
                }
            }
            if (d.contains("split_fractions")) {
                const json& f = d.at("split_fractions");
                take(f, "train", c.dataset.split_fractions.train);
                take(f, "val", c.dataset.split_fractions.val);
                take(f, "test", c.dataset.split_fractions.test);
            }
            if (d.contains("split_granularity")) {
                const auto g = d.at("split_granularity").get<std::string>();
                if (g == "device")
                    c.dataset.split_granularity = data::SplitGranularity::device;
                else if (g == "curve")
                    c.dataset.split_granularity = data::SplitGranularity::curve;
                else
                    throw InvalidConfig("unknown split_granularity '" + g + "'");
            }
        }
        if (j.contains("mlp")) {
            const json& m = j.at("mlp");
            if (m.contains("input")) c.mlp.layer_sizes.front() = m.at("input").get<std::size_t>();
            if (m.contains("hidden")) {
                const auto hidden = m.at("hidden").get<std::vector<std::size_t>>();
                const std::size_t in = c.mlp.layer_sizes.front();
                c.mlp.layer_sizes = {in};
                c.mlp.layer_sizes.insert(c.mlp.layer_sizes.end(), hidden.begin(), hidden.end());
                c.mlp.layer_sizes.push_back(1);
            }
            if (m.contains("activation")) {
                const auto a = m.at("activation").get<std::string>();
                if (a == "relu")
                    c.mlp.hidden_activation = nn::Activation::relu;
                else if (a == "sigmoid")
                    c.mlp.hidden_activation = nn::Activation::sigmoid;
                else
                    throw InvalidConfig("unknown activation '" + a + "'");
            }
            take(m, "sigmoid_k", c.mlp.sigmoid_k);
            take(m, "learning_rate", c.mlp.learning_rate);
            take(m, "batch_size", c.mlp.batch_size);
            take(m, "epochs", c.mlp.epochs);
            take(m, "adam_beta1", c.mlp.adam_beta1);
            take(m, "adam_beta2", c.mlp.adam_beta2);
            take(m, "adam_epsilon", c.mlp.adam_epsilon);
        }
        take(j, "train_seed", c.train_seed);
        take(j, "select_best_val", c.select_best_val);
        take(j, "wall_clock", c.wall_clock);
        if (j.contains("paths")) {
            const json& p = j.at("paths");
            take(p, "data", c.paths.data);
            take(p, "model", c.paths.model);
            take(p, "report", c.paths.report);
            take(p, "curve", c.paths.curve);
            take(p, "split", c.paths.split);
        }
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("config file: ") + e.what());
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("config file is not valid JSON: ") + e.what());
    }
    RunConfig c;
    apply_json(c, j);
    return c;
}

json to_json(const RunConfig& c) {
    json ranges = json::object();
    const auto fields = c.dataset.ranges.fields();
    for (std::size_t i = 0; i < data::ParameterRanges::kCount; ++i)
        ranges[std::string(data::ParameterRanges::names()[i])] = {{"min", fields[i]->min},
                                                                  {"max", fields[i]->max}};
    const auto& sizes = c.mlp.layer_sizes;
    std::vector<std::size_t> hidden(sizes.begin() + 1, sizes.end() - 1);
    return {
        {"dataset",
         {{"n_devices", c.dataset.n_devices},
          {"seed", c.dataset.seed},
          {"grid", {{"start", c.dataset.grid.start},
                    {"stop", c.dataset.grid.stop},
                    {"step", c.dataset.grid.step}}},
          {"v_gs_list", c.dataset.v_gs_list},
          {"ranges", ranges},
          {"split_fractions", {{"train", c.dataset.split_fractions.train},
                               {"val", c.dataset.split_fractions.val},
                               {"test", c.dataset.split_fractions.test}}},
          {"split_granularity",
           c.dataset.split_granularity == data::SplitGranularity::curve ? "curve" : "device"}}},
        {"mlp",
         {{"input", sizes.front()},
          {"hidden", hidden},
          {"activation", c.mlp.hidden_activation == nn::Activation::relu ? "relu" : "sigmoid"},
          {"sigmoid_k", c.mlp.sigmoid_k},
          {"learning_rate", c.mlp.learning_rate},
          {"batch_size", c.mlp.batch_size},
          {"epochs", c.mlp.epochs},
          {"adam_beta1", c.mlp.adam_beta1},
          {"adam_beta2", c.mlp.adam_beta2},
          {"adam_epsilon", c.mlp.adam_epsilon}}},
        {"train_seed", c.train_seed},
        {"select_best_val", c.select_best_val},
    };
}

}  // namespace l3inv::cli

#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "l3inv/checkpoint.hpp"
#include "l3inv/dataset.hpp"
#include "l3inv/errors.hpp"
#include "l3inv/number_format.hpp"
#include "l3inv/trainer.hpp"
#include "run_config.hpp"

namespace l3inv::cli {

namespace {

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        if (!parse_double(item, v)) throw InvalidConfig("not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw InvalidConfig("empty list");
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    for (double v : parse_double_list(text)) {
        if (v < 1.0 || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw InvalidConfig("layer widths must be positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::vector<double> read_curve(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read curve " + path);
    std::vector<double> out;
    std::string token;
    char c;
    const auto flush = [&] {
        if (token.empty()) return;
        double v = 0.0;
        if (!parse_double(token, v)) throw ShapeMismatch("curve file holds a non-number: " + token);
        out.push_back(v);
        token.clear();
    };
    while (in.get(c)) {
        if (c == ',' || c == '\n' || c == '\r' || c == ' ' || c == '\t')
            flush();
        else
            token += c;
    }
    flush();
    return out;
}

void print_metrics(std::ostream& out, const std::string& prefix, const train::SplitMetrics& m) {
    out << prefix << "mse=" << format_double(m.mse) << '\n'
        << prefix << "msle=" << format_double(m.msle) << '\n'
        << prefix << "mae=" << format_double(m.mae) << '\n'
        << prefix << "mae_meters=" << format_double(m.mae_meters) << '\n'
        << prefix << "mape_percent_meters=" << format_double(m.mape_percent_meters) << '\n';
}

// Flag values captured before merging onto the resolved config.
struct Flags {
    std::string config_file;
    std::size_t devices = 0;
    std::uint64_t seed = 0;
    std::string out;
    double vds_start = 0, vds_stop = 0, vds_step = 0;
    std::string vgs_list;
    unsigned threads = 0;
    std::string granularity;
    std::string data, report, model, curve, split;
    std::size_t epochs = 0, batch_size = 0;
    double lr = 0, sigmoid_k = 0;
    std::string hidden, activation;
    bool best_val = false, wall_clock = false;
};

RunConfig resolve(const Flags& f, const CLI::App& cmd) {
    RunConfig c = f.config_file.empty() ? RunConfig{} : load_run_config(f.config_file);
    const auto given = [&](const char* name) {
        const CLI::Option* opt = cmd.get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    const std::string name = cmd.get_name();

    if (given("--devices")) c.dataset.n_devices = f.devices;
    if (given("--seed")) {
        if (name == "generate")
            c.dataset.seed = f.seed;
        else
            c.train_seed = f.seed;
    }
    if (given("--vds-start")) c.dataset.grid.start = f.vds_start;
    if (given("--vds-stop")) c.dataset.grid.stop = f.vds_stop;
    if (given("--vds-step")) c.dataset.grid.step = f.vds_step;
    if (given("--vgs-list")) c.dataset.v_gs_list = parse_double_list(f.vgs_list);
    if (given("--threads")) c.dataset.threads = f.threads;
    if (given("--split-granularity")) {
        if (f.granularity == "device")
            c.dataset.split_granularity = data::SplitGranularity::device;
        else if (f.granularity == "curve")
            c.dataset.split_granularity = data::SplitGranularity::curve;
        else
            throw InvalidConfig("--split-granularity must be device or curve");
    }
    if (given("--out")) (name == "generate" ? c.paths.data : c.paths.model) = f.out;
    if (given("--data")) c.paths.data = f.data;
    if (given("--report")) c.paths.report = f.report;
    if (given("--model")) c.paths.model = f.model;
    if (given("--curve")) c.paths.curve = f.curve;
    if (given("--split")) c.paths.split = f.split;
    if (given("--epochs")) c.mlp.epochs = f.epochs;
    if (given("--batch-size")) c.mlp.batch_size = f.batch_size;
    if (given("--lr")) c.mlp.learning_rate = f.lr;
    if (given("--sigmoid-k")) c.mlp.sigmoid_k = f.sigmoid_k;
    if (given("--hidden")) {
        const auto hidden = parse_size_list(f.hidden);
        c.mlp.layer_sizes = {c.mlp.layer_sizes.front()};
        c.mlp.layer_sizes.insert(c.mlp.layer_sizes.end(), hidden.begin(), hidden.end());
        c.mlp.layer_sizes.push_back(1);
    }
    if (given("--activation")) {
        if (f.activation == "relu")
            c.mlp.hidden_activation = nn::Activation::relu;
        else if (f.activation == "sigmoid")
            c.mlp.hidden_activation = nn::Activation::sigmoid;
        else
            throw InvalidConfig("--activation must be relu or sigmoid");
    }
    if (given("--best-val")) c.select_best_val = true;
    if (given("--wall-clock")) c.wall_clock = true;
    c.mlp.init_seed = c.train_seed;
    return c;
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw InvalidConfig(std::string("missing required flag ") + flag);
}

int cmd_generate(const RunConfig& c, std::ostream& out) {
    require(c.paths.data, "--out");
    if (c.dataset.n_devices < 10) throw InvalidConfig("--devices must be at least 10");
    data::BuildOptions opts;
    opts.fractions = c.dataset.split_fractions;
    opts.granularity = c.dataset.split_granularity;
    opts.threads = c.dataset.threads;
    data::Dataset ds = data::build_dataset(c.dataset.n_devices, c.dataset.ranges, c.dataset.grid,
                                           c.dataset.v_gs_list, c.dataset.seed, opts);
    ds.manifest.run_config = to_json(c).dump();
    data::write_dataset(ds, c.paths.data);
    out << "samples=" << ds.samples.size() << '\n'
        << "devices=" << ds.manifest.n_devices << '\n'
        << "retries=" << ds.manifest.retry_count << '\n'
        << "grid_points=" << ds.manifest.grid.size() << '\n'
        << "out=" << c.paths.data << '\n';
    return kOk;
}

int cmd_train(RunConfig c, std::ostream& out, std::ostream& err) {
    require(c.paths.data, "--data");
    require(c.paths.model, "--out");
    require(c.paths.report, "--report");
    const data::Dataset ds = data::read_dataset(c.paths.data);
    train::TrainOptions opts;
    opts.select_best_val = c.select_best_val;
    opts.on_row = [&](const train::EpochRow& row) {
        if (row.split == data::Split::train)
            err << "epoch " << row.epoch << " train_mse=" << format_double(row.metrics.mse) << '\n';
    };
    const train::TrainResult result = train::train(ds, c.mlp, c.train_seed, opts);

    nn::Checkpoint cp{result.model, train::preprocessing_of(ds.manifest), to_json(c).dump()};
    nn::save_checkpoint(cp, c.paths.model);
    train::write_report(result.report, c.paths.report, c.wall_clock);

    out << "epochs=" << c.mlp.epochs << '\n'
        << "selected_epoch=" << result.report.selected_epoch << '\n'
        << "model=" << c.paths.model << '\n'
        << "report=" << c.paths.report << '\n';
    for (data::Split s : {data::Split::train, data::Split::val, data::Split::test}) {
        const auto rows = result.report.rows_for(s);
        if (rows.empty()) continue;
        print_metrics(out, "final_" + std::string(data::to_string(s)) + "_", rows.back().metrics);
    }
    return kOk;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
    require(c.paths.data, "--data");
    require(c.paths.model, "--model");
    require(c.paths.split, "--split");
    const nn::Checkpoint cp = nn::load_checkpoint(c.paths.model);
    const train::SplitMetrics m = train::evaluate(cp.model, c.paths.data, c.paths.split);
    out << "split=" << c.paths.split << '\n';
    print_metrics(out, "", m);
    return kOk;
}

int cmd_predict(const RunConfig& c, std::ostream& out) {
    require(c.paths.model, "--model");
    require(c.paths.curve, "--curve");
    const nn::Checkpoint cp = nn::load_checkpoint(c.paths.model);
    std::optional<nn::Preprocessing> pre = cp.preprocessing;
    if (!c.paths.data.empty()) pre = train::preprocessing_of(data::read_dataset(c.paths.data).manifest);
    if (!pre) throw DataModelMismatch("checkpoint carries no preprocessing; pass --data");
    const std::vector<double> curve = read_curve(c.paths.curve);
    const double length = train::predict(cp.model, curve, *pre);
    out << "L=" << format_double(length) << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"SPICE Level-3 power-MOSFET inverse modeling: channel length from I_d-V_ds curves",
                 "l3inv"};
    app.require_subcommand(1);
    Flags f;

    auto* gen = app.add_subcommand("generate", "Simulate devices and write a dataset directory");
    gen->add_option("--devices", f.devices, "Number of simulated devices (>= 10)");
    gen->add_option("--seed", f.seed, "Dataset master seed");
    gen->add_option("--out", f.out, "Output dataset directory");
    gen->add_option("--vds-start", f.vds_start, "First V_ds grid point [V]");
    gen->add_option("--vds-stop", f.vds_stop, "Last V_ds grid point [V]");
    gen->add_option("--vds-step", f.vds_step, "V_ds grid step [V]");
    gen->add_option("--vgs-list", f.vgs_list, "Comma-separated gate voltages [V]");
    gen->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
    gen->add_option("--split-granularity", f.granularity, "device or curve");

    auto* trn = app.add_subcommand("train", "Train the MLP on a dataset directory");
    trn->add_option("--data", f.data, "Dataset directory");
    trn->add_option("--out", f.out, "Model checkpoint to write");
    trn->add_option("--report", f.report, "Per-epoch metrics CSV to write");
    trn->add_option("--seed", f.seed, "Training seed (shuffling and initialization)");
    trn->add_option("--epochs", f.epochs, "Epochs");
    trn->add_option("--batch-size", f.batch_size, "Mini-batch size");
    trn->add_option("--lr", f.lr, "Adam learning rate");
    trn->add_option("--hidden", f.hidden, "Comma-separated hidden layer widths");
    trn->add_option("--activation", f.activation, "relu or sigmoid");
    trn->add_option("--sigmoid-k", f.sigmoid_k, "Sigmoid spread constant");
    trn->add_flag("--best-val", f.best_val, "Keep the epoch with the lowest validation MSE");
    trn->add_flag("--wall-clock", f.wall_clock, "Record epoch wall-clock seconds in the report");

    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
    ev->add_option("--data", f.data, "Dataset directory");
    ev->add_option("--model", f.model, "Model checkpoint");
    ev->add_option("--split", f.split, "train, val or test");

    auto* pred = app.add_subcommand("predict", "Predict the channel length of one curve");
    pred->add_option("--model", f.model, "Model checkpoint");
    pred->add_option("--curve", f.curve, "File with comma-separated drain currents [A]");
    pred->add_option("--data", f.data, "Dataset directory supplying normalization (optional)");

    for (auto* sub : {gen, trn, ev, pred})
        sub->add_option("--config", f.config_file, "JSON run configuration");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return kInvalidFlags;
    }

    try {
        for (auto* sub : {gen, trn, ev, pred}) {
            if (!sub->parsed()) continue;
            RunConfig c = resolve(f, *sub);
            if (sub == gen) return cmd_generate(c, out);
            if (sub == trn) return cmd_train(c, out, err);
            if (sub == ev) return cmd_eval(c, out);
            return cmd_predict(c, out);
        }
    } catch (const InvalidConfig& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidFlags;
    } catch (const InvalidRange& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidFlags;
    } catch (const GenerationFailure& e) {
        err << "error: " << e.what() << '\n';
        return kGenerationFailure;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const SchemaMismatch& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const CorruptData& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const ShapeMismatch& e) {
        err << "error: " << e.what() << '\n';
        return kShapeMismatch;
    } catch (const DataModelMismatch& e) {
        err << "error: " << e.what() << '\n';
        return kShapeMismatch;
    } catch (const UnknownSplit& e) {
        err << "error: " << e.what() << '\n';
        return kShapeMismatch;
    } catch (const NumericalFailure& e) {
        err << "error: " << e.what() << '\n';
        return kNumericalFailure;
    }
    return kInvalidFlags;
}

}  // namespace l3inv::cli

#include "l3inv/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "l3inv/errors.hpp"
#include "l3inv/metrics.hpp"
#include "l3inv/number_format.hpp"
#include "l3inv/seeding.hpp"

namespace l3inv::train {

using data::Split;

namespace {

constexpr Split kSplits[] = {Split::train, Split::val, Split::test};
constexpr std::size_t kEvalChunk = 1024;

nn::Matrix gather_features(const data::Dataset& ds, std::span<const std::size_t> idx,
                           std::size_t width) {
    nn::Matrix x(idx.size(), width);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto& f = ds.samples[idx[r]].features;
        std::copy(f.begin(), f.end(), x.row(r).begin());
    }
    return x;
}

std::vector<double> predict_rows(const nn::MlpModel& model, const data::Dataset& ds,
                                 std::span<const std::size_t> idx) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (std::size_t begin = 0; begin < idx.size(); begin += kEvalChunk) {
        const auto chunk = idx.subspan(begin, std::min(kEvalChunk, idx.size() - begin));
        const nn::Matrix y = nn::forward(model, gather_features(ds, chunk, model.input_size()));
        for (std::size_t r = 0; r < y.rows(); ++r) out.push_back(y(r, 0));
    }
    return out;
}

SplitMetrics evaluate_indices(const nn::MlpModel& model, const data::Dataset& ds,
                              std::span<const std::size_t> idx) {
    const std::vector<double> pred = predict_rows(model, ds, idx);
    std::vector<const data::CurveSample*> samples;
    samples.reserve(idx.size());
    for (std::size_t i : idx) samples.push_back(&ds.samples[i]);
    return evaluate_predictions(pred, samples, ds.manifest.target_bounds);
}

bool all_finite(const SplitMetrics& m) {
    return std::isfinite(m.mse) && std::isfinite(m.msle) && std::isfinite(m.mae) &&
           std::isfinite(m.mae_meters) && std::isfinite(m.mape_percent_meters);
}

void check_compatible(const data::Dataset& ds, const nn::MlpConfig& config) {
    config.validate();
    const std::size_t width = ds.manifest.grid.size();
    if (config.layer_sizes.front() != width)
        throw DataModelMismatch("feature width " + std::to_string(width) +
                                " does not match input layer " +
                                std::to_string(config.layer_sizes.front()));
    if (config.layer_sizes.back() != 1)
        throw DataModelMismatch("the model must have a single output unit");
    for (const auto& s : ds.samples)
        if (s.features.size() != width)
            throw DataModelMismatch("sample feature width does not match grid");
}

}  // namespace

std::vector<EpochRow> TrainReport::rows_for(Split split) const {
    std::vector<EpochRow> out;
    for (const auto& r : rows)
        if (r.split == split) out.push_back(r);
    return out;
}

SplitMetrics evaluate_predictions(std::span<const double> predictions,
                                  std::span<const data::CurveSample* const> samples,
                                  const data::TargetBounds& bounds) {
    if (predictions.size() != samples.size())
        throw ShapeMismatch("prediction count does not match sample count");
    std::vector<double> targets(samples.size());
    std::vector<double> lengths(samples.size());
    std::vector<double> predicted_lengths(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        targets[i] = samples[i]->label_normalized;
        lengths[i] = samples[i]->label_length;
        predicted_lengths[i] = bounds.denormalize(predictions[i]);
    }
    const nn::MetricSuite normalized = nn::metric_suite(predictions, targets, false);
    const nn::MetricSuite meters = nn::metric_suite(predicted_lengths, lengths, true);
    return {normalized.mse, normalized.msle, normalized.mae, meters.mae, *meters.mape_percent};
}

SplitMetrics evaluate(const nn::MlpModel& model, const data::Dataset& dataset, Split split) {
    const auto idx = dataset.indices(split);
    if (idx.empty())
        throw UnknownSplit("split '" + std::string(data::to_string(split)) + "' has no samples");
    if (model.input_size() != dataset.manifest.grid.size())
        throw DataModelMismatch("model input width does not match dataset grid");
    return evaluate_indices(model, dataset, idx);
}

SplitMetrics evaluate(const nn::MlpModel& model, const std::filesystem::path& dataset_dir,
                      std::string_view split) {
    const Split s = data::split_from_string(split);
    return evaluate(model, data::read_dataset(dataset_dir), s);
}

TrainResult train(const data::Dataset& dataset, const nn::MlpConfig& config,
                  std::uint64_t train_seed, const TrainOptions& options) {
    check_compatible(dataset, config);
    TrainResult result{nn::init_model(config), {}};
    TrainReport& report = result.report;
    report.train_seed = train_seed;
    report.init_seed = config.init_seed;
    report.dataset_seed = dataset.manifest.master_seed;

    const std::vector<std::size_t> train_idx = dataset.indices(Split::train);
    if (config.epochs > 0 && train_idx.empty())
        throw DataModelMismatch("training split is empty");
    std::vector<std::vector<std::size_t>> eval_idx;
    for (Split s : kSplits) eval_idx.push_back(dataset.indices(s));

    nn::MlpModel& model = result.model;
    nn::AdamState adam = nn::make_adam_state(model);
    nn::ForwardCache cache;
    const std::size_t width = model.input_size();

    nn::MlpModel best_model = model;
    double best_val = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> order = train_idx;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        Rng rng(derive_seed(train_seed, streams::kShuffle, epoch));
        rng.shuffle(std::span<std::size_t>(order));

        std::size_t batch_no = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_no) {
            const auto batch = std::span<const std::size_t>(order).subspan(
                begin, std::min(config.batch_size, order.size() - begin));
            const nn::Matrix x = gather_features(dataset, batch, width);
            nn::Matrix t(batch.size(), 1);
            for (std::size_t r = 0; r < batch.size(); ++r)
                t(r, 0) = dataset.samples[batch[r]].label_normalized;

            const nn::Matrix y = nn::forward(model, x, cache);
            const double loss = nn::mse_loss(y, t);
            if (!std::isfinite(loss))
                throw NumericalFailure("non-finite loss at epoch " + std::to_string(epoch) +
                                       ", batch " + std::to_string(batch_no));
            const nn::Gradients grads = nn::backward(model, cache, x, t);
            nn::adam_step(model, grads, adam, config.learning_rate);
        }

        std::vector<EpochRow> rows;
        for (std::size_t k = 0; k < 3; ++k) {
            if (eval_idx[k].empty()) continue;
            EpochRow row{epoch, kSplits[k], evaluate_indices(model, dataset, eval_idx[k]), 0.0};
            if (!all_finite(row.metrics))
                throw NumericalFailure("non-finite metrics after epoch " + std::to_string(epoch));
            rows.push_back(row);
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        for (auto& row : rows) {
            row.seconds = seconds;
            if (row.split == Split::val && row.metrics.mse < best_val) {
                best_val = row.metrics.mse;
                best_model = model;
                if (options.select_best_val) report.selected_epoch = epoch;
            }
            report.rows.push_back(row);
            if (options.on_row) options.on_row(row);
        }
        if (!options.select_best_val) report.selected_epoch = epoch;
    }
    if (options.select_best_val && report.selected_epoch > 0) model = best_model;
    return result;
}

TrainResult train(const std::filesystem::path& dataset_dir, const nn::MlpConfig& config,
                  std::uint64_t train_seed, const TrainOptions& options) {
    return train(data::read_dataset(dataset_dir), config, train_seed, options);
}

nn::Preprocessing preprocessing_of(const data::DatasetManifest& manifest) {
    return {manifest.normalization, manifest.target_bounds};
}

double predict(const nn::MlpModel& model, std::span<const double> raw_curve,
               const nn::Preprocessing& preprocessing) {
    if (raw_curve.size() != model.input_size())
        throw ShapeMismatch("curve has " + std::to_string(raw_curve.size()) +
                            " points, model expects " + std::to_string(model.input_size()));
    const auto features = data::normalize_features(raw_curve, preprocessing.normalization);
    nn::Matrix x(1, features.size());
    std::copy(features.begin(), features.end(), x.row(0).begin());
    const nn::Matrix y = nn::forward(model, x);
    return preprocessing.target_bounds.denormalize(y(0, 0));
}

std::string report_csv(const TrainReport& report, bool wall_clock) {
    std::string out = "epoch,split,mse,msle,mae,mae_meters,mape_percent_meters,seconds\n";
    for (const auto& r : report.rows) {
        out += std::to_string(r.epoch);
        out += ',';
        out += data::to_string(r.split);
        for (double v : {r.metrics.mse, r.metrics.msle, r.metrics.mae, r.metrics.mae_meters,
                         r.metrics.mape_percent_meters, wall_clock ? r.seconds : 0.0}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

void write_report(const TrainReport& report, const std::filesystem::path& path, bool wall_clock) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write report " + path.string());
    out << report_csv(report, wall_clock);
    if (!out) throw IoError("write failed for report " + path.string());
}

}  // namespace l3inv::train

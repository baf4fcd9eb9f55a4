#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "l3inv/dataset.hpp"
#include "l3inv/errors.hpp"
#include "l3inv/trainer.hpp"
#include "test_support.hpp"

using namespace l3inv;
using namespace l3inv::train;
using data::Split;
using l3inv::testing::TempDir;

namespace {

const data::Dataset& shared_dataset() {
    static const data::Dataset ds = data::build_dataset(
        20, data::ParameterRanges{}, VdsGrid{}, device::default_vgs_list(), 314);
    return ds;
}

nn::MlpConfig quick_config(std::size_t epochs = 3) {
    nn::MlpConfig c;
    c.layer_sizes = {100, 16, 8, 1};
    c.epochs = epochs;
    c.learning_rate = 1e-3;
    return c;
}

// Output is the constant `y` regardless of the curve.
nn::MlpModel constant_model(double y) {
    nn::MlpModel m = nn::init_model(quick_config());
    auto& last = m.layers.back();
    std::fill(last.weights.data().begin(), last.weights.data().end(), 0.0);
    last.bias[0] = y;
    return m;
}

}  // namespace

TEST(Train, ZeroEpochsLeavesInitialWeights) {
    nn::MlpConfig c = quick_config(0);
    c.init_seed = 77;
    const TrainResult r = train::train(shared_dataset(), c, 77);
    EXPECT_TRUE(r.report.rows.empty());
    EXPECT_EQ(r.report.selected_epoch, 0u);
    EXPECT_EQ(r.model, nn::init_model(c));
}

TEST(Train, OneRowPerEpochAndSplit) {
    const TrainResult r = train::train(shared_dataset(), quick_config(4), 1);
    EXPECT_EQ(r.report.rows.size(), 12u);
    for (Split s : {Split::train, Split::val, Split::test}) {
        const auto rows = r.report.rows_for(s);
        ASSERT_EQ(rows.size(), 4u);
        for (std::size_t e = 0; e < 4; ++e) EXPECT_EQ(rows[e].epoch, e + 1);
    }
    EXPECT_EQ(r.report.selected_epoch, 4u);
    EXPECT_EQ(r.report.dataset_seed, 314u);
    EXPECT_EQ(r.report.train_seed, 1u);
}

TEST(Train, EmptySplitsAreSkipped) {
    data::BuildOptions opts;
    opts.fractions = {1.0, 0.0, 0.0};
    const auto ds = data::build_dataset(10, data::ParameterRanges{}, VdsGrid{},
                                        device::default_vgs_list(), 2, opts);
    const TrainResult r = train::train(ds, quick_config(2), 1);
    EXPECT_EQ(r.report.rows.size(), 2u);
    EXPECT_THROW((void)evaluate(r.model, ds, Split::test), UnknownSplit);
}

TEST(Train, DeterministicForFixedSeeds) {
    const TrainResult a = train::train(shared_dataset(), quick_config(), 5);
    const TrainResult b = train::train(shared_dataset(), quick_config(), 5);
    EXPECT_EQ(a.model, b.model);
    EXPECT_EQ(report_csv(a.report), report_csv(b.report));
    const TrainResult c = train::train(shared_dataset(), quick_config(), 6);
    EXPECT_NE(a.model, c.model);
}

TEST(Train, EvaluateMatchesFinalReportRow) {
    const TrainResult r = train::train(shared_dataset(), quick_config(), 9);
    for (Split s : {Split::train, Split::val, Split::test})
        EXPECT_EQ(evaluate(r.model, shared_dataset(), s), r.report.rows_for(s).back().metrics);
}

TEST(Train, HeldOutDataDoesNotInfluenceWeights) {
    data::Dataset altered = shared_dataset();
    for (std::size_t i = 0; i < altered.samples.size(); ++i) {
        if (altered.split_of(i) == Split::train) continue;
        for (double& f : altered.samples[i].features) f = -f + 3.0;
        altered.samples[i].label_normalized = 1.0 - altered.samples[i].label_normalized;
    }
    EXPECT_EQ(train::train(shared_dataset(), quick_config(), 4).model, train::train(altered, quick_config(), 4).model);
}

TEST(Train, ReducesTrainingLoss) {
    const TrainResult r = train::train(shared_dataset(), quick_config(30), 2);
    const auto rows = r.report.rows_for(Split::train);
    EXPECT_LT(rows.back().metrics.mse, rows.front().metrics.mse);
}

TEST(Train, BestValidationSelection) {
    TrainOptions opts;
    opts.select_best_val = true;
    const TrainResult r = train::train(shared_dataset(), quick_config(8), 3, opts);
    const auto val = r.report.rows_for(Split::val);
    std::size_t best = 0;
    for (std::size_t e = 1; e < val.size(); ++e)
        if (val[e].metrics.mse < val[best].metrics.mse) best = e;
    EXPECT_EQ(r.report.selected_epoch, best + 1);
    EXPECT_EQ(evaluate(r.model, shared_dataset(), Split::val), val[best].metrics);
}

TEST(Train, InputWidthMismatch) {
    nn::MlpConfig c = quick_config();
    c.layer_sizes.front() = 99;
    EXPECT_THROW((void)train::train(shared_dataset(), c, 1), DataModelMismatch);
}

TEST(Train, RowCallbackSeesEveryRow) {
    std::size_t calls = 0;
    TrainOptions opts;
    opts.on_row = [&](const EpochRow&) { ++calls; };
    const TrainResult r = train::train(shared_dataset(), quick_config(2), 1, opts);
    EXPECT_EQ(calls, r.report.rows.size());
}

TEST(EvaluatePredictions, OracleGivesZeroError) {
    const auto& ds = shared_dataset();
    std::vector<const data::CurveSample*> samples;
    std::vector<double> preds;
    for (std::size_t i : ds.indices(Split::test)) {
        samples.push_back(&ds.samples[i]);
        preds.push_back(ds.samples[i].label_normalized);
    }
    const SplitMetrics m = evaluate_predictions(preds, samples, ds.manifest.target_bounds);
    EXPECT_EQ(m.mse, 0.0);
    EXPECT_EQ(m.mae, 0.0);
    EXPECT_EQ(m.msle, 0.0);
    EXPECT_LE(m.mae_meters, 1e-20);
    EXPECT_LE(m.mape_percent_meters, 1e-10);
}

TEST(EvaluatePredictions, MeterSpaceErrors) {
    const auto& ds = shared_dataset();
    const auto& bounds = ds.manifest.target_bounds;
    const data::CurveSample& s = ds.samples.front();
    const data::CurveSample* ptr = &s;
    const double off = bounds.normalize(s.label_length * 1.5);
    const std::vector<double> preds = {off};
    const SplitMetrics m = evaluate_predictions(preds, std::span(&ptr, 1), bounds);
    EXPECT_NEAR(m.mape_percent_meters, 50.0, 1e-9);
    EXPECT_NEAR(m.mae_meters, 0.5 * s.label_length, 1e-9 * s.label_length);
}

TEST(TargetBounds, DenormalizeInvertsNormalize) {
    const data::TargetBounds b{1e-7, 5e-6};
    for (double l : {1e-7, 2.3e-7, 1e-6, 4.99e-6, 5e-6})
        EXPECT_NEAR(b.denormalize(b.normalize(l)), l, 1e-9 * l);
    EXPECT_EQ(b.normalize(1e-7), 0.0);
    EXPECT_EQ(b.normalize(5e-6), 1.0);
}

TEST(Predict, Endpoints) {
    const auto& ds = shared_dataset();
    const nn::Preprocessing pre = preprocessing_of(ds.manifest);
    const auto& curve = ds.samples.front().raw_currents;
    EXPECT_NEAR(predict(constant_model(0.0), curve, pre), 1e-7, 1e-19);
    EXPECT_NEAR(predict(constant_model(1.0), curve, pre), 5e-6, 5e-18);
}

TEST(Predict, AgreesWithForwardOnStoredFeatures) {
    const auto& ds = shared_dataset();
    const TrainResult r = train::train(ds, quick_config(), 3);
    const auto& s = ds.samples[5];
    nn::Matrix x(1, 100);
    std::copy(s.features.begin(), s.features.end(), x.row(0).begin());
    const double y = nn::forward(r.model, x)(0, 0);
    const double l = predict(r.model, s.raw_currents, preprocessing_of(ds.manifest));
    EXPECT_NEAR(l, ds.manifest.target_bounds.denormalize(y), 1e-12 * l);
}

TEST(Predict, WrongCurveLength) {
    const auto& ds = shared_dataset();
    const std::vector<double> curve(99, 1.0);
    EXPECT_THROW((void)predict(constant_model(0.5), curve, preprocessing_of(ds.manifest)),
                 ShapeMismatch);
}

TEST(Report, CsvLayout) {
    const TrainResult r = train::train(shared_dataset(), quick_config(1), 1);
    std::istringstream in(report_csv(r.report));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "epoch,split,mse,msle,mae,mae_meters,mape_percent_meters,seconds");
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0].rfind("1,train,", 0), 0u);
    EXPECT_EQ(lines[0].substr(lines[0].size() - 2), ",0");
}

TEST(Train, FromDirectoryMatchesInMemory) {
    TempDir dir("trainer");
    data::write_dataset(shared_dataset(), dir.path());
    EXPECT_EQ(train::train(dir.path(), quick_config(), 8).model, train::train(shared_dataset(), quick_config(), 8).model);
    EXPECT_THROW((void)evaluate(constant_model(0.5), dir.path(), "holdout"), UnknownSplit);
}

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "l3inv/errors.hpp"
#include "l3inv/metrics.hpp"

using namespace l3inv;
using l3inv::nn::metric_suite;

TEST(MetricSuite, AbsoluteAndPercentErrors) {
    const std::vector<double> p = {2.0, 2.0}, t = {1.0, 1.0};
    const auto m = metric_suite(p, t);
    EXPECT_EQ(m.mae, 1.0);
    EXPECT_EQ(m.mse, 1.0);
    ASSERT_TRUE(m.mape_percent);
    EXPECT_EQ(*m.mape_percent, 100.0);
}

TEST(MetricSuite, MsleUsesNaturalLog) {
    const std::vector<double> p = {std::exp(1.0) - 1.0}, t = {0.0};
    const auto m = metric_suite(p, t, false);
    EXPECT_NEAR(m.msle, 1.0, 1e-15);
    EXPECT_FALSE(m.mape_percent);
}

TEST(MetricSuite, MsleClampsNegativePredictions) {
    const std::vector<double> p = {-5.0}, t = {0.0};
    EXPECT_EQ(metric_suite(p, t, false).msle, 0.0);
}

TEST(MetricSuite, PerfectPredictions) {
    const std::vector<double> v = {1e-7, 3e-7, 5e-6};
    const auto m = metric_suite(v, v);
    EXPECT_EQ(m.mse, 0.0);
    EXPECT_EQ(m.msle, 0.0);
    EXPECT_EQ(m.mae, 0.0);
    EXPECT_EQ(*m.mape_percent, 0.0);
}

TEST(MetricSuite, ZeroTargetWithPercentError) {
    const std::vector<double> p = {1.0, 2.0}, t = {1.0, 0.0};
    EXPECT_THROW((void)metric_suite(p, t), DegenerateTarget);
    EXPECT_NO_THROW((void)metric_suite(p, t, false));
}

TEST(MetricSuite, LengthMismatch) {
    const std::vector<double> p = {1.0, 2.0}, t = {1.0};
    EXPECT_THROW((void)metric_suite(p, t), ShapeMismatch);
}

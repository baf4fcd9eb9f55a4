#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "l3inv/errors.hpp"
#include "l3inv/level3_model.hpp"
#include "test_support.hpp"

using namespace l3inv::device;
using l3inv::VdsGrid;
using l3inv::testing::oracle_terminal_ids;
using l3inv::testing::random_device;
using l3inv::testing::rel_diff;

namespace {

// KP = 2e-5, W = 1, L = 1e-6 -> beta = 20 A/V^2; V_t = 3; no body effect or degradation.
DeviceParams reference_device() {
    DeviceParams p;
    p.transconductance = 2e-5;
    p.channel_width = 1.0;
    p.channel_length = 1e-6;
    p.threshold_voltage = 3.0;
    p.body_threshold = 0.0;
    p.mobility_degradation = 0.0;
    p.drain_resistance = 0.0;
    p.source_resistance = 0.0;
    return p;
}

}  // namespace

TEST(BodyFactor, ZeroGammaGivesZero) {
    DeviceParams p;
    p.body_threshold = 0.0;
    p.surface_potential = 0.6;
    EXPECT_EQ(body_factor(p), 0.0);
    p.surface_potential = 0.0;
    EXPECT_EQ(body_factor(p), 0.0);
}

TEST(BodyFactor, HandValues) {
    DeviceParams p;
    p.body_threshold = 1.0;
    p.surface_potential = 0.6;
    EXPECT_NEAR(body_factor(p), 0.32274861218395140710, 1e-15);
    p.body_threshold = 2.0;
    p.surface_potential = 1.0;
    EXPECT_DOUBLE_EQ(body_factor(p), 0.5);
}

TEST(BodyFactor, ClampsVanishingSurfacePotential) {
    DeviceParams p;
    p.body_threshold = 1.0;
    p.surface_potential = 0.0;
    EXPECT_DOUBLE_EQ(body_factor(p), 1.0 / (4.0 * std::sqrt(kMinSurfacePotential)));
    EXPECT_TRUE(std::isfinite(body_factor(p)));
}

TEST(EffectiveParams, ReferenceDevice) {
    const auto e = effective_params(reference_device(), 5.0);
    EXPECT_NEAR(e.beta, 20.0, 1e-12);
    EXPECT_DOUBLE_EQ(e.v_dssat, 2.0);
    EXPECT_EQ(e.body_factor, 0.0);
}

TEST(EffectiveParams, ZeroThetaKeepsKp) {
    DeviceParams p = reference_device();
    for (double vgs : {0.0, 3.0, 4.5, 12.0}) EXPECT_EQ(effective_params(p, vgs).kp_eff, 2e-5);
}

TEST(EffectiveParams, ThetaDegradesKp) {
    DeviceParams p = reference_device();
    p.mobility_degradation = 1.0;
    const auto e = effective_params(p, 4.0);
    EXPECT_DOUBLE_EQ(e.kp_eff, 1e-5);
    EXPECT_LE(e.kp_eff, p.transconductance);
    EXPECT_DOUBLE_EQ(e.beta, e.kp_eff * p.channel_width / p.channel_length);
}

TEST(IntrinsicIds, CutoffIsZero) {
    const DeviceParams p = reference_device();
    for (double vds : {0.0, 0.5, 10.0, 100.0}) EXPECT_EQ(intrinsic_ids(p, 2.0, vds), 0.0);
    EXPECT_EQ(intrinsic_ids(p, 3.0, 5.0), 0.0);
}

TEST(IntrinsicIds, SaturationBranch) {
    EXPECT_NEAR(intrinsic_ids(reference_device(), 5.0, 10.0), 40.0, 1e-11);
}

TEST(IntrinsicIds, LinearBranch) {
    EXPECT_NEAR(intrinsic_ids(reference_device(), 5.0, 1.0), 30.0, 1e-11);
}

TEST(IntrinsicIds, BranchesMeetAtSaturationVoltage) {
    const DeviceParams p = reference_device();
    const double at_knee = intrinsic_ids(p, 5.0, 2.0);
    const double beyond = intrinsic_ids(p, 5.0, std::nextafter(2.0, 3.0));
    EXPECT_NEAR(at_knee, 40.0, 1e-11);
    EXPECT_NEAR(beyond, 40.0, 1e-11);
}

TEST(IntrinsicIds, BranchContinuityOnRandomDevices) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> vgs(1.0, 12.0);
    for (int n = 0; n < 2000; ++n) {
        const DeviceParams p = random_device(gen);
        const double v = vgs(gen);
        if (v <= p.threshold_voltage) continue;
        const auto e = effective_params(p, v);
        const double u = v - p.threshold_voltage;
        const double fb1 = 1.0 + e.body_factor;
        const double linear = e.beta * (u * e.v_dssat - fb1 * e.v_dssat * e.v_dssat / 2.0);
        const double saturation = e.beta / (2.0 * fb1) * u * u;
        EXPECT_LE(std::abs(linear - saturation), 1e-9 * std::max(1e-30, saturation));
    }
}

TEST(TerminalIds, ZeroResistanceMatchesIntrinsicBitwise) {
    std::mt19937_64 gen(3);
    for (int n = 0; n < 200; ++n) {
        DeviceParams p = random_device(gen);
        p.drain_resistance = 0.0;
        p.source_resistance = 0.0;
        for (double vds : {0.0, 0.3, 2.0, 9.9})
            EXPECT_EQ(terminal_ids(p, {10.0, vds}), intrinsic_ids(p, 10.0, vds));
    }
}

TEST(TerminalIds, CutoffIsZeroWithAnyResistance) {
    DeviceParams p = reference_device();
    p.drain_resistance = 1e-2;
    p.source_resistance = 5e-3;
    EXPECT_EQ(terminal_ids(p, {2.5, 10.0}), 0.0);
}

TEST(TerminalIds, ReferenceDeviceWithSeriesResistance) {
    DeviceParams p = reference_device();
    p.drain_resistance = 1e-2;
    p.source_resistance = 1e-2;
    const double i = terminal_ids(p, {5.0, 10.0});
    // Closed form of 10 (2 - 0.01 I)^2 = I, smaller root (saturation holds).
    EXPECT_LE(rel_diff(i, 29.179606750063091077), 1e-12);
    EXPECT_LE(rel_diff(i, oracle_terminal_ids(p, {5.0, 10.0})), 1e-12);
}

TEST(TerminalIds, AgreesWithBisectionOracle) {
    std::mt19937_64 gen(29);
    std::uniform_real_distribution<double> vgs(1.0, 12.0), vds(0.0, 10.0);
    for (int n = 0; n < 1000; ++n) {
        const DeviceParams p = random_device(gen);
        const BiasPoint b{vgs(gen), vds(gen)};
        const double got = terminal_ids(p, b);
        const double want = oracle_terminal_ids(p, b);
        if (want == 0.0)
            EXPECT_EQ(got, 0.0);
        else
            EXPECT_LE(rel_diff(got, want), 1e-10) << "instance " << n;
    }
}

// At the top of the sampled ranges (beta ~ 1e9 A/V^2) even a femto-ohm moves the current
// by far more than 1e-9, so the limit is checked where the first-order shift
// I * R * dln(I)/dV is itself negligible.
TEST(TerminalIds, VanishingResistanceLimit) {
    std::mt19937_64 gen(5);
    int checked = 0;
    for (int n = 0; n < 300; ++n) {
        DeviceParams p = random_device(gen);
        p.drain_resistance = 1e-15;
        p.source_resistance = 1e-15;
        const double u = 12.0 - p.threshold_voltage;
        for (double vds : {0.1, 1.0, 10.0}) {
            const double b = intrinsic_ids(p, 12.0, vds);
            const double shift = b * 3e-15 * (2.0 / u + 2.0 / vds);
            if (shift > 1e-10) continue;
            ++checked;
            EXPECT_LE(rel_diff(terminal_ids(p, {12.0, vds}), b), 1e-9);
        }
    }
    EXPECT_GT(checked, 450);
}

TEST(TerminalIds, VanishingResistanceLimitReferenceDevice) {
    DeviceParams p = reference_device();
    p.drain_resistance = 1e-15;
    p.source_resistance = 1e-15;
    for (double vds : {0.1, 1.0, 2.0, 10.0})
        EXPECT_LE(rel_diff(terminal_ids(p, {5.0, vds}), intrinsic_ids(p, 5.0, vds)), 1e-9);
}

TEST(TerminalIds, ResidualIsSmallWhenFixedPointConverges) {
    DeviceParams p = reference_device();
    p.drain_resistance = 1e-4;
    p.source_resistance = 1e-4;
    const BiasPoint b{6.0, 4.0};
    const double i = terminal_ids(p, b);
    const double f = intrinsic_ids(p, b.v_gs - i * 1e-4, std::max(0.0, b.v_ds - i * 2e-4));
    EXPECT_LE(std::abs(i - f), kSeriesRelTolerance * std::max(1.0, i));
}

TEST(VdsGridTest, DefaultHasHundredPoints) {
    VdsGrid g;
    EXPECT_EQ(g.size(), 100u);
    EXPECT_DOUBLE_EQ(g.at(0), 0.1);
    EXPECT_NEAR(g.at(99), 10.0, 1e-12);
}

TEST(VdsGridTest, RejectsBadGrids) {
    EXPECT_THROW((VdsGrid{0.0, 1.0, 0.0}.validate()), l3inv::InvalidRange);
    EXPECT_THROW((VdsGrid{1.0, 1.0, 0.1}.validate()), l3inv::InvalidRange);
    EXPECT_NO_THROW((VdsGrid{0.0, 10.0, 1.0}.validate()));
    EXPECT_EQ((VdsGrid{0.0, 10.0, 1.0}.size()), 11u);
}

TEST(TransferCurve, CutoffDeviceIsAllZero) {
    const auto curve = transfer_curve(reference_device(), 2.0, VdsGrid{});
    ASSERT_EQ(curve.size(), 100u);
    for (double i : curve) EXPECT_EQ(i, 0.0);
}

TEST(TransferCurve, MonotoneAndNonnegative) {
    std::mt19937_64 gen(17);
    const VdsGrid grid;
    for (int n = 0; n < 300; ++n) {
        const DeviceParams p = random_device(gen);
        for (double vgs : {4.0, 8.5, 12.0}) {
            const auto c = transfer_curve(p, vgs, grid);
            ASSERT_EQ(c.size(), grid.size());
            for (std::size_t i = 0; i < c.size(); ++i) {
                EXPECT_GE(c[i], 0.0);
                if (i > 0) EXPECT_GE(c[i], c[i - 1]) << "device " << n << " vgs " << vgs;
            }
        }
    }
}

TEST(CurveSet, DefaultListGivesTwelveOrderedCurves) {
    std::mt19937_64 gen(23);
    const VdsGrid grid;
    const auto vgs = default_vgs_list();
    ASSERT_EQ(vgs.size(), 12u);
    EXPECT_EQ(vgs.front(), 1.0);
    EXPECT_EQ(vgs.back(), 12.0);
    for (int n = 0; n < 100; ++n) {
        const DeviceParams p = random_device(gen);
        const auto curves = curve_set(p, vgs, grid);
        ASSERT_EQ(curves.size(), 12u);
        for (std::size_t k = 1; k < curves.size(); ++k)
            for (std::size_t i = 0; i < grid.size(); ++i)
                EXPECT_GE(curves[k][i], curves[k - 1][i]);
    }
}

TEST(CurveSet, SingletonList) {
    const double vgs[] = {5.0};
    const auto curves = curve_set(reference_device(), vgs, VdsGrid{});
    ASSERT_EQ(curves.size(), 1u);
    EXPECT_EQ(curves[0], transfer_curve(reference_device(), 5.0, VdsGrid{}));
}

TEST(GeometryScaling, DoublingBothIsBitwise) {
    std::mt19937_64 gen(41);
    for (int n = 0; n < 500; ++n) {
        DeviceParams p = random_device(gen);
        DeviceParams q = p;
        q.channel_width *= 2.0;
        q.channel_length *= 2.0;
        for (double vds : {0.2, 3.0, 10.0}) EXPECT_EQ(intrinsic_ids(p, 11.0, vds), intrinsic_ids(q, 11.0, vds));
    }
}

TEST(GeometryScaling, CurrentIsLinearInWidth) {
    std::mt19937_64 gen(43);
    for (int n = 0; n < 500; ++n) {
        DeviceParams p = random_device(gen);
        DeviceParams q = p;
        q.channel_width *= 2.0;
        for (double vds : {0.2, 3.0, 10.0}) {
            const double a = intrinsic_ids(p, 11.0, vds);
            EXPECT_LE(rel_diff(intrinsic_ids(q, 11.0, vds), 2.0 * a), 1e-12);
        }
    }
}

TEST(DeviceParamsTest, DefaultsArePhysical) {
    EXPECT_TRUE(is_physical(DeviceParams{}));
    DeviceParams p;
    p.channel_length = 0.0;
    EXPECT_FALSE(is_physical(p));
}

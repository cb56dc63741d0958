#include "bosim/autodiff.hpp"
#include "bosim/error.hpp"
#include "bosim/props.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace bosim;

namespace {

// Quadratic water-oil curves with s_wc = s_or = 0.2 sampled every 0.05.
RelPermTable quadratic_table()
{
    std::vector<WaterOilRow> rows;
    for (int k = 0; k <= 12; ++k) {
        const double s = k / 12.0;
        const double sw = 0.2 + 0.6 * s;
        rows.push_back({sw, s * s, (1.0 - s) * (1.0 - s), 0.0});
    }
    return RelPermTable(rows);
}

PvtTable simple_pvt(double cw = 0.0)
{
    const std::vector<OilPvtRow> oil{{1e6, 1.10, 1.2e-3, 20.0}, {2e7, 1.30, 0.8e-3, 100.0}, {4e7, 1.40, 0.7e-3, 150.0}};
    const std::vector<GasPvtRow> gas{{1e6, 0.1, 1.2e-5}, {2e7, 0.006, 2e-5}, {4e7, 0.004, 2.5e-5}};
    WaterPvt w;
    w.p_ref = 1e7;
    w.bw_ref = 1.02;
    w.cw = cw;
    w.muw = 0.5e-3;
    return PvtTable(oil, -2e-10, 1e-11, w, gas, SurfaceDensities{850.0, 1020.0, 0.9});
}

} // namespace

TEST(WaterOil, ConnateEndpoint)
{
    const auto r = eval_water_oil(quadratic_table(), 0.2);
    EXPECT_DOUBLE_EQ(r.krw, 0.0);
    EXPECT_DOUBLE_EQ(r.krow, 1.0);
}

TEST(WaterOil, ResidualOilEndpoint)
{
    const auto r = eval_water_oil(quadratic_table(), 0.8);
    EXPECT_NEAR(r.krw, 1.0, 1e-15);
    EXPECT_NEAR(r.krow, 0.0, 1e-15);
}

TEST(WaterOil, MidpointHandOracle)
{
    const auto r = eval_water_oil(quadratic_table(), 0.5);
    EXPECT_NEAR(r.krw, 0.25, 1e-15);
    EXPECT_NEAR(r.krow, 0.25, 1e-15);
}

TEST(WaterOil, ClampsOutsideTable)
{
    const RelPermTable t = quadratic_table();
    EXPECT_DOUBLE_EQ(eval_water_oil(t, 0.0).krw, 0.0);
    EXPECT_NEAR(eval_water_oil(t, 1.0).krw, 1.0, 1e-15);
}

TEST(WaterOil, MonotoneAndBoundedInterpolant)
{
    const RelPermTable t = quadratic_table();
    double prev_w = -1.0, prev_o = 2.0;
    for (int k = 0; k <= 1000; ++k) {
        const auto r = eval_water_oil(t, k / 1000.0);
        EXPECT_GE(r.krw, prev_w);
        EXPECT_LE(r.krow, prev_o);
        EXPECT_GE(r.krw, 0.0);
        EXPECT_LE(r.krw, 1.0);
        prev_w = r.krw;
        prev_o = r.krow;
    }
}

TEST(WaterOil, NodesRoundTrip)
{
    const RelPermTable t = quadratic_table();
    for (std::size_t k = 0; k < t.sw().size(); ++k) {
        const auto r = eval_water_oil(t, t.sw()[k]);
        EXPECT_DOUBLE_EQ(r.krw, t.krw()[k]);
        EXPECT_DOUBLE_EQ(r.krow, t.krow()[k]);
    }
}

TEST(RelPermTable, RejectsNonIncreasingSaturation)
{
    const std::vector<WaterOilRow> rows{{0.2, 0.0, 1.0, 0.0}, {0.2, 0.5, 0.5, 0.0}};
    EXPECT_THROW(RelPermTable{rows}, ConfigError);
}

TEST(Stone2, EndpointConsistency)
{
    const double krocw = 0.8;
    EXPECT_DOUBLE_EQ(stone2_kro(0.0, krocw, 0.0, krocw, krocw), krocw);
}

TEST(Stone2, FullWaterGivesZero)
{
    EXPECT_DOUBLE_EQ(stone2_kro(1.0, 0.0, 0.0, 0.7, 0.7), 0.0);
}

TEST(Stone2, NegativeBracketClampsToZero)
{
    EXPECT_DOUBLE_EQ(stone2_kro(0.5, 0.05, 0.5, 0.05, 1.0), 0.0);
}

TEST(Stone2, TwoPhaseLimits)
{
    const double krocw = 0.9;
    // S_g = 0: krg = 0, krog = krocw -> K_row
    for (double krw : {0.0, 0.1, 0.3})
        for (double krow : {0.2, 0.5, 0.9})
            EXPECT_NEAR(stone2_kro(krw, krow, 0.0, krocw, krocw), krow, 1e-15);
    // S_w = S_wc: krw = 0, krow = krocw -> K_rog
    for (double krg : {0.0, 0.2})
        for (double krog : {0.1, 0.6})
            EXPECT_NEAR(stone2_kro(0.0, krocw, krg, krog, krocw), krog, 1e-15);
}

TEST(Stone2, RejectsNonPositiveKrocw)
{
    EXPECT_THROW(stone2_kro(0.0, 0.0, 0.0, 0.0, 0.0), ConfigError);
}

TEST(Stone2, DerivativeMatchesFiniteDifference)
{
    using E = Eval<1>;
    const double h = 1e-7;
    const E krw = E::variable(0.3, 0);
    const E r = stone2_kro<E>(krw, E(0.5), E(0.1), E(0.6), 0.9);
    const double fd = (stone2_kro(0.3 + h, 0.5, 0.1, 0.6, 0.9) - stone2_kro(0.3 - h, 0.5, 0.1, 0.6, 0.9)) / (2 * h);
    EXPECT_NEAR(r.d[0], fd, 1e-7);
}

TEST(PvtOil, NodeValuesSaturated)
{
    const PvtTable pvt = simple_pvt();
    const auto r = eval_pvt_oil(pvt, 2e7, 2e7);
    EXPECT_DOUBLE_EQ(r.b, 1.30);
    EXPECT_DOUBLE_EQ(r.mu, 0.8e-3);
    EXPECT_DOUBLE_EQ(r.rs, 100.0);
    EXPECT_DOUBLE_EQ(r.rho, (850.0 + 100.0 * 0.9) / 1.30);
}

TEST(PvtOil, MidpointIsArithmeticMean)
{
    const PvtTable pvt = simple_pvt();
    const double p = 0.5 * (2e7 + 4e7);
    const auto r = eval_pvt_oil(pvt, p, p);
    EXPECT_NEAR(r.b, 1.35, 1e-14);
    EXPECT_NEAR(r.rs, 125.0, 1e-12);
    EXPECT_NEAR(r.mu, 0.75e-3, 1e-18);
}

TEST(PvtOil, UndersaturatedFreezesRs)
{
    const PvtTable pvt = simple_pvt();
    const auto r = eval_pvt_oil(pvt, 2e7 + 5e6, 2e7);
    EXPECT_DOUBLE_EQ(r.rs, 100.0);
    EXPECT_NEAR(r.b, 1.30 - 2e-10 * 5e6, 1e-14);
    EXPECT_NEAR(r.mu, 0.8e-3 + 1e-11 * 5e6, 1e-18);
}

TEST(PvtOil, DensityIncreasesWithRs)
{
    const PvtTable pvt = simple_pvt();
    double prev = 0.0;
    for (double p = 1e6; p <= 4e7; p += 1e6) {
        const auto r = eval_pvt_oil(pvt, p, p);
        EXPECT_GT(r.rho, 0.0);
        const double rho_at_same_b = (850.0 + r.rs * 0.9) / 1.0;
        EXPECT_GE(rho_at_same_b, prev);
        prev = rho_at_same_b;
    }
}

TEST(PvtOil, BelowTableIsOutOfRange)
{
    const PvtTable pvt = simple_pvt();
    EXPECT_THROW(eval_pvt_oil(pvt, 5e5, 5e5), OutOfRange);
}

TEST(PvtWater, IncompressibleLimit)
{
    const PvtTable pvt = simple_pvt(0.0);
    for (double p : {1e6, 1e7, 3e7})
        EXPECT_DOUBLE_EQ(eval_pvt_water(pvt, p).b, 1.02);
}

TEST(PvtWater, DensityAtReference)
{
    const PvtTable pvt = simple_pvt(4e-10);
    const auto r = eval_pvt_water(pvt, 1e7);
    EXPECT_DOUBLE_EQ(r.b, 1.02);
    EXPECT_DOUBLE_EQ(r.rho, 1020.0 / 1.02);
    EXPECT_NEAR(eval_pvt_water(pvt, 2e7).b, 1.02 * std::exp(-4e-10 * 1e7), 1e-15);
}

TEST(PvtGas, NodeValues)
{
    const PvtTable pvt = simple_pvt();
    const auto r = eval_pvt_gas(pvt, 2e7);
    EXPECT_DOUBLE_EQ(r.b, 0.006);
    EXPECT_DOUBLE_EQ(r.mu, 2e-5);
    EXPECT_DOUBLE_EQ(r.rho, 0.9 / 0.006);
}

TEST(PvtTable, RejectsNonIncreasingPressure)
{
    const std::vector<OilPvtRow> oil{{2e7, 1.3, 1e-3, 100.0}, {1e7, 1.2, 1e-3, 80.0}};
    EXPECT_THROW(PvtTable(oil, 0.0, 0.0, WaterPvt{}, {}, SurfaceDensities{}), ConfigError);
}

#include <gtest/gtest.h>

#include "hybridlink/noise.hpp"

using namespace hybridlink;

namespace {

double mean_power(std::span<const Complex> x) { return energy(x) / static_cast<double>(x.size()); }

}  // namespace

TEST(Gm, EmpiricalVarianceMatchesMixture) {
    GmParams p;
    RngStream r(1, 1);
    const auto x = gm_sample(1'000'000, p, r);
    EXPECT_NEAR(mean_power(x.data) / p.total_variance(), 1.0, 0.03);
}

TEST(Gm, StateVarianceTracksComponents) {
    GmParams p{{0.7, 0.3}, {2.0, 50.0}};
    RngStream r(2, 2);
    std::vector<double> state;
    const auto x = gm_sample(200'000, p, r, &state);
    ASSERT_EQ(state.size(), x.size());
    double hi = 0.0, e_lo = 0.0, e_hi = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        ASSERT_TRUE(state[i] == 2.0 || state[i] == 50.0);
        if (state[i] == 50.0) {
            hi += 1.0;
            e_hi += std::norm(x[i]);
        } else {
            e_lo += std::norm(x[i]);
        }
    }
    const double n = static_cast<double>(state.size());
    EXPECT_NEAR(hi / n, 0.3, 0.005);
    EXPECT_NEAR(e_hi / hi, 50.0, 1.0);
    EXPECT_NEAR(e_lo / (n - hi), 2.0, 0.04);
}

TEST(Gm, Validation) {
    RngStream r(3, 3);
    EXPECT_THROW(gm_sample(1, GmParams{{0.5, 0.4}, {1, 2}}, r), ConfigError);
    EXPECT_THROW(gm_sample(1, GmParams{{1.0}, {1, 2}}, r), ConfigError);
    EXPECT_THROW(gm_sample(1, GmParams{{1.0}, {0.0}}, r), ConfigError);
    EXPECT_THROW(gm_sample(1, GmParams{{}, {}}, r), ConfigError);
}

TEST(Cyclo, DefaultPeriod) {
    EXPECT_EQ(CycloParams::period_for(400'000.0, 60.0), 3333u);
    EXPECT_EQ(CycloParams::period_for(400'000.0, 50.0), 4000u);
}

TEST(Cyclo, RegionLookupAndFractions) {
    CycloParams p;
    p.period_samples = 1000;
    EXPECT_EQ(p.region_at(0, 0), 0u);
    EXPECT_EQ(p.region_at(399, 0), 0u);
    EXPECT_EQ(p.region_at(400, 0), 1u);
    EXPECT_EQ(p.region_at(700, 0), 2u);
    EXPECT_EQ(p.region_at(999, 0), 2u);
    EXPECT_EQ(p.region_at(1000, 0), 0u);
    EXPECT_EQ(p.region_at(0, 450), 1u);
    const auto f = p.region_fractions();
    EXPECT_DOUBLE_EQ(f[0], 0.4);
    EXPECT_DOUBLE_EQ(f[1], 0.3);
    EXPECT_DOUBLE_EQ(f[2], 0.3);
    EXPECT_DOUBLE_EQ(p.average_power(), 0.4 + 3.0 + 30.0);
}

TEST(Cyclo, DominantRegionWeighsByPower) {
    CycloParams p;
    p.period_samples = 1000;
    // 200 samples of region 0 then 56 of region 1 (x10): region 1 dominates
    EXPECT_EQ(p.dominant_region(200, 256, 0), 1u);
    EXPECT_EQ(p.dominant_region(0, 256, 0), 0u);
    // 200 samples at x10 against 56 at x100
    EXPECT_EQ(p.dominant_region(500, 256, 0), 2u);
    // 250 samples at x1 against 6 at x10
    EXPECT_EQ(p.dominant_region(144, 256, 0), 0u);
}

TEST(Cyclo, RegionPowerRatiosMatchMultipliers) {
    CycloParams p;
    RngStream r(4, 4);
    const std::size_t n = p.period_samples * 60;
    const auto x = cyclo_sample(n, p, r, 0);
    std::vector<double> e(3, 0.0), c(3, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const auto reg = p.region_at(t, 0);
        e[reg] += std::norm(x[t]);
        c[reg] += 1.0;
    }
    const double base = e[0] / c[0];
    for (std::size_t reg = 1; reg < 3; ++reg)
        EXPECT_NEAR((e[reg] / c[reg]) / base / p.regions[reg].multiplier, 1.0, 0.10) << reg;
    EXPECT_NEAR(mean_power(x.data) / p.average_power(), 1.0, 0.05);
}

TEST(Cyclo, VarianceProfileRepeatsEveryPeriod) {
    CycloParams p;
    RngStream r(5, 5);
    const std::size_t P = p.period_samples, bin = 33, bins = P / bin;
    const auto x = cyclo_sample(P * 40, p, r, 123);
    // windowed power profile of the first 20 periods against the next 20
    std::vector<double> a(bins, 0.0), b(bins, 0.0);
    for (std::size_t per = 0; per < 40; ++per)
        for (std::size_t i = 0; i < bins * bin; ++i) (per < 20 ? a : b)[i / bin] += std::norm(x[per * P + i]);
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < bins; ++i) {
        ma += a[i] / bins;
        mb += b[i] / bins;
    }
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < bins; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    EXPECT_GT(sab / std::sqrt(saa * sbb), 0.95);
}

TEST(Cyclo, ShapingShowsInPsd) {
    OfdmConfig cfg;
    const auto st = true_stats(CycloParams{}, cfg);
    ASSERT_EQ(st.psd.size(), 3u);
    // region 0 white, region 1 low-pass, region 2 high-pass over the band
    EXPECT_NEAR(st.psd[0].front(), st.psd[0].back(), 1e-12);
    EXPECT_GT(st.psd[1].front(), st.psd[1].back());
    EXPECT_LT(st.psd[2].front(), st.psd[2].back());
}

TEST(Cyclo, Validation) {
    CycloParams p;
    p.regions[0].start_fraction = 0.1;
    EXPECT_THROW(p.validate(), ConfigError);
    p = CycloParams{};
    p.regions[2].start_fraction = 0.3;
    EXPECT_THROW(p.validate(), ConfigError);
    p = CycloParams{};
    p.regions[1].multiplier = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = CycloParams{};
    p.regions[1].shaping = {0.0, 0.0};
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Calibration, EbnoToVariance) {
    EXPECT_DOUBLE_EQ(noise_variance_for_ebno(0.0, {}), 1.0);
    EXPECT_NEAR(noise_variance_for_ebno(10.0, {1.0, 0.5, 1.0}), 0.2, 1e-15);
    EXPECT_THROW(noise_variance_for_ebno(0.0, {0.0, 1.0, 1.0}), DomainError);
    EXPECT_THROW(noise_variance_for_ebno(0.0, {1.0, 0.0, 1.0}), DomainError);
    for (const NoiseModel& m : {NoiseModel{AwgnParams{3.0}}, NoiseModel{GmParams{}}, NoiseModel{CycloParams{}}})
        EXPECT_NEAR(average_power(calibrate_to_ebno(m, 4.0, {1.0, 0.5, 1.0})), noise_variance_for_ebno(4.0, {1.0, 0.5, 1.0}),
                    1e-12);
}

TEST(Stats, AverageMatchesModelPower) {
    OfdmConfig cfg;
    EXPECT_NEAR(true_stats(GmParams{}, cfg).avg_power, 10.9, 1e-12);
    const auto st = true_stats(AwgnParams{2.5}, cfg);
    EXPECT_EQ(st.psd.size(), 1u);
    EXPECT_DOUBLE_EQ(st.avg_power, 2.5);
}

TEST(Sample, DispatchAndStateTrace) {
    RngStream r(6, 6);
    std::vector<double> state;
    CycloParams p;
    p.period_samples = 100;
    const auto x = sample(NoiseModel{p}, 250, r, 10, &state);
    ASSERT_EQ(state.size(), 250u);
    EXPECT_EQ(x.size(), 250u);
    EXPECT_DOUBLE_EQ(state[0], 1.0);   // position 10
    EXPECT_DOUBLE_EQ(state[35], 10.0);  // position 45
    EXPECT_DOUBLE_EQ(state[65], 100.0); // position 75
    EXPECT_DOUBLE_EQ(state[95], 1.0);   // wrapped
    sample(NoiseModel{AwgnParams{0.5}}, 10, r, 0, &state);
    for (double v : state) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Sample, Deterministic) {
    RngStream a(7, 1), b(7, 1);
    EXPECT_EQ(sample(NoiseModel{CycloParams{}}, 5000, a, 77).data, sample(NoiseModel{CycloParams{}}, 5000, b, 77).data);
}

#include <gtest/gtest.h>

#include <sstream>

#include "hybridlink/simulator.hpp"
#include "oracles.hpp"

using namespace hybridlink;

namespace {

Scenario awgn_uncoded() {
    Scenario sc;
    sc.scheme = Scheme::plc_only;
    sc.fec = false;
    sc.receiver = ReceiverMode::genie;
    sc.plc.noise.model = AwgnParams{};
    sc.plc.channel.preset = "flat";
    return sc;
}

std::uint64_t errors_over(const Scenario& sc, double ebno, std::uint64_t trials) {
    std::uint64_t e = 0;
    for (std::uint64_t t = 0; t < trials; ++t) e += run_trial(sc, ebno, t).bit_errors;
    return e;
}

BerPoint point(Scheme s, double ebno, double ber) {
    BerPoint p;
    p.scheme = s;
    p.ebno_db = ebno;
    p.ber = ber;
    return p;
}

}  // namespace

TEST(Layout, CoherentDefault) {
    Scenario sc;
    const auto f = frame_layout(sc);
    EXPECT_EQ(f.coded_cells, 1728u);
    EXPECT_EQ(f.info_bits, 858u);
    EXPECT_EQ(f.coded_bits, 1728u);
    EXPECT_EQ(f.interleaver_rows, 48u);
    EXPECT_EQ(f.interleaver_cols, 36u);
    EXPECT_DOUBLE_EQ(effective_rate(f, sc.plc), 858.0 / 1728.0);
}

TEST(Layout, DifferentialAndUncoded) {
    Scenario sc;
    sc.plc.modulation = sc.wl.modulation = Modulation::dbpsk_fddm;
    auto f = frame_layout(sc);
    EXPECT_EQ(f.coded_cells, 48u * 35);
    EXPECT_EQ(f.info_bits, 834u);
    EXPECT_EQ(f.interleaver_rows, 48u);
    // references count toward Eb: 834 bits over all 1728 cells
    EXPECT_DOUBLE_EQ(effective_rate(f, sc.plc), 834.0 / 1728.0);
    sc.plc.modulation = sc.wl.modulation = Modulation::dbpsk_tddm;
    f = frame_layout(sc);
    EXPECT_EQ(f.coded_cells, 47u * 36);
    EXPECT_EQ(f.coded_bits % f.interleaver_rows, 0u);
    sc.fec = false;
    f = frame_layout(sc);
    EXPECT_EQ(f.info_bits, f.coded_cells);
    sc.fec = true;
    sc.interleaver_rows = 7;
    EXPECT_THROW(frame_layout(sc), ConfigError);
}

TEST(Trial, NoErrorsAtHighSnr) {
    for (auto s : {Scheme::plc_only, Scheme::wl_only, Scheme::asc, Scheme::isc, Scheme::psdc, Scheme::trsd}) {
        Scenario sc;
        sc.scheme = s;
        sc.wl_ebno_db = 30.0;
        EXPECT_EQ(errors_over(sc, 30.0, 3), 0u) << to_string(s);
    }
    for (auto s : {Scheme::dssc, Scheme::egc, Scheme::asc}) {
        Scenario sc;
        sc.scheme = s;
        sc.plc.modulation = sc.wl.modulation = Modulation::dbpsk_fddm;
        sc.wl_ebno_db = 30.0;
        EXPECT_EQ(errors_over(sc, 30.0, 3), 0u) << to_string(s);
    }
    Scenario mixed;
    mixed.scheme = Scheme::mixed;
    mixed.plc.modulation = Modulation::dbpsk_tddm;
    mixed.wl_ebno_db = 30.0;
    EXPECT_EQ(errors_over(mixed, 30.0, 3), 0u);
}

TEST(Trial, FullChainAcquiresAndDecodes) {
    Scenario sc;
    sc.receiver = ReceiverMode::full;
    sc.wl_ebno_db = 20.0;
    for (std::uint64_t t = 0; t < 3; ++t) {
        const auto r = run_trial(sc, 20.0, t);
        EXPECT_FALSE(r.erased);
        EXPECT_EQ(r.bit_errors, 0u);
    }
}

TEST(Trial, LostFrameCountsAllBits) {
    Scenario sc;
    sc.scheme = Scheme::plc_only;
    sc.receiver = ReceiverMode::full;
    sc.plc.noise.model = AwgnParams{};
    std::size_t erased = 0;
    for (std::uint64_t t = 0; t < 5; ++t) {
        const auto r = run_trial(sc, -40.0, t);
        if (r.erased) {
            ++erased;
            EXPECT_EQ(r.bit_errors, r.bits);
        }
    }
    EXPECT_GT(erased, 0u);
}

TEST(Invariant, SilentLinkReproducesSingleLink) {
    // a link at -inf dB contributes nothing, so ASC collapses to the other link
    for (bool fec : {false, true}) {
        Scenario one;
        one.fec = fec;
        one.scheme = Scheme::plc_only;
        Scenario both = one;
        both.scheme = Scheme::asc;
        both.wl_ebno_db = -std::numeric_limits<double>::infinity();
        const double e = fec ? 0.0 : 4.0;
        EXPECT_EQ(errors_over(one, e, 12), errors_over(both, e, 12));
        EXPECT_GT(errors_over(one, e, 12), 0u);

        Scenario wl = one;
        wl.scheme = Scheme::wl_only;
        wl.wl_ebno_db = fec ? 1.0 : 3.0;
        Scenario wboth = wl;
        wboth.scheme = Scheme::asc;
        EXPECT_EQ(errors_over(wl, 0.0, 12), errors_over(wboth, -std::numeric_limits<double>::infinity(), 12));
    }
}

TEST(Invariant, CombinersAgreeUnderAwgn) {
    Scenario sc;
    sc.receiver = ReceiverMode::genie;
    sc.plc.noise.model = AwgnParams{};
    sc.wl.noise.model = AwgnParams{};
    for (std::uint64_t t = 0; t < 3; ++t) {
        sc.scheme = Scheme::asc;
        const auto a = trial_soft_values(sc, 2.0, t).combined;
        sc.scheme = Scheme::psdc;
        const auto p = trial_soft_values(sc, 2.0, t).combined;
        sc.scheme = Scheme::isc;
        const auto i = trial_soft_values(sc, 2.0, t).combined;
        ASSERT_EQ(a.size(), p.size());
        for (std::size_t n = 0; n < a.size(); ++n) {
            EXPECT_NEAR(a[n], p[n], 1e-9 * (1.0 + std::abs(a[n])));
            EXPECT_NEAR(a[n], i[n], 1e-9 * (1.0 + std::abs(a[n])));
        }
    }
}

TEST(Calibration, UncodedAwgnMatchesQ) {
    auto sc = awgn_uncoded();
    sc.stop = {200'000, 300'000};
    for (double e : {0.0, 2.0, 4.0}) {
        const auto p = run_point(sc, e);
        EXPECT_NEAR(p.ber / oracle::bpsk_awgn_ber(e), 1.0, 0.08) << e;
    }
}

TEST(Calibration, RayleighGenieMatchesClosedForm) {
    Scenario sc;
    sc.scheme = Scheme::wl_only;
    sc.fec = false;
    sc.receiver = ReceiverMode::genie;
    sc.wl.noise.model = AwgnParams{};
    sc.wl.channel.rayleigh_taps = 1;
    sc.wl_ebno_db = 5.0;
    // one fade per frame: the spread comes from the number of frames
    sc.stop = {1'000'000'000, 3'000'000};
    const auto p = run_point(sc, 0.0);
    EXPECT_NEAR(p.ber / oracle::bpsk_rayleigh_ber(5.0), 1.0, 0.15);
}

TEST(RunPoint, StopRuleAndWorkerIndependence) {
    auto sc = awgn_uncoded();
    sc.stop = {500, 10'000'000};
    const auto a = run_point(sc, 1.0, 1);
    const auto b = run_point(sc, 1.0, 3);
    EXPECT_GE(a.bit_errors, 500u);
    EXPECT_EQ(a.bits, b.bits);
    EXPECT_EQ(a.bit_errors, b.bit_errors);
    std::ostringstream x, y;
    write_csv(x, {a});
    write_csv(y, {b});
    EXPECT_EQ(x.str(), y.str());

    sc.stop = {1'000'000, 5000};
    EXPECT_EQ(run_point(sc, 1.0).bits, 3u * 1728);  // stops on the frame that crosses max_bits
}

TEST(RunPoint, SweepStopsBelowTarget) {
    auto sc = awgn_uncoded();
    sc.stop = {50, 200'000};
    sc.sweep = {0, 4, 8, 12};
    sc.stop_below_ber = 1e-2;
    const auto pts = run_sweep(sc);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_LT(pts.back().ber, 1e-2);
}

TEST(Csv, FormatAndRoundTrip) {
    BerPoint p = point(Scheme::psdc, 2.5, 0.0);
    p.bits = 1000;
    p.bit_errors = 12;
    p.ber = 0.012;
    p.ci95_halfwidth = ci95(12, 1000);
    std::ostringstream os;
    write_csv(os, {p});
    EXPECT_EQ(os.str(), "scheme,ebno_db,bits,bit_errors,ber,ci95\npsdc,2.5,1000,12,1.200000e-02,6.748778e-03\n");
    std::istringstream is(os.str());
    const auto back = read_csv(is);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].scheme, Scheme::psdc);
    EXPECT_EQ(back[0].bit_errors, 12u);
    std::istringstream bad("wrong,header\n");
    EXPECT_THROW(read_csv(bad), ConfigError);
    std::istringstream short_row("scheme,ebno_db,bits,bit_errors,ber,ci95\npsdc,1,2\n");
    EXPECT_THROW(read_csv(short_row), ConfigError);
}

TEST(Gain, IdenticalShiftedAndUnreached) {
    std::vector<BerPoint> base{point(Scheme::plc_only, 0, 1e-2), point(Scheme::plc_only, 2, 1e-3),
                               point(Scheme::plc_only, 4, 1e-5)};
    EXPECT_NEAR(*ebno_at_ber(base, 1e-4), 3.0, 1e-12);
    auto rows = report(base, base, 1e-4);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NEAR(*rows[0].gain_db, 0.0, 1e-12);

    std::vector<BerPoint> shifted;
    for (auto p : base) {
        p.scheme = Scheme::psdc;
        p.ebno_db -= 2.0;
        shifted.push_back(p);
    }
    rows = report(shifted, base, 1e-4);
    EXPECT_NEAR(*rows[0].gain_db, 2.0, 1e-12);

    std::vector<BerPoint> high{point(Scheme::asc, 0, 0.1), point(Scheme::asc, 2, 0.05)};
    rows = report(high, base, 1e-4);
    EXPECT_FALSE(rows[0].gain_db);
    std::ostringstream os;
    write_report(os, rows, 1e-4);
    EXPECT_EQ(os.str(), "scheme,target_ber,ebno_db,baseline_ebno_db,gain_db\nasc,0.0001,not reached,3.000,not reached\n");
    EXPECT_THROW(ebno_at_ber(base, 0.0), DomainError);
}

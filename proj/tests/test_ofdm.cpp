#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hybridlink/channel.hpp"
#include "hybridlink/ofdm.hpp"

using namespace hybridlink;

namespace {

SymbolGrid random_bpsk(std::size_t symbols, std::size_t k, std::uint64_t id) {
    RngStream rng(11, id);
    SymbolGrid g(symbols, k);
    for (auto& c : g.cells()) c = rng.bit() ? -1.0 : 1.0;
    return g;
}

SymbolGrid random_phases(std::size_t symbols, std::size_t k, std::uint64_t id) {
    RngStream rng(12, id);
    SymbolGrid g(symbols, k);
    for (auto& c : g.cells()) c = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
    return g;
}

double max_err(const SymbolGrid& a, const SymbolGrid& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a.cells()[i] - b.cells()[i]));
    return e;
}

}  // namespace

TEST(Ofdm, DefaultsAndLength) {
    OfdmConfig cfg;
    EXPECT_EQ(cfg.active_count(), 36u);
    EXPECT_EQ(cfg.active_subcarriers.front(), 23u);
    EXPECT_EQ(cfg.active_subcarriers.back(), 58u);
    EXPECT_DOUBLE_EQ(cfg.subcarrier_spacing(), 1562.5);
    SymbolGrid g(1, 36, 1.0);
    EXPECT_EQ(modulate(g, cfg).size(), 286u);
}

TEST(Ofdm, SingleSubcarrierIsPureTone) {
    OfdmConfig cfg;
    cfg.active_subcarriers = {40};
    SymbolGrid g(1, 1, 1.0);
    const auto x = modulate(g, cfg);
    for (std::size_t n = 0; n < 256; ++n) {
        const Complex expect = std::polar(1.0 / 16.0, 2.0 * std::numbers::pi * 40.0 * static_cast<double>(n) / 256.0);
        EXPECT_LT(std::abs(x[30 + n] - expect), 1e-12);
    }
    // cyclic prefix copies the tail
    for (std::size_t n = 0; n < 30; ++n) EXPECT_LT(std::abs(x[n] - x[256 + n]), 1e-15);
}

TEST(Ofdm, RoundTrip) {
    OfdmConfig cfg;
    const auto g = random_bpsk(5, cfg.active_count(), 1);
    EXPECT_LT(max_err(demodulate(modulate(g, cfg), cfg), g), 1e-12);
}

TEST(Ofdm, ThreeTapChannelIsDiagonalised) {
    OfdmConfig cfg;
    const std::vector<Complex> taps{{0.8, 0.1}, {0.4, -0.2}, {0.1, 0.05}};
    const auto ch = plc_channel(taps, cfg);
    const auto g = random_bpsk(4, cfg.active_count(), 2);
    const auto y = demodulate(apply(modulate(g, cfg), ch), cfg);
    for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t k = 0; k < cfg.active_count(); ++k) {
            // direct 256-point DFT of the taps
            Complex h{};
            for (std::size_t n = 0; n < taps.size(); ++n)
                h += taps[n] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(cfg.active_subcarriers[k] * n) / 256.0);
            EXPECT_LT(std::abs(y(s, k) - h * g(s, k)), 1e-10);
        }
}

TEST(Ofdm, DiagonalisationPropertyRandomTaps) {
    OfdmConfig cfg;
    RngStream rng(5, 5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Complex> taps(1 + rng.below(cfg.cp_len));
        for (auto& t : taps) t = rng.complex_gaussian(1.0 / static_cast<double>(taps.size()));
        ChannelRealization ch{frequency_response(taps, cfg), taps, ChannelModel::plc_static};
        const auto g = random_phases(3, cfg.active_count(), trial);
        const auto y = demodulate(apply(modulate(g, cfg), ch), cfg);
        for (std::size_t s = 0; s < 3; ++s)
            for (std::size_t k = 0; k < cfg.active_count(); ++k)
                EXPECT_LT(std::abs(y(s, k) - ch.gains[k] * g(s, k)), 1e-10);
    }
}

TEST(Ofdm, ChannelLongerThanCpBreaksDiagonalisation) {
    OfdmConfig cfg;
    std::vector<Complex> taps(cfg.cp_len + 5, Complex{});
    taps[0] = 1.0;
    taps.back() = 0.5;
    ChannelRealization ch{frequency_response(taps, cfg), taps, ChannelModel::plc_static};
    const auto g = random_bpsk(3, cfg.active_count(), 3);
    const auto y = demodulate(apply(modulate(g, cfg), ch), cfg);
    double err = 0.0;
    for (std::size_t k = 0; k < cfg.active_count(); ++k) err = std::max(err, std::abs(y(1, k) - ch.gains[k] * g(1, k)));
    EXPECT_GT(err, 1e-3);
}

TEST(Ofdm, Errors) {
    OfdmConfig cfg;
    EXPECT_THROW(modulate(SymbolGrid(1, 10), cfg), ConfigError);
    EXPECT_THROW(demodulate(Samples(100), cfg), FramingError);
    OfdmConfig bad = cfg;
    bad.cp_len = 256;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = cfg;
    bad.active_subcarriers.clear();
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Differential, TddmExamples) {
    SymbolGrid ones(4, 6, 1.0);
    EXPECT_LT(max_err(diff_encode(ones, DiffMode::tddm), ones), 1e-15);

    SymbolGrid d(2, 6, 1.0);
    for (std::size_t k = 0; k < 6; ++k) d(1, k) = -1.0;
    const auto e = diff_encode(d, DiffMode::tddm);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(e(1, k), -e(0, k));
}

TEST(Differential, RoundTripBothModes) {
    for (auto mode : {DiffMode::tddm, DiffMode::fddm}) {
        const auto d = random_phases(6, 8, mode == DiffMode::tddm ? 1 : 2);
        const auto back = diff_detect(diff_encode(d, mode), mode);
        for (std::size_t s = 0; s < 6; ++s)
            for (std::size_t k = 0; k < 8; ++k)
                if (is_data_cell(s, k, true, mode)) {
                    EXPECT_LT(std::abs(back(s, k) - d(s, k)), 1e-12);
                }
    }
}

TEST(Differential, PhaseInvariance) {
    const auto d = random_bpsk(5, 8, 9);
    const Complex rot = std::polar(1.0, 1.234);
    auto tx = diff_encode(d, DiffMode::tddm);
    for (auto& c : tx.cells()) c *= rot;
    const auto det = diff_detect(tx, DiffMode::tddm);
    for (std::size_t s = 1; s < 5; ++s)
        for (std::size_t k = 0; k < 8; ++k) EXPECT_LT(std::abs(det(s, k) - d(s, k)), 1e-12);

    // FDDM: a phase constant across adjacent subcarriers (different per symbol)
    auto f = diff_encode(d, DiffMode::fddm);
    for (std::size_t s = 0; s < 5; ++s)
        for (std::size_t k = 0; k < 8; ++k) f(s, k) *= std::polar(1.0, 0.3 * static_cast<double>(s));
    const auto fd = diff_detect(f, DiffMode::fddm);
    for (std::size_t s = 0; s < 5; ++s)
        for (std::size_t k = 1; k < 8; ++k) EXPECT_LT(std::abs(fd(s, k) - d(s, k)), 1e-12);
}

TEST(Differential, FlatChannelScalesByPower) {
    const auto d = random_bpsk(3, 8, 4);
    auto tx = diff_encode(d, DiffMode::fddm);
    const Complex h{0.6, -0.7};
    for (auto& c : tx.cells()) c *= h;
    const auto det = diff_detect(tx, DiffMode::fddm);
    for (std::size_t s = 0; s < 3; ++s)
        for (std::size_t k = 1; k < 8; ++k) EXPECT_LT(std::abs(det(s, k) - std::norm(h) * d(s, k)), 1e-12);
}

TEST(Differential, RejectsNonUnitModulus) {
    SymbolGrid g(2, 2, 1.0);
    g(1, 1) = 0.5;
    EXPECT_THROW(diff_encode(g, DiffMode::tddm), DomainError);
}

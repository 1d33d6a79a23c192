#pragma once

// Synthetic acquisition trials shared by the sync unit tests and the
// acceptance run.

#include "hybridlink/hybridlink.hpp"

namespace bench {

using namespace hybridlink;

struct SyncTally {
    std::size_t frames = 0;
    std::size_t detected = 0;     // detected with |timing error| <= tolerance
    std::size_t false_alarms = 0;  // detections on noise-only windows
    std::size_t noise_windows = 0;
    double max_residual_cfo_hz = 0.0;
};

// SNR is the mean preamble sample power over the complex noise variance.
inline double preamble_noise_variance(const PreambleSpec& spec, double snr_db) {
    const double p = energy(gen_preamble(spec).data) / static_cast<double>(spec.length());
    return p / std::pow(10.0, snr_db / 10.0);
}

// One frame: random idle lead, preamble, four data symbols, idle tail.
// Returns the true preamble start.
inline std::size_t build_capture(Samples& x, const PreambleSpec& spec, const OfdmConfig& cfg, RngStream& rng,
                                 double snr_db, double cfo_hz) {
    const std::size_t lead = 64 + rng.below(400);
    x.assign(lead, Complex{});
    const auto pre = gen_preamble(spec);
    x.insert(x.end(), pre.data.begin(), pre.data.end());
    SymbolGrid g(4, cfg.active_count());
    for (auto& c : g.cells()) c = rng.bit() ? -1.0 : 1.0;
    const auto body = modulate(g, cfg);
    x.insert(x.end(), body.data.begin(), body.data.end());
    x.resize(x.size() + 300);
    if (cfo_hz != 0.0) rotate(x, cfo_hz, cfg.sample_rate);
    const double var = preamble_noise_variance(spec, snr_db);
    for (auto& v : x) v += rng.complex_gaussian(var);
    return lead;
}

inline void detection_trials(SyncTally& t, std::size_t frames, double snr_db, std::size_t tolerance,
                             std::uint64_t seed) {
    OfdmConfig cfg;
    const auto spec = make_preamble_spec(cfg);
    DetectorConfig dc;
    dc.estimate_cfo = false;
    Samples x;
    for (std::size_t i = 0; i < frames; ++i) {
        RngStream rng(seed, i);
        const std::size_t start = build_capture(x, spec, cfg, rng, snr_db, 0.0);
        const auto det = hybrid_detect(x, spec, cfg, dc);
        ++t.frames;
        const auto err = static_cast<std::ptrdiff_t>(det.start_index) - static_cast<std::ptrdiff_t>(start);
        if (det.detected && std::abs(err) <= static_cast<std::ptrdiff_t>(tolerance)) ++t.detected;
    }
}

inline void false_alarm_trials(SyncTally& t, std::size_t windows, double snr_db, std::uint64_t seed) {
    OfdmConfig cfg;
    const auto spec = make_preamble_spec(cfg);
    DetectorConfig dc;
    dc.estimate_cfo = false;
    const double var = preamble_noise_variance(spec, snr_db);
    Samples x(spec.length() + 4 * cfg.symbol_len() + 764);
    for (std::size_t i = 0; i < windows; ++i) {
        RngStream rng(seed, i);
        for (auto& v : x) v = rng.complex_gaussian(var);
        ++t.noise_windows;
        if (hybrid_detect(x, spec, cfg, dc).detected) ++t.false_alarms;
    }
}

// Residual CFO after both estimation stages, injected offsets spread over
// [-max_cfo, max_cfo].
inline void cfo_trials(SyncTally& t, std::size_t frames, double snr_db, double max_cfo, std::uint64_t seed) {
    OfdmConfig cfg;
    const auto spec = make_preamble_spec(cfg);
    DetectorConfig dc;
    dc.estimate_cfo = true;
    Samples x;
    for (std::size_t i = 0; i < frames; ++i) {
        RngStream rng(seed, i);
        const double cfo = frames > 1 ? -max_cfo + 2.0 * max_cfo * static_cast<double>(i) / static_cast<double>(frames - 1)
                                      : max_cfo;
        build_capture(x, spec, cfg, rng, snr_db, cfo);
        const auto det = hybrid_detect(x, spec, cfg, dc);
        ++t.frames;
        if (det.detected) ++t.detected;
        const double resid = det.detected ? std::abs(cfo - det.cfo_hz(cfg.subcarrier_spacing())) : 1e9;
        t.max_residual_cfo_hz = std::max(t.max_residual_cfo_hz, resid);
    }
}

}  // namespace bench

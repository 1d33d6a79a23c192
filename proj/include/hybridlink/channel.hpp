#pragma once

// Per-link channel realizations: a deterministic frequency-selective PLC
// response and Rayleigh block fading for the wireless link.

#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hybridlink/ofdm.hpp"
#include "hybridlink/signal.hpp"

namespace hybridlink {

enum class ChannelModel { plc_static, rayleigh_block };

struct ChannelRealization {
    std::vector<Complex> gains;                 // H_k on each active subcarrier
    std::optional<std::vector<Complex>> taps;   // impulse response, if time-domain
    ChannelModel model = ChannelModel::plc_static;
};

/// H_k = sum_n taps[n] exp(-j 2 pi k n / N), evaluated on the active bins.
inline std::vector<Complex> frequency_response(std::span<const Complex> taps, const OfdmConfig& cfg) {
    std::vector<Complex> h(cfg.active_count());
    const double n = static_cast<double>(cfg.fft_size);
    for (std::size_t i = 0; i < cfg.active_count(); ++i) {
        const double k = static_cast<double>(cfg.active_subcarriers[i]);
        Complex acc{};
        for (std::size_t t = 0; t < taps.size(); ++t)
            acc += taps[t] * std::polar(1.0, -2.0 * std::numbers::pi * k * static_cast<double>(t) / n);
        h[i] = acc;
    }
    return h;
}

inline ChannelRealization from_taps(std::vector<Complex> taps, const OfdmConfig& cfg, ChannelModel model) {
    if (taps.empty()) throw ConfigError("channel tap list is empty");
    if (taps.size() > cfg.cp_len) throw ConfigError("channel impulse response longer than the cyclic prefix");
    ChannelRealization ch;
    ch.gains = frequency_response(taps, cfg);
    ch.taps = std::move(taps);
    ch.model = model;
    return ch;
}

/// Named presets. Each has unit tap energy.
inline std::vector<Complex> plc_preset_taps(const std::string& name) {
    if (name == "flat") return {{1.0, 0.0}};
    if (name == "lowpass3") {
        const double norm = std::sqrt(1.0 + 0.36 + 0.09);
        return {{1.0 / norm, 0.0}, {0.6 / norm, 0.0}, {0.3 / norm, 0.0}};
    }
    if (name == "echo5") {
        // Two-path line reflection with a weak late echo.
        std::vector<Complex> t{{0.85, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {-0.45, 0.2}, {0.18, 0.0}};
        double e = 0.0;
        for (auto v : t) e += std::norm(v);
        for (auto& v : t) v /= std::sqrt(e);
        return t;
    }
    throw ConfigError("unknown PLC channel preset: " + name);
}

inline ChannelRealization plc_channel(const std::string& preset, const OfdmConfig& cfg) {
    return from_taps(plc_preset_taps(preset), cfg, ChannelModel::plc_static);
}

inline ChannelRealization plc_channel(std::vector<Complex> taps, const OfdmConfig& cfg) {
    return from_taps(std::move(taps), cfg, ChannelModel::plc_static);
}

/// One block-fading draw: i.i.d. CN(0, 1/n_taps) taps, so E|H_k|^2 = 1.
inline ChannelRealization rayleigh_block(RngStream& stream, const OfdmConfig& cfg, std::size_t n_taps = 4) {
    if (n_taps == 0) throw ConfigError("Rayleigh channel needs at least one tap");
    std::vector<Complex> taps(n_taps);
    for (auto& t : taps) t = stream.complex_gaussian(1.0 / static_cast<double>(n_taps));
    return from_taps(std::move(taps), cfg, ChannelModel::rayleigh_block);
}

/// Linear convolution truncated to the input length, or per-bin
/// multiplication for a frequency-domain frame over the active set.
inline ComplexFrame apply(const ComplexFrame& frame, const ChannelRealization& ch) {
    if (frame.domain == Domain::frequency) {
        if (frame.size() != ch.gains.size())
            throw FramingError("frequency-domain frame does not match the channel's active set");
        ComplexFrame out = frame;
        for (std::size_t k = 0; k < out.size(); ++k) out[k] *= ch.gains[k];
        return out;
    }
    if (!ch.taps) throw PreconditionError("time-domain application needs channel taps");
    const auto& h = *ch.taps;
    ComplexFrame out{Samples(frame.size()), Domain::time};
    for (std::size_t n = 0; n < frame.size(); ++n) {
        Complex acc{};
        const std::size_t m_max = std::min(h.size(), n + 1);
        for (std::size_t m = 0; m < m_max; ++m) acc += h[m] * frame[n - m];
        out[n] = acc;
    }
    return out;
}

/// Plain-text tap list: one "re im" pair per line; '#' starts a comment.
inline std::vector<Complex> parse_taps(std::istream& in) {
    std::vector<Complex> taps;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double re = 0.0;
        double im = 0.0;
        if (!(ls >> re)) continue;
        if (!(ls >> im)) throw ConfigError("tap line " + std::to_string(lineno) + " needs two numbers");
        std::string rest;
        if (ls >> rest) throw ConfigError("tap line " + std::to_string(lineno) + " has trailing text");
        taps.emplace_back(re, im);
    }
    if (taps.empty()) throw ConfigError("tap file contains no taps");
    return taps;
}

inline std::vector<Complex> load_taps_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open tap file: " + path);
    return parse_taps(in);
}

}  // namespace hybridlink

#pragma once

// Receiver-side estimators: least-squares channel from the preamble, noise
// PSD per region and subcarrier, and per-cell instantaneous noise power.

#include <algorithm>
#include <optional>
#include <vector>

#include "hybridlink/noise.hpp"
#include "hybridlink/ofdm.hpp"
#include "hybridlink/sync.hpp"

namespace hybridlink {

enum class EstimateSource { genie, ls_preamble };

struct ChannelEstimate {
    std::vector<Complex> gains;
    EstimateSource source = EstimateSource::genie;
};

/// Mean over preamble symbols of Y_k / X_k.
inline ChannelEstimate ls_channel_estimate(const SymbolGrid& received, const SymbolGrid& known) {
    if (received.symbols() == 0) throw PreconditionError("LS estimation needs at least one preamble symbol");
    if (received.symbols() != known.symbols() || received.subcarriers() != known.subcarriers())
        throw FramingError("received and known preamble grids differ in shape");
    ChannelEstimate est;
    est.source = EstimateSource::ls_preamble;
    est.gains.assign(received.subcarriers(), Complex{});
    for (std::size_t s = 0; s < received.symbols(); ++s)
        for (std::size_t k = 0; k < received.subcarriers(); ++k) {
            if (std::abs(known(s, k)) == 0.0) throw DomainError("known preamble symbol is zero");
            est.gains[k] += received(s, k) / known(s, k);
        }
    for (auto& g : est.gains) g /= static_cast<double>(received.symbols());
    return est;
}

/// DFT of the n_syncp SYNCP symbols plus the full SYNCM starting at `start`,
/// paired with their known content.
inline std::pair<SymbolGrid, SymbolGrid> preamble_grids(std::span<const Complex> signal, std::size_t start,
                                                        const PreambleSpec& spec, const OfdmConfig& cfg) {
    const std::size_t L = spec.symbol_len;
    const std::size_t n = spec.n_syncp + 1;
    if (start + n * L > signal.size()) throw FramingError("signal too short for the preamble");
    SymbolGrid rx(n, cfg.active_count());
    SymbolGrid known(n, cfg.active_count());
    Samples bins(L);
    for (std::size_t s = 0; s < n; ++s) {
        std::copy_n(signal.begin() + static_cast<std::ptrdiff_t>(start + s * L), L, bins.begin());
        dft_plan(L).forward(bins);
        const double sign = s < spec.n_syncp ? 1.0 : -1.0;
        for (std::size_t k = 0; k < cfg.active_count(); ++k) {
            rx(s, k) = bins[cfg.active_subcarriers[k]];
            known(s, k) = sign * spec.syncp_bins[k];
        }
    }
    return {rx, known};
}

struct PsdEstimate {
    std::vector<std::vector<double>> psd;  // [region][subcarrier]
    std::vector<std::size_t> symbol_counts;

    bool available(std::size_t r) const { return symbol_counts[r] > 0; }
};

/// psd[r][k] = avg over symbols in region r of |Y_k|^2 minus the average
/// received signal power |H_k|^2 * P, clamped at `floor`. `cell_power`,
/// when given, holds the transmitted power of each cell (symbol-major).
inline PsdEstimate noise_psd_estimate(const SymbolGrid& received, std::span<const std::size_t> symbol_region,
                                      std::size_t n_regions, std::span<const double> channel_power,
                                      double floor = 1e-6, std::span<const double> cell_power = {}) {
    if (symbol_region.size() != received.symbols()) throw FramingError("one region label per symbol is required");
    if (channel_power.size() != received.subcarriers()) throw FramingError("channel power per subcarrier is required");
    const std::size_t K = received.subcarriers();
    PsdEstimate est;
    est.psd.assign(n_regions, std::vector<double>(K, 0.0));
    std::vector<std::vector<double>> sig(n_regions, std::vector<double>(K, 0.0));
    est.symbol_counts.assign(n_regions, 0);
    for (std::size_t s = 0; s < received.symbols(); ++s) {
        const std::size_t r = symbol_region[s];
        if (r >= n_regions) throw DomainError("region label out of range");
        ++est.symbol_counts[r];
        for (std::size_t k = 0; k < K; ++k) {
            est.psd[r][k] += std::norm(received(s, k));
            sig[r][k] += cell_power.empty() ? 1.0 : cell_power[s * K + k];
        }
    }
    for (std::size_t r = 0; r < n_regions; ++r) {
        if (!est.available(r)) continue;
        const double n = static_cast<double>(est.symbol_counts[r]);
        for (std::size_t k = 0; k < K; ++k)
            est.psd[r][k] = std::max(floor, est.psd[r][k] / n - channel_power[k] * sig[r][k] / n);
    }
    return est;
}

/// Decision-directed variant: psd[r][k] = avg over symbols in region r of
/// |Y_k - H_k X_k|^2, X_k the BPSK hard decision (zero on cells that carry
/// no power). Unlike the power-subtraction form it stays accurate when the
/// noise is far below the signal.
inline PsdEstimate noise_psd_estimate_residual(const SymbolGrid& received, std::span<const std::size_t> symbol_region,
                                               std::size_t n_regions, std::span<const Complex> gains,
                                               double floor = 1e-6, std::span<const double> cell_power = {}) {
    if (symbol_region.size() != received.symbols()) throw FramingError("one region label per symbol is required");
    if (gains.size() != received.subcarriers()) throw FramingError("channel estimate does not match grid");
    const std::size_t K = received.subcarriers();
    PsdEstimate est;
    est.psd.assign(n_regions, std::vector<double>(K, 0.0));
    est.symbol_counts.assign(n_regions, 0);
    for (std::size_t s = 0; s < received.symbols(); ++s) {
        const std::size_t r = symbol_region[s];
        if (r >= n_regions) throw DomainError("region label out of range");
        ++est.symbol_counts[r];
        for (std::size_t k = 0; k < K; ++k) {
            const Complex y = received(s, k);
            double x = (std::conj(gains[k]) * y).real() >= 0.0 ? 1.0 : -1.0;
            if (!cell_power.empty()) x *= std::sqrt(cell_power[s * K + k]);
            est.psd[r][k] += std::norm(y - gains[k] * x);
        }
    }
    for (std::size_t r = 0; r < n_regions; ++r) {
        if (!est.available(r)) continue;
        const double n = static_cast<double>(est.symbol_counts[r]);
        for (auto& v : est.psd[r]) v = std::max(floor, v / n);
    }
    return est;
}

/// Turns a PSD estimate into combiner statistics. Regions with no symbols
/// fall back to the mean of the available rows.
inline NoiseStats to_noise_stats(const PsdEstimate& est) {
    NoiseStats st;
    const std::size_t R = est.psd.size();
    const std::size_t K = R ? est.psd[0].size() : 0;
    std::size_t total = 0;
    for (auto c : est.symbol_counts) total += c;
    if (total == 0) throw PreconditionError("PSD estimate has no symbols in any region");
    std::vector<double> fallback(K, 0.0);
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t k = 0; k < K; ++k)
            fallback[k] += est.psd[r][k] * static_cast<double>(est.symbol_counts[r]) / static_cast<double>(total);
    st.psd = est.psd;
    st.region_weights.resize(R);
    double avg = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
        if (!est.available(r)) st.psd[r] = fallback;
        st.region_weights[r] = static_cast<double>(est.symbol_counts[r]) / static_cast<double>(total);
        for (std::size_t k = 0; k < K; ++k) avg += st.region_weights[r] * st.psd[r][k];
    }
    st.avg_power = avg / static_cast<double>(K);
    return st;
}

/// Collapses a per-region estimate to one flat row (used for the wireless
/// link, whose noise PSD equals its variance on every subcarrier).
inline NoiseStats flatten(const NoiseStats& st) {
    NoiseStats flat;
    const std::size_t K = st.psd.empty() ? 0 : st.psd[0].size();
    flat.avg_power = st.avg_power;
    flat.psd.assign(1, std::vector<double>(K, st.avg_power));
    flat.region_weights = {1.0};
    return flat;
}

/// Genie noise power of each received symbol and bin: the generating
/// variance of every sample in the DFT window, shaped by the spectral
/// response of the region it came from. `state_variance` covers the frame
/// body (symbols_per_frame * symbol_len samples); `sample_row` selects a row
/// of `shape` (|S_r(k)|^2 per active bin) per sample, or is empty for white
/// noise.
inline std::vector<double> symbol_noise_power(std::span<const double> state_variance,
                                              std::span<const std::size_t> sample_row,
                                              const std::vector<std::vector<double>>& shape, const OfdmConfig& cfg) {
    const std::size_t S = cfg.symbols_per_frame;
    const std::size_t K = cfg.active_count();
    const std::size_t L = cfg.symbol_len();
    if (state_variance.size() < S * L) throw FramingError("variance trace shorter than the frame");
    if (!sample_row.empty() && sample_row.size() < S * L) throw FramingError("region trace shorter than the frame");
    std::vector<double> out(S * K, 0.0);
    std::vector<double> per_row;
    for (std::size_t s = 0; s < S; ++s) {
        const std::size_t first = s * L + cfg.cp_len;
        if (sample_row.empty()) {
            double v = 0.0;
            for (std::size_t t = first; t < first + cfg.fft_size; ++t) v += state_variance[t];
            v /= static_cast<double>(cfg.fft_size);
            std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(s * K), K, v);
            continue;
        }
        per_row.assign(shape.size(), 0.0);
        for (std::size_t t = first; t < first + cfg.fft_size; ++t) per_row.at(sample_row[t]) += state_variance[t];
        for (std::size_t r = 0; r < shape.size(); ++r) {
            if (per_row[r] == 0.0) continue;
            const double w = per_row[r] / static_cast<double>(cfg.fft_size);
            for (std::size_t k = 0; k < K; ++k) out[s * K + k] += w * shape[r][k];
        }
    }
    return out;
}

/// genie: |N_k|^2 of the noise actually added; symbol: per-symbol genie
/// power from the generating process (see symbol_noise_power); residual:
/// |Y_k - H_k X_k|^2 with X_k the per-cell BPSK hard decision.
enum class InstantaneousMode { genie, symbol, residual };

struct InstantaneousContext {
    const SymbolGrid* noise = nullptr;            // genie: the noise actually added
    const SymbolGrid* received = nullptr;         // residual: received cells
    const ChannelEstimate* channel = nullptr;      // residual: channel estimate
    const std::vector<double>* symbol_power = nullptr;  // symbol: precomputed genie powers
};

inline std::vector<double> instantaneous_noise_power(InstantaneousMode mode, const InstantaneousContext& ctx) {
    std::vector<double> out;
    if (mode == InstantaneousMode::symbol) {
        if (!ctx.symbol_power) throw PreconditionError("symbol mode needs the generating noise powers");
        return *ctx.symbol_power;
    }
    if (mode == InstantaneousMode::genie) {
        if (!ctx.noise) throw PreconditionError("genie instantaneous power needs the generated noise");
        out.reserve(ctx.noise->size());
        for (const auto& n : ctx.noise->cells()) out.push_back(std::norm(n));
        return out;
    }
    if (!ctx.received) throw PreconditionError("residual instantaneous power needs received cells");
    if (!ctx.channel) throw PreconditionError("residual instantaneous power needs a channel estimate");
    const auto& y = *ctx.received;
    if (ctx.channel->gains.size() != y.subcarriers()) throw FramingError("channel estimate does not match grid");
    out.reserve(y.size());
    for (std::size_t s = 0; s < y.symbols(); ++s)
        for (std::size_t k = 0; k < y.subcarriers(); ++k) {
            const Complex h = ctx.channel->gains[k];
            const double x = (std::conj(h) * y(s, k)).real() >= 0.0 ? 1.0 : -1.0;
            out.push_back(std::norm(y(s, k) - h * x));
        }
    return out;
}

}  // namespace hybridlink

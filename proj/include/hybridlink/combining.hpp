#pragma once

// Per-link soft values and the diversity rules that merge them. All LLRs use
// the convention that a positive value favours bit 0 (symbol +1).

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hybridlink/estimation.hpp"
#include "hybridlink/noise.hpp"
#include "hybridlink/ofdm.hpp"

namespace hybridlink {

enum class Link { plc, wireless };

struct LlrFrame {
    std::vector<double> llrs;
    Link link = Link::plc;
    std::vector<double> weights_used;  // weight applied to each cell's soft value

    std::size_t size() const { return llrs.size(); }
};

using SelectionMask = std::vector<std::uint8_t>;  // 1 = PLC, 0 = wireless

/// Gaussian-assumption BPSK LLR: 4 Re(conj(H) Y) / sigma^2.
inline double llr_coherent(Complex y, Complex h, double variance) {
    if (!(variance > 0.0)) throw DomainError("noise variance must be positive");
    return 4.0 * (std::conj(h) * y).real() / variance;
}

/// Which noise power goes into the denominator of the per-cell weights.
enum class Denominator { average, psd, instantaneous };

/// Per-cell denominators (symbol-major) for one link, floored at `floor`.
inline std::vector<double> cell_denominators(Denominator kind, const NoiseStats& stats,
                                             std::span<const std::size_t> symbol_region,
                                             std::span<const double> instantaneous, std::size_t symbols,
                                             std::size_t subcarriers, double floor) {
    std::vector<double> den(symbols * subcarriers);
    for (std::size_t s = 0; s < symbols; ++s)
        for (std::size_t k = 0; k < subcarriers; ++k) {
            double v = 0.0;
            switch (kind) {
                case Denominator::average: v = stats.avg_power; break;
                case Denominator::psd: {
                    const std::size_t r = stats.psd.size() == 1 ? 0 : symbol_region[s];
                    v = stats.psd.at(r).at(k);
                    break;
                }
                case Denominator::instantaneous: v = instantaneous[s * subcarriers + k]; break;
            }
            den[s * subcarriers + k] = std::max(v, floor);
        }
    return den;
}

/// Coherent BPSK LLRs over every cell, symbol-major.
inline LlrFrame coherent_llrs(const SymbolGrid& y, std::span<const Complex> gains, std::span<const double> den, Link link) {
    if (gains.size() != y.subcarriers() || den.size() != y.size()) throw FramingError("coherent LLR inputs differ in size");
    LlrFrame out;
    out.link = link;
    out.llrs.reserve(y.size());
    out.weights_used.reserve(y.size());
    for (std::size_t s = 0; s < y.symbols(); ++s)
        for (std::size_t k = 0; k < y.subcarriers(); ++k) {
            const double d = den[s * y.subcarriers() + k];
            out.llrs.push_back(llr_coherent(y(s, k), gains[k], d));
            out.weights_used.push_back(4.0 / d);
        }
    return out;
}

/// Unweighted coherent soft values Re(conj(H) Y).
inline LlrFrame coherent_soft(const SymbolGrid& y, std::span<const Complex> gains, Link link) {
    if (gains.size() != y.subcarriers()) throw FramingError("channel estimate does not match grid");
    LlrFrame out;
    out.link = link;
    for (std::size_t s = 0; s < y.symbols(); ++s)
        for (std::size_t k = 0; k < y.subcarriers(); ++k) {
            out.llrs.push_back((std::conj(gains[k]) * y(s, k)).real());
            out.weights_used.push_back(1.0);
        }
    return out;
}

namespace detail {
inline std::pair<std::size_t, std::size_t> reference_of(std::size_t s, std::size_t k, DiffMode mode) {
    return mode == DiffMode::tddm ? std::pair{s - 1, k} : std::pair{s, k - 1};
}
}  // namespace detail

/// Differential LLRs under a Gaussian approximation of Re(Y_cur conj(Y_ref)):
/// 4 Re(d) / (den_cur + den_ref + den_cur * den_ref / P_k), where P_k is the
/// expected received signal power on subcarrier k. The product term is the
/// noise-times-noise part of d; it dominates on weak cells. With an empty
/// `signal_power` the term is dropped. Data cells only.
inline LlrFrame differential_llrs(const SymbolGrid& y, DiffMode mode, std::span<const double> den, Link link,
                                  std::span<const double> signal_power = {}) {
    if (den.size() != y.size()) throw FramingError("differential LLR inputs differ in size");
    if (!signal_power.empty() && signal_power.size() != y.subcarriers())
        throw FramingError("signal power must be given per subcarrier");
    const auto d = diff_detect(y, mode);
    const std::size_t K = y.subcarriers();
    LlrFrame out;
    out.link = link;
    for (std::size_t s = 0; s < y.symbols(); ++s)
        for (std::size_t k = 0; k < K; ++k) {
            if (!is_data_cell(s, k, true, mode)) continue;
            const auto [rs, rk] = detail::reference_of(s, k, mode);
            const double dc = den[s * K + k];
            const double dr = den[rs * K + rk];
            double v = dc + dr;
            if (!signal_power.empty()) v += dc * dr / std::max(signal_power[k], 1e-12);
            const double w = 4.0 / v;
            out.llrs.push_back(w * d(s, k).real());
            out.weights_used.push_back(w);
        }
    return out;
}

/// Unweighted differential soft values Re(Y_cur conj(Y_ref)).
inline LlrFrame differential_soft(const SymbolGrid& y, DiffMode mode, Link link) {
    const auto d = diff_detect(y, mode);
    LlrFrame out;
    out.link = link;
    for (std::size_t s = 0; s < y.symbols(); ++s)
        for (std::size_t k = 0; k < y.subcarriers(); ++k) {
            if (!is_data_cell(s, k, true, mode)) continue;
            out.llrs.push_back(d(s, k).real());
            out.weights_used.push_back(1.0);
        }
    return out;
}

/// Differential signal strength weighting for one link:
/// value = (|Y_cur| / psd_cur) * Re(Y_cur conj(Y_ref)).
inline LlrFrame dssc_llrs(const SymbolGrid& y, DiffMode mode, std::span<const double> psd, Link link) {
    if (psd.size() != y.size()) throw FramingError("DSSC inputs differ in size");
    const auto d = diff_detect(y, mode);
    const std::size_t K = y.subcarriers();
    LlrFrame out;
    out.link = link;
    for (std::size_t s = 0; s < y.symbols(); ++s)
        for (std::size_t k = 0; k < K; ++k) {
            if (!is_data_cell(s, k, true, mode)) continue;
            const double w = std::abs(y(s, k)) / psd[s * K + k];
            out.llrs.push_back(w * d(s, k).real());
            out.weights_used.push_back(w);
        }
    return out;
}

/// Bit-level additive combining; every weighted rule reduces to this once
/// each link's LLRs carry their own weights.
inline LlrFrame combine_sum(const LlrFrame& plc, const LlrFrame& wl) {
    if (plc.size() != wl.size()) throw FramingError("links carry different numbers of bits");
    LlrFrame out;
    out.link = Link::plc;
    out.llrs.resize(plc.size());
    for (std::size_t i = 0; i < plc.size(); ++i) out.llrs[i] = plc.llrs[i] + wl.llrs[i];
    out.weights_used = plc.weights_used;
    return out;
}

// Average-SNR, instantaneous-SNR and PSD combining differ only in the
// denominators used to build each link's LLRs.
inline LlrFrame combine_asc(const LlrFrame& plc, const LlrFrame& wl) { return combine_sum(plc, wl); }
inline LlrFrame combine_isc(const LlrFrame& plc, const LlrFrame& wl) { return combine_sum(plc, wl); }
inline LlrFrame combine_psdc(const LlrFrame& plc, const LlrFrame& wl) { return combine_sum(plc, wl); }
inline LlrFrame egc_combine(const LlrFrame& plc, const LlrFrame& wl) { return combine_sum(plc, wl); }
inline LlrFrame dssc_combine(const LlrFrame& plc, const LlrFrame& wl) { return combine_sum(plc, wl); }

/// Coherent wireless LLRs plus DSSC-weighted differential PLC values.
inline LlrFrame mixed_combine(const LlrFrame& wl_coherent, const LlrFrame& plc_differential) {
    return combine_sum(plc_differential, wl_coherent);
}

/// |H_k|^2 / psd_k.
inline std::vector<double> cnr(std::span<const Complex> gains, std::span<const double> psd, double floor = 1e-6) {
    if (gains.size() != psd.size()) throw FramingError("CNR inputs differ in size");
    std::vector<double> out(gains.size());
    for (std::size_t k = 0; k < gains.size(); ++k) out[k] = std::norm(gains[k]) / std::max(psd[k], floor);
    return out;
}

/// Per-subcarrier medium selection: PLC wherever its CNR is at least the
/// wireless CNR.
inline SelectionMask trsd_select(std::span<const double> cnr_plc, std::span<const double> cnr_wl) {
    if (cnr_plc.size() != cnr_wl.size()) throw FramingError("CNR vectors differ in length");
    SelectionMask mask(cnr_plc.size());
    for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = cnr_plc[k] >= cnr_wl[k] ? 1 : 0;
    return mask;
}

/// Places every cell on its selected medium at full power; the other medium
/// carries zero on that subcarrier.
inline std::pair<SymbolGrid, SymbolGrid> trsd_apply(const SymbolGrid& data, const SelectionMask& mask) {
    if (mask.size() != data.subcarriers()) throw FramingError("mask length does not match subcarrier count");
    SymbolGrid plc(data.symbols(), data.subcarriers());
    SymbolGrid wl(data.symbols(), data.subcarriers());
    for (std::size_t s = 0; s < data.symbols(); ++s)
        for (std::size_t k = 0; k < data.subcarriers(); ++k) (mask[k] ? plc : wl)(s, k) = data(s, k);
    return {plc, wl};
}

/// Keeps each link's LLR only on the subcarriers it was selected for.
inline LlrFrame trsd_merge(const LlrFrame& plc, const LlrFrame& wl, const SelectionMask& mask) {
    if (plc.size() != wl.size() || mask.empty() || plc.size() % mask.size() != 0)
        throw FramingError("TRSD inputs differ in size");
    LlrFrame out;
    out.llrs.resize(plc.size());
    for (std::size_t i = 0; i < plc.size(); ++i) out.llrs[i] = mask[i % mask.size()] ? plc.llrs[i] : wl.llrs[i];
    return out;
}

}  // namespace hybridlink

#pragma once

// Preamble generation and two-stage packet acquisition: delayed
// autocorrelation for coarse timing and fractional CFO, then integer CFO and
// cross-correlation against the known SYNCP/SYNCM template.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "hybridlink/ofdm.hpp"
#include "hybridlink/signal.hpp"

namespace hybridlink {

struct PreambleSpec {
    std::size_t n_syncp = 8;
    std::size_t symbol_len = 256;
    Samples syncp;  // one SYNCP symbol in the time domain

    std::size_t length() const { return n_syncp * symbol_len + symbol_len + symbol_len / 2; }
    // Known frequency-domain content of SYNCP on the active subcarriers.
    std::vector<Complex> syncp_bins;
};

/// SYNCP is the inverse DFT of fixed pseudorandom unit-modulus phases on the
/// active subcarriers. The phase table never changes between builds.
inline PreambleSpec make_preamble_spec(const OfdmConfig& cfg, std::size_t n_syncp = 8) {
    cfg.validate();
    if (n_syncp < 3) throw ConfigError("preamble needs at least three SYNCP symbols");
    PreambleSpec spec;
    spec.n_syncp = n_syncp;
    spec.symbol_len = cfg.fft_size;
    RngStream phases(0x19012ull, 0);
    spec.syncp_bins.resize(cfg.active_count());
    Samples bins(cfg.fft_size);
    for (std::size_t k = 0; k < cfg.active_count(); ++k) {
        spec.syncp_bins[k] = std::polar(1.0, 2.0 * std::numbers::pi * phases.uniform());
        bins[cfg.active_subcarriers[k]] = spec.syncp_bins[k];
    }
    dft_plan(cfg.fft_size).inverse(bins);
    spec.syncp = std::move(bins);
    return spec;
}

/// n_syncp SYNCP symbols, one SYNCM (= -SYNCP) and the first half of a SYNCM.
inline ComplexFrame gen_preamble(const PreambleSpec& spec) {
    ComplexFrame out{Samples{}, Domain::time};
    out.data.reserve(spec.length());
    for (std::size_t i = 0; i < spec.n_syncp; ++i) out.data.insert(out.data.end(), spec.syncp.begin(), spec.syncp.end());
    for (const auto& v : spec.syncp) out.data.push_back(-v);
    for (std::size_t i = 0; i < spec.symbol_len / 2; ++i) out.data.push_back(-spec.syncp[i]);
    return out;
}

struct DelayedCorrelation {
    std::vector<Complex> corr;   // C(t)
    std::vector<double> metric;  // |C(t)| / sqrt(E_first(t) E_second(t))
};

/// C(t) = sum_{m<lag} x[t+m] conj(x[t+m+lag]) for t in [0, len - 2 lag],
/// updated recursively and resynchronised every few windows.
inline DelayedCorrelation delayed_corr(std::span<const Complex> x, std::size_t lag) {
    if (lag == 0 || x.size() <= 2 * lag) throw FramingError("signal must be longer than twice the correlation lag");
    const std::size_t n_out = x.size() - 2 * lag + 1;
    DelayedCorrelation out;
    out.corr.resize(n_out);
    out.metric.resize(n_out);
    Complex c{};
    double e1 = 0.0;
    double e2 = 0.0;
    const std::size_t resync = 8 * lag;
    for (std::size_t t = 0; t < n_out; ++t) {
        if (t % resync == 0) {
            c = {};
            e1 = e2 = 0.0;
            for (std::size_t m = 0; m < lag; ++m) {
                c += x[t + m] * std::conj(x[t + m + lag]);
                e1 += std::norm(x[t + m]);
                e2 += std::norm(x[t + m + lag]);
            }
        } else {
            c += x[t + lag - 1] * std::conj(x[t + 2 * lag - 1]) - x[t - 1] * std::conj(x[t - 1 + lag]);
            e1 += std::norm(x[t + lag - 1]) - std::norm(x[t - 1]);
            e2 += std::norm(x[t + 2 * lag - 1]) - std::norm(x[t - 1 + lag]);
        }
        out.corr[t] = c;
        const double den = std::sqrt(std::max(e1, 0.0) * std::max(e2, 0.0));
        out.metric[t] = den > 0.0 ? std::abs(c) / den : 0.0;
    }
    return out;
}

/// f = -arg(C) fs / (2 pi lag); unambiguous for |f| < fs / (2 lag).
inline double frac_cfo_estimate(Complex plateau_corr, std::size_t lag, double sample_rate) {
    return -std::arg(plateau_corr) * sample_rate / (2.0 * std::numbers::pi * static_cast<double>(lag));
}

/// Multiplies x[n] by exp(j 2 pi f n / fs); negative f removes an offset.
inline void rotate(std::span<Complex> x, double freq_hz, double sample_rate, double start_index = 0.0) {
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate;
    for (std::size_t n = 0; n < x.size(); ++n) x[n] *= std::polar(1.0, w * (start_index + static_cast<double>(n)));
}

struct DetectionResult {
    bool detected = false;
    std::size_t start_index = 0;
    double frac_cfo_hz = 0.0;
    int int_cfo_bins = 0;
    double metric_peak = 0.0;

    double cfo_hz(double subcarrier_spacing) const { return frac_cfo_hz + int_cfo_bins * subcarrier_spacing; }
};

struct DetectorConfig {
    double stage1_threshold = 0.5;
    double stage2_threshold = 0.6;
    std::size_t search_range = 64;
    int int_cfo_range = 2;
    bool estimate_cfo = true;  // false on the PLC link (baseband)
    bool band_filter = true;
    std::size_t filter_len = 63;
    std::size_t band_margin = 3;  // extra bins kept on each side of the active band
};

/// Linear-phase complex band-pass covering the active band plus a margin.
/// Output is aligned with the input (group delay removed).
inline Samples band_filter(std::span<const Complex> x, const OfdmConfig& cfg, const DetectorConfig& dc) {
    const auto [lo_it, hi_it] = std::minmax_element(cfg.active_subcarriers.begin(), cfg.active_subcarriers.end());
    const double n = static_cast<double>(cfg.fft_size);
    const double lo = (static_cast<double>(*lo_it) - static_cast<double>(dc.band_margin)) / n;
    const double hi = (static_cast<double>(*hi_it) + static_cast<double>(dc.band_margin)) / n;
    const double f0 = 0.5 * (lo + hi);
    const double fc = 0.5 * (hi - lo) + 0.5 / n;
    const std::size_t len = dc.filter_len | 1u;
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(len / 2);
    std::vector<Complex> h(len);
    for (std::size_t i = 0; i < len; ++i) {
        const double m = static_cast<double>(static_cast<std::ptrdiff_t>(i) - half);
        const double sinc = m == 0.0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * m) / (std::numbers::pi * m);
        const double win = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len - 1));
        h[i] = sinc * win * std::polar(1.0, 2.0 * std::numbers::pi * f0 * m);
    }
    Samples y(x.size());
    const auto nx = static_cast<std::ptrdiff_t>(x.size());
    for (std::ptrdiff_t t = 0; t < nx; ++t) {
        Complex acc{};
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(len); ++i) {
            const std::ptrdiff_t src = t + half - i;
            if (src >= 0 && src < nx) acc += h[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(src)];
        }
        y[static_cast<std::size_t>(t)] = acc;
    }
    return y;
}

/// Integer CFO in bins: maximises the adjacent-subcarrier differential
/// correlation between one received SYNCP window and the known spectrum,
/// which is insensitive to timing offset and channel selectivity.
inline int estimate_int_cfo(std::span<const Complex> window, const PreambleSpec& spec, const OfdmConfig& cfg, int range) {
    Samples y(window.begin(), window.end());
    dft_plan(cfg.fft_size).forward(y);
    const auto n = static_cast<std::ptrdiff_t>(cfg.fft_size);
    auto bin = [&](std::size_t k, int shift) {
        return y[static_cast<std::size_t>(((static_cast<std::ptrdiff_t>(k) + shift) % n + n) % n)];
    };
    int best = 0;
    double best_metric = -1.0;
    for (int b = -range; b <= range; ++b) {
        Complex acc{};
        for (std::size_t i = 0; i + 1 < cfg.active_count(); ++i) {
            const Complex rx = bin(cfg.active_subcarriers[i + 1], b) * std::conj(bin(cfg.active_subcarriers[i], b));
            const Complex ref = spec.syncp_bins[i + 1] * std::conj(spec.syncp_bins[i]);
            acc += rx * std::conj(ref);
        }
        const double m = std::abs(acc);
        if (m > best_metric + 1e-12 || (std::abs(m - best_metric) <= 1e-12 && std::abs(b) < std::abs(best))) {
            best_metric = m;
            best = b;
        }
    }
    return best;
}

/// Second stage. `x` must already be free of fractional CFO. Searches
/// +-search_range around `coarse_start` for the SYNCP->SYNCM boundary.
inline DetectionResult cross_corr_refine(std::span<const Complex> x, std::size_t coarse_start, const PreambleSpec& spec,
                                         const OfdmConfig& cfg, const DetectorConfig& dc) {
    const std::size_t L = spec.symbol_len;
    DetectionResult res;
    Samples work(x.begin(), x.end());
    if (dc.estimate_cfo) {
        const std::size_t w = coarse_start + L;
        if (w + L <= work.size()) {
            res.int_cfo_bins = estimate_int_cfo(std::span<const Complex>(work).subspan(w, L), spec, cfg, dc.int_cfo_range);
            if (res.int_cfo_bins != 0)
                rotate(work, -res.int_cfo_bins * cfg.subcarrier_spacing(), cfg.sample_rate);
        }
    }
    Samples tpl(spec.syncp.begin(), spec.syncp.end());
    for (const auto& v : spec.syncp) tpl.push_back(-v);
    const double e_tpl = energy(tpl);
    const std::size_t offset = (spec.n_syncp - 1) * L;

    const std::size_t lo = coarse_start > dc.search_range ? coarse_start - dc.search_range : 0;
    const std::size_t hi = coarse_start + dc.search_range;
    double best = -1.0;
    std::size_t best_tau = coarse_start;
    for (std::size_t tau = lo; tau <= hi; ++tau) {
        const std::size_t pos = tau + offset;
        if (pos + tpl.size() > work.size()) break;
        Complex acc{};
        double e = 0.0;
        for (std::size_t m = 0; m < tpl.size(); ++m) {
            acc += work[pos + m] * std::conj(tpl[m]);
            e += std::norm(work[pos + m]);
        }
        const double v = e > 0.0 ? std::abs(acc) / std::sqrt(e * e_tpl) : 0.0;
        if (v > best) {
            best = v;
            best_tau = tau;
        }
    }
    res.metric_peak = std::max(best, 0.0);
    res.start_index = best_tau;
    res.detected = best >= dc.stage2_threshold;
    return res;
}

/// Full two-stage detector over one signal window. On the PLC link
/// (estimate_cfo = false) every CFO step is skipped.
inline DetectionResult hybrid_detect(std::span<const Complex> signal, const PreambleSpec& spec, const OfdmConfig& cfg,
                                     const DetectorConfig& dc = {}) {
    const std::size_t L = spec.symbol_len;
    DetectionResult failed;
    if (signal.size() <= 2 * L) return failed;
    Samples x = dc.band_filter ? band_filter(signal, cfg, dc) : Samples(signal.begin(), signal.end());

    const auto d = delayed_corr(x, L);
    const std::size_t run_needed = L / 4;
    std::size_t t0 = d.metric.size();
    for (std::size_t t = 0, run = 0; t < d.metric.size(); ++t) {
        run = d.metric[t] > dc.stage1_threshold ? run + 1 : 0;
        if (run >= run_needed) {
            t0 = t + 1 - run;
            break;
        }
    }
    if (t0 == d.metric.size()) return failed;

    // The plateau phase flips where the lagged window crosses into SYNCM;
    // the zero crossing sits (n_syncp - 1.5) symbols after the start.
    Complex ref{};
    for (std::size_t t = t0; t < std::min(t0 + L, d.corr.size()); ++t) ref += d.corr[t];
    const Complex unit = std::abs(ref) > 0.0 ? ref / std::abs(ref) : Complex{1.0, 0.0};
    auto proj = [&](std::size_t t) { return (d.corr[t] * std::conj(unit)).real(); };
    std::size_t coarse = t0;
    const std::size_t flip_end = std::min(d.corr.size(), t0 + (spec.n_syncp + 1) * L);
    for (std::size_t t = t0 + L / 2; t < flip_end; ++t) {
        if (proj(t) < 0.0) {
            // least-squares line through the projection around the crossing
            const std::size_t a = t > L / 4 ? t - L / 4 : 0;
            const std::size_t b = std::min(d.corr.size(), t + L / 4);
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            const double nn = static_cast<double>(b - a);
            for (std::size_t u = a; u < b; ++u) {
                const double xu = static_cast<double>(u) - static_cast<double>(t);
                const double yu = proj(u);
                sx += xu;
                sy += yu;
                sxx += xu * xu;
                sxy += xu * yu;
            }
            const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
            const double icpt = (sy - slope * sx) / nn;
            const double tz = static_cast<double>(t) + (slope < 0.0 ? -icpt / slope : 0.0);
            const double start = tz - (static_cast<double>(spec.n_syncp) - 1.5) * static_cast<double>(L);
            coarse = start > 0.0 ? static_cast<std::size_t>(std::lround(start)) : 0;
            break;
        }
    }

    double frac = 0.0;
    if (dc.estimate_cfo) {
        Complex acc{};
        const std::size_t margin = L / 8;
        const std::size_t a = coarse + margin;
        const std::size_t b = std::min(d.corr.size(), coarse + (spec.n_syncp - 2) * L - margin);
        for (std::size_t t = a; t < b; ++t) acc += d.corr[t];
        if (b <= a) acc = ref;
        frac = frac_cfo_estimate(acc, L, cfg.sample_rate);
        rotate(x, -frac, cfg.sample_rate);
    }

    DetectionResult res = cross_corr_refine(x, coarse, spec, cfg, dc);
    res.frac_cfo_hz = frac;
    if (!dc.estimate_cfo) res.int_cfo_bins = 0;
    return res;
}

}  // namespace hybridlink

#pragma once

// Monte Carlo driver: one trial pushes a frame of information bits through
// both transmit chains, the channels and noise, each receiver and the
// selected combiner, then counts decoding errors.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "hybridlink/channel.hpp"
#include "hybridlink/combining.hpp"
#include "hybridlink/estimation.hpp"
#include "hybridlink/fec.hpp"
#include "hybridlink/noise.hpp"
#include "hybridlink/ofdm.hpp"
#include "hybridlink/scenario.hpp"
#include "hybridlink/sync.hpp"

namespace hybridlink {

struct TrialResult {
    std::uint64_t bit_errors = 0;
    std::uint64_t bits = 0;
    bool erased = false;
};

struct BerPoint {
    double ebno_db = 0.0;
    Scheme scheme = Scheme::psdc;
    std::uint64_t bit_errors = 0;
    std::uint64_t bits = 0;
    double ber = 0.0;
    double ci95_halfwidth = 0.0;
};

// Random stream purposes within one trial.
enum class StreamPurpose : std::uint64_t { bits = 0, wl_channel = 1, plc_noise = 2, wl_noise = 3, plc_timing = 4, wl_timing = 5 };

inline RngStream trial_stream(std::uint64_t seed, std::uint64_t trial_id, StreamPurpose p) {
    return RngStream(seed, trial_id * 16 + static_cast<std::uint64_t>(p));
}

/// Number of data-bearing cells in one frame of a link.
inline std::size_t data_cells(const LinkScenario& l) {
    const std::size_t S = l.ofdm.symbols_per_frame;
    const std::size_t K = l.ofdm.active_count();
    if (!is_differential(l.modulation)) return S * K;
    return diff_mode(l.modulation) == DiffMode::tddm ? (S - 1) * K : S * (K - 1);
}

inline std::size_t data_symbol_rows(const LinkScenario& l) {
    const std::size_t S = l.ofdm.symbols_per_frame;
    return l.modulation == Modulation::dbpsk_tddm ? S - 1 : S;
}

/// Static frame layout shared by every trial of a scenario.
struct FrameLayout {
    std::size_t coded_cells = 0;  // cells carrying code bits on every used link
    std::size_t info_bits = 0;
    std::size_t coded_bits = 0;
    std::size_t interleaver_rows = 0;
    std::size_t interleaver_cols = 0;
};

inline FrameLayout frame_layout(const Scenario& sc) {
    FrameLayout f;
    std::size_t rows_hint = 0;
    std::size_t cells = std::numeric_limits<std::size_t>::max();
    for (const auto* l : {&sc.plc, &sc.wl}) {
        if ((l == &sc.plc && !sc.uses_plc()) || (l == &sc.wl && !sc.uses_wl())) continue;
        if (data_cells(*l) < cells) {
            cells = data_cells(*l);
            rows_hint = data_symbol_rows(*l);
        }
    }
    f.coded_cells = cells;
    if (!sc.fec) {
        f.info_bits = f.coded_bits = cells;
        return f;
    }
    CodeConfig code;
    f.info_bits = code.info_len_for(cells);
    if (f.info_bits == 0) throw ConfigError("frame too short for the convolutional code");
    f.coded_bits = code.coded_len(f.info_bits);
    std::size_t rows = sc.interleaver_rows;
    if (rows == 0) {
        rows = rows_hint;
        if (f.coded_bits % rows != 0) {
            rows = static_cast<std::size_t>(std::sqrt(static_cast<double>(f.coded_bits)));
            while (rows > 1 && f.coded_bits % rows != 0) --rows;
        }
    }
    if (rows == 0 || f.coded_bits % rows != 0)
        throw ConfigError("interleaver rows must divide the coded frame length (" + std::to_string(f.coded_bits) + ")");
    f.interleaver_rows = rows;
    f.interleaver_cols = f.coded_bits / rows;
    return f;
}

/// Information bits per transmitted data-frame cell on one link. Eb is the
/// frame's transmitted energy (unit power per cell, references included)
/// divided by the information bits it carries.
inline double effective_rate(const FrameLayout& f, const LinkScenario& l) {
    return static_cast<double>(f.info_bits) /
           static_cast<double>(l.ofdm.symbols_per_frame * l.ofdm.active_count());
}

namespace detail {

inline ChannelRealization realize_channel(const LinkScenario& l, RngStream& stream) {
    switch (l.channel.kind) {
        case ChannelSpec::Kind::preset: return plc_channel(l.channel.preset, l.ofdm);
        case ChannelSpec::Kind::taps: return plc_channel(l.channel.taps, l.ofdm);
        case ChannelSpec::Kind::rayleigh: return rayleigh_block(stream, l.ofdm, l.channel.rayleigh_taps);
    }
    throw ConfigError("unhandled channel kind");
}

// Symbol grid carrying `symbols` (+-1 per data cell) for one link.
inline SymbolGrid build_grid(const LinkScenario& l, std::span<const double> symbols) {
    const std::size_t S = l.ofdm.symbols_per_frame;
    const std::size_t K = l.ofdm.active_count();
    const bool diff = is_differential(l.modulation);
    const DiffMode mode = diff_mode(l.modulation);
    SymbolGrid g(S, K, Complex{1.0, 0.0});
    std::size_t i = 0;
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t k = 0; k < K; ++k)
            if (is_data_cell(s, k, diff, mode) && i < symbols.size()) g(s, k) = symbols[i++];
    return diff ? diff_encode(g, mode) : g;
}

struct LinkReception {
    bool active = false;  // link contributes soft values
    bool failed = false;  // acquisition failed
    SymbolGrid rx;        // received data cells
    SymbolGrid noise;     // noise-only cells through the same receiver
    std::vector<Complex> gains;
    NoiseStats stats;
    std::vector<std::size_t> symbol_region;
    std::vector<double> instantaneous;
};

struct LinkRun {
    const LinkScenario* link = nullptr;
    Link id = Link::plc;
    double ebno_db = 0.0;
    StreamPurpose noise_purpose = StreamPurpose::plc_noise;
    StreamPurpose timing_purpose = StreamPurpose::plc_timing;
    bool estimate_cfo = false;
};

inline LinkReception receive_link(const Scenario& sc, const LinkRun& run, const SymbolGrid& tx_grid,
                                  const ChannelRealization& ch, std::span<const double> cell_power,
                                  std::uint64_t trial_id, double code_rate, const PreambleSpec* preamble) {
    const LinkScenario& l = *run.link;
    const OfdmConfig& cfg = l.ofdm;
    LinkReception out;
    if (std::isinf(run.ebno_db) && run.ebno_db < 0) return out;  // infinitely noisy: no contribution
    out.active = true;

    const bool with_preamble = sc.receiver != ReceiverMode::genie;
    RngStream timing = trial_stream(sc.seed, trial_id, run.timing_purpose);
    const std::size_t lead = sc.receiver == ReceiverMode::full && sc.max_lead > 0 ? timing.below(sc.max_lead) : 0;

    ComplexFrame tx{Samples(lead), Domain::time};
    if (with_preamble) {
        const auto pre = gen_preamble(*preamble);
        tx.data.insert(tx.data.end(), pre.data.begin(), pre.data.end());
    }
    const std::size_t data_start = tx.size();
    const auto body = modulate(tx_grid, cfg);
    tx.data.insert(tx.data.end(), body.data.begin(), body.data.end());
    if (with_preamble) tx.data.resize(tx.size() + cfg.symbol_len(), Complex{});  // tail room for detection

    ComplexFrame rx = apply(tx, ch);
    if (l.cfo_hz != 0.0) rotate(rx.data, l.cfo_hz, cfg.sample_rate);

    // Noise
    NoiseModel model = l.noise.model;
    std::size_t phase = 0;
    Samples noise(rx.size());
    std::vector<double> state_var(rx.size(), 0.0);
    if (l.noise.enabled) {
        model = calibrate_to_ebno(model, run.ebno_db, LinkBudget{1.0, code_rate, 1.0});
        if (const auto* cy = std::get_if<CycloParams>(&model))
            phase = l.noise.ac_phase ? *l.noise.ac_phase : timing.below(cy->period_samples);
        RngStream ns = trial_stream(sc.seed, trial_id, run.noise_purpose);
        noise = sample(model, rx.size(), ns, phase, &state_var).data;
        for (std::size_t i = 0; i < rx.size(); ++i) rx[i] += noise[i];
    }

    // Timing and CFO
    std::size_t start = lead;  // preamble start
    if (sc.receiver == ReceiverMode::full) {
        DetectorConfig dc = sc.detector;
        dc.estimate_cfo = run.estimate_cfo;
        const auto det = hybrid_detect(rx.data, *preamble, cfg, dc);
        if (!det.detected) {
            out.failed = true;
            return out;
        }
        start = det.start_index;
        const double cfo = det.cfo_hz(cfg.subcarrier_spacing());
        if (cfo != 0.0) rotate(rx.data, -cfo, cfg.sample_rate);
    }
    const std::size_t body_start = start + (data_start - lead);
    const std::size_t body_len = cfg.symbols_per_frame * cfg.symbol_len();
    if (body_start + body_len > rx.size()) {
        out.failed = true;
        return out;
    }
    out.rx = demodulate(std::span<const Complex>(rx.data).subspan(body_start, body_len), cfg);
    out.noise = demodulate(std::span<const Complex>(noise).subspan(body_start, body_len), cfg);

    // Region of each data symbol: the one dominating the noise in its DFT window.
    const std::size_t S = cfg.symbols_per_frame;
    out.symbol_region.assign(S, 0);
    std::size_t n_regions = 1;
    if (const auto* cy = std::get_if<CycloParams>(&model); cy && l.noise.enabled) {
        n_regions = cy->regions.size();
        for (std::size_t s = 0; s < S; ++s) {
            const std::size_t first = data_start + s * cfg.symbol_len() + cfg.cp_len;
            out.symbol_region[s] = cy->dominant_region(first, cfg.fft_size, phase);
        }
    }

    const NoiseStats truth = l.noise.enabled ? true_stats(model, cfg) : NoiseStats{0.0, {std::vector<double>(cfg.active_count(), 0.0)}, {1.0}};
    const bool wireless = run.id == Link::wireless;
    if (sc.receiver == ReceiverMode::genie) {
        out.gains = ch.gains;
        out.stats = truth;
    } else {
        const auto [prx, known] = preamble_grids(rx.data, start, *preamble, cfg);
        out.gains = ls_channel_estimate(prx, known).gains;
        if (sc.psd_estimator == PsdEstimator::residual) {
            out.stats = to_noise_stats(
                noise_psd_estimate_residual(out.rx, out.symbol_region, n_regions, out.gains, sc.psd_floor, cell_power));
        } else {
            std::vector<double> hp(out.gains.size());
            for (std::size_t k = 0; k < hp.size(); ++k) hp[k] = std::norm(out.gains[k]);
            out.stats = to_noise_stats(noise_psd_estimate(out.rx, out.symbol_region, n_regions, hp, sc.psd_floor, cell_power));
        }
    }
    if (wireless && out.stats.psd.size() > 1) out.stats = flatten(out.stats);

    if (sc.scheme != Scheme::isc) return out;
    InstantaneousContext ctx;
    ctx.noise = &out.noise;
    ctx.received = &out.rx;
    ChannelEstimate est{out.gains, EstimateSource::ls_preamble};
    ctx.channel = &est;
    std::vector<double> sym_power;
    if (sc.isc_mode == InstantaneousMode::symbol) {
        // The trace is indexed by transmit position; after a timing error the
        // receiver window is still credited with the true generating powers.
        const std::span<const double> body(state_var.data() + data_start, body_len);
        std::vector<std::size_t> rows;
        std::vector<std::vector<double>> shape(1, std::vector<double>(cfg.active_count(), 1.0));
        if (const auto* cy = std::get_if<CycloParams>(&model); cy && l.noise.enabled) {
            rows.resize(body_len);
            for (std::size_t t = 0; t < body_len; ++t) rows[t] = cy->region_at(data_start + t, phase);
            shape = truth.psd;
            for (std::size_t r = 0; r < shape.size(); ++r)
                for (double& v : shape[r]) v /= cy->base_variance * cy->regions[r].multiplier;
        }
        sym_power = symbol_noise_power(body, rows, shape, cfg);
        ctx.symbol_power = &sym_power;
    }
    out.instantaneous = instantaneous_noise_power(sc.isc_mode, ctx);
    return out;
}

// Soft values of one link for the given scheme, over its data cells.
inline std::vector<double> link_soft_values(const Scenario& sc, const LinkScenario& l, const LinkReception& r, Link id) {
    const std::size_t S = l.ofdm.symbols_per_frame;
    const std::size_t K = l.ofdm.active_count();
    const bool diff = is_differential(l.modulation);
    const DiffMode mode = diff_mode(l.modulation);

    Denominator den_kind = Denominator::psd;
    switch (sc.scheme) {
        case Scheme::asc: den_kind = Denominator::average; break;
        case Scheme::isc: den_kind = Denominator::instantaneous; break;
        case Scheme::mixed: den_kind = id == Link::wireless ? Denominator::average : Denominator::psd; break;
        case Scheme::plc_only:
        case Scheme::wl_only: den_kind = sc.single_denominator; break;
        default: den_kind = Denominator::psd; break;
    }
    const auto den = cell_denominators(den_kind, r.stats, r.symbol_region, r.instantaneous, S, K, sc.psd_floor);

    if (sc.scheme == Scheme::egc) {
        return diff ? differential_soft(r.rx, mode, id).llrs : coherent_soft(r.rx, r.gains, id).llrs;
    }
    if (diff) {
        if (sc.scheme == Scheme::dssc || sc.scheme == Scheme::mixed) return dssc_llrs(r.rx, mode, den, id).llrs;
        // expected signal power: the channel average for ASC, per bin otherwise
        std::vector<double> power(K);
        for (std::size_t k = 0; k < K; ++k) power[k] = std::norm(r.gains[k]);
        if (den_kind == Denominator::average) {
            double mean = 0.0;
            for (double p : power) mean += p / static_cast<double>(K);
            std::fill(power.begin(), power.end(), mean);
        }
        return differential_llrs(r.rx, mode, den, id, power).llrs;
    }
    return coherent_llrs(r.rx, r.gains, den, id).llrs;
}

}  // namespace detail

/// One frame end to end. Deterministic in (scenario.seed, trial_id); the
/// PLC Eb/N0 is `ebno_db`, the wireless link runs at scenario.wl_ebno_db.
/// Everything one trial produces before decoding: the information bits and
/// the combined soft value of every coded cell.
struct TrialSoft {
    Bits info;
    std::vector<double> combined;  // coded_cells long, positive favours bit 0
    bool erased = false;
};

inline TrialSoft trial_soft_values(const Scenario& sc, double ebno_db, std::uint64_t trial_id) {
    const FrameLayout layout = frame_layout(sc);
    const CodeConfig code;
    const double plc_rate = effective_rate(layout, sc.plc);
    const double wl_rate = effective_rate(layout, sc.wl);

    RngStream bit_stream = trial_stream(sc.seed, trial_id, StreamPurpose::bits);
    Bits info(layout.info_bits);
    for (auto& b : info) b = bit_stream.bit() ? 1 : 0;

    Bits coded = info;
    std::optional<BlockInterleaver> il;
    if (sc.fec) {
        il.emplace(layout.interleaver_rows, layout.interleaver_cols);
        coded = il->interleave(conv_encode(info, code));
    }
    std::vector<double> symbols(coded.size());
    for (std::size_t i = 0; i < coded.size(); ++i) symbols[i] = coded[i] ? -1.0 : 1.0;

    std::optional<PreambleSpec> plc_pre;
    std::optional<PreambleSpec> wl_pre;
    if (sc.receiver != ReceiverMode::genie) {
        if (sc.uses_plc()) plc_pre = make_preamble_spec(sc.plc.ofdm, sc.n_syncp);
        if (sc.uses_wl()) wl_pre = make_preamble_spec(sc.wl.ofdm, sc.n_syncp);
    }

    RngStream wl_ch_stream = trial_stream(sc.seed, trial_id, StreamPurpose::wl_channel);
    const ChannelRealization plc_ch = detail::realize_channel(sc.plc, wl_ch_stream);
    RngStream wl_ch_stream2 = trial_stream(sc.seed, trial_id, StreamPurpose::wl_channel);
    const ChannelRealization wl_ch = detail::realize_channel(sc.wl, wl_ch_stream2);

    SymbolGrid plc_grid;
    SymbolGrid wl_grid;
    SelectionMask mask;
    std::vector<double> plc_power;
    std::vector<double> wl_power;
    if (sc.scheme == Scheme::trsd) {
        // Ideal one-bit-per-subcarrier feedback from the true CNRs.
        const auto plc_truth = true_stats(calibrate_to_ebno(sc.plc.noise.model, ebno_db, {1.0, plc_rate, 1.0}), sc.plc.ofdm);
        const auto wl_truth = true_stats(calibrate_to_ebno(sc.wl.noise.model, sc.wl_ebno_db, {1.0, wl_rate, 1.0}), sc.wl.ofdm);
        const std::size_t K = sc.plc.ofdm.active_count();
        std::vector<double> plc_psd(K, 0.0);
        for (std::size_t r = 0; r < plc_truth.psd.size(); ++r)
            for (std::size_t k = 0; k < K; ++k) plc_psd[k] += plc_truth.region_weights[r] * plc_truth.psd[r][k];
        const std::vector<double> wl_psd(K, wl_truth.avg_power);
        const bool plc_dead = std::isinf(ebno_db) && ebno_db < 0;
        const bool wl_dead = std::isinf(sc.wl_ebno_db) && sc.wl_ebno_db < 0;
        auto c_plc = cnr(plc_ch.gains, plc_psd);
        auto c_wl = cnr(wl_ch.gains, wl_psd);
        if (plc_dead) std::fill(c_plc.begin(), c_plc.end(), -1.0);
        if (wl_dead) std::fill(c_wl.begin(), c_wl.end(), -1.0);
        mask = trsd_select(c_plc, c_wl);
        const auto full = detail::build_grid(sc.plc, symbols);
        std::tie(plc_grid, wl_grid) = trsd_apply(full, mask);
        const std::size_t S = sc.plc.ofdm.symbols_per_frame;
        plc_power.resize(S * K);
        wl_power.resize(S * K);
        for (std::size_t i = 0; i < S * K; ++i) {
            plc_power[i] = mask[i % K] ? 1.0 : 0.0;
            wl_power[i] = 1.0 - plc_power[i];
        }
    } else {
        if (sc.uses_plc()) plc_grid = detail::build_grid(sc.plc, symbols);
        if (sc.uses_wl()) wl_grid = detail::build_grid(sc.wl, symbols);
    }

    detail::LinkReception plc_rx;
    detail::LinkReception wl_rx;
    if (sc.uses_plc()) {
        detail::LinkRun run{&sc.plc, Link::plc, ebno_db, StreamPurpose::plc_noise, StreamPurpose::plc_timing, false};
        plc_rx = detail::receive_link(sc, run, plc_grid, plc_ch, plc_power, trial_id, plc_rate, plc_pre ? &*plc_pre : nullptr);
    }
    if (sc.uses_wl()) {
        detail::LinkRun run{&sc.wl, Link::wireless, sc.wl_ebno_db, StreamPurpose::wl_noise, StreamPurpose::wl_timing,
                            sc.wl_estimate_cfo};
        wl_rx = detail::receive_link(sc, run, wl_grid, wl_ch, wl_power, trial_id, wl_rate, wl_pre ? &*wl_pre : nullptr);
    }

    const bool plc_ok = plc_rx.active && !plc_rx.failed;
    const bool wl_ok = wl_rx.active && !wl_rx.failed;
    TrialSoft out;
    out.info = std::move(info);
    if (!plc_ok && !wl_ok && (plc_rx.failed || wl_rx.failed)) {
        out.erased = true;
        return out;
    }

    std::vector<double>& combined = out.combined;
    combined.assign(layout.coded_cells, 0.0);
    auto accumulate = [&](const std::vector<double>& v, const SelectionMask* sel, std::size_t K) {
        for (std::size_t i = 0; i < combined.size(); ++i)
            if (!sel || (*sel)[i % K]) combined[i] += v[i];
    };
    if (plc_ok) {
        const auto v = detail::link_soft_values(sc, sc.plc, plc_rx, Link::plc);
        if (sc.scheme == Scheme::trsd) accumulate(v, &mask, mask.size());
        else accumulate(v, nullptr, 1);
    }
    if (wl_ok) {
        auto v = detail::link_soft_values(sc, sc.wl, wl_rx, Link::wireless);
        if (sc.scheme == Scheme::trsd) {
            SelectionMask inv(mask.size());
            for (std::size_t k = 0; k < mask.size(); ++k) inv[k] = mask[k] ? 0 : 1;
            accumulate(v, &inv, inv.size());
        } else {
            accumulate(v, nullptr, 1);
        }
    }

    return out;
}

inline TrialResult run_trial(const Scenario& sc, double ebno_db, std::uint64_t trial_id) {
    const FrameLayout layout = frame_layout(sc);
    TrialSoft soft = trial_soft_values(sc, ebno_db, trial_id);
    TrialResult res;
    res.bits = layout.info_bits;
    if (soft.erased) {
        // a lost frame counts as every bit wrong
        res.bit_errors = res.bits;
        res.erased = true;
        return res;
    }
    std::vector<double>& combined = soft.combined;
    const Bits& info = soft.info;
    combined.resize(layout.coded_bits);
    Bits decided;
    if (sc.fec) {
        const BlockInterleaver il(layout.interleaver_rows, layout.interleaver_cols);
        decided = viterbi_decode(il.deinterleave(combined), CodeConfig{});
    } else {
        decided.resize(combined.size());
        for (std::size_t i = 0; i < combined.size(); ++i) decided[i] = combined[i] < 0.0 ? 1 : 0;
    }
    for (std::size_t i = 0; i < info.size(); ++i) res.bit_errors += decided[i] != info[i];
    return res;
}

inline double ci95(std::uint64_t errors, std::uint64_t bits) {
    if (bits == 0) return 0.0;
    const double p = static_cast<double>(errors) / static_cast<double>(bits);
    return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(bits));
}

/// Runs trials 0, 1, 2, ... at one Eb/N0 until the stop rule holds. The
/// trial set is fixed by trial order, so the result does not depend on the
/// number of workers.
inline BerPoint run_point(const Scenario& sc, double ebno_db, unsigned workers = 1) {
    sc.validate();
    workers = std::max(1u, workers);
    BerPoint pt;
    pt.ebno_db = ebno_db;
    pt.scheme = sc.scheme;
    std::uint64_t next = 0;
    bool done = false;
    while (!done) {
        const std::uint64_t chunk = std::max<std::uint64_t>(8, 4ull * workers);
        std::vector<TrialResult> results(chunk);
        std::atomic<std::uint64_t> cursor{0};
        auto work = [&] {
            for (std::uint64_t i; (i = cursor.fetch_add(1)) < chunk;) results[i] = run_trial(sc, ebno_db, next + i);
        };
        if (workers == 1) {
            work();
        } else {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        }
        for (const auto& r : results) {
            pt.bit_errors += r.bit_errors;
            pt.bits += r.bits;
            if (pt.bit_errors >= sc.stop.min_errors || pt.bits >= sc.stop.max_bits) {
                done = true;
                break;
            }
        }
        next += chunk;
    }
    pt.ber = static_cast<double>(pt.bit_errors) / static_cast<double>(pt.bits);
    pt.ci95_halfwidth = ci95(pt.bit_errors, pt.bits);
    return pt;
}

inline std::vector<BerPoint> run_sweep(const Scenario& sc, unsigned workers = 1) {
    std::vector<BerPoint> out;
    for (double e : sc.sweep) {
        out.push_back(run_point(sc, e, workers));
        if (sc.stop_below_ber > 0.0 && out.back().ber < sc.stop_below_ber) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV output and gain reporting

inline std::string format_double(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

inline void write_csv(std::ostream& os, const std::vector<BerPoint>& points) {
    os << "scheme,ebno_db,bits,bit_errors,ber,ci95\n";
    for (const auto& p : points)
        os << to_string(p.scheme) << ',' << format_double(p.ebno_db, "%.6g") << ',' << p.bits << ',' << p.bit_errors
           << ',' << format_double(p.ber, "%.6e") << ',' << format_double(p.ci95_halfwidth, "%.6e") << '\n';
}

inline std::vector<BerPoint> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("scheme,ebno_db,bits,bit_errors,ber,ci95", 0) != 0)
        throw ConfigError("BER CSV: missing or unexpected header");
    std::vector<BerPoint> out;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 6) throw ConfigError("BER CSV line " + std::to_string(lineno) + ": expected 6 fields");
        BerPoint p;
        p.scheme = parse_scheme(f[0]);
        p.ebno_db = detail::to_double("ebno_db", f[1]);
        p.bits = detail::to_count("bits", f[2]);
        p.bit_errors = detail::to_count("bit_errors", f[3]);
        p.ber = detail::to_double("ber", f[4]);
        p.ci95_halfwidth = detail::to_double("ci95", f[5]);
        out.push_back(p);
    }
    return out;
}

inline std::vector<BerPoint> load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    return read_csv(in);
}

/// Eb/N0 at which a curve crosses `target`, interpolating log10(BER)
/// linearly between the bracketing points. Empty when the curve never
/// reaches the target. Points are taken in ascending Eb/N0 order.
inline std::optional<double> ebno_at_ber(std::vector<BerPoint> curve, double target) {
    if (!(target > 0.0)) throw DomainError("target BER must be positive");
    std::sort(curve.begin(), curve.end(), [](const BerPoint& a, const BerPoint& b) { return a.ebno_db < b.ebno_db; });
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const double b0 = curve[i].ber;
        const double b1 = curve[i + 1].ber;
        if (b0 >= target && b1 <= target) {
            if (b0 == b1) return curve[i].ebno_db;
            if (b1 <= 0.0) return curve[i + 1].ebno_db;  // log of zero: fall back to the upper point
            const double t = (std::log10(b0) - std::log10(target)) / (std::log10(b0) - std::log10(b1));
            return curve[i].ebno_db + t * (curve[i + 1].ebno_db - curve[i].ebno_db);
        }
    }
    if (!curve.empty() && curve.front().ber == target) return curve.front().ebno_db;
    return std::nullopt;
}

struct GainRow {
    Scheme scheme = Scheme::psdc;
    std::optional<double> ebno_db;           // curve crossing
    std::optional<double> baseline_ebno_db;  // baseline crossing
    std::optional<double> gain_db;           // baseline minus curve
};

/// One row per scheme present in `points`; positive gain = curve needs
/// less Eb/N0 than the baseline.
inline std::vector<GainRow> report(const std::vector<BerPoint>& points, const std::vector<BerPoint>& baseline,
                                   double target_ber) {
    const auto base = ebno_at_ber(baseline, target_ber);
    std::vector<GainRow> rows;
    std::vector<Scheme> order;
    for (const auto& p : points)
        if (std::find(order.begin(), order.end(), p.scheme) == order.end()) order.push_back(p.scheme);
    for (Scheme s : order) {
        std::vector<BerPoint> curve;
        for (const auto& p : points)
            if (p.scheme == s) curve.push_back(p);
        GainRow r;
        r.scheme = s;
        r.ebno_db = ebno_at_ber(curve, target_ber);
        r.baseline_ebno_db = base;
        if (r.ebno_db && base) r.gain_db = *base - *r.ebno_db;
        rows.push_back(r);
    }
    return rows;
}

inline void write_report(std::ostream& os, const std::vector<GainRow>& rows, double target_ber) {
    auto cell = [](const std::optional<double>& v) { return v ? format_double(*v, "%.3f") : std::string("not reached"); };
    os << "scheme,target_ber,ebno_db,baseline_ebno_db,gain_db\n";
    for (const auto& r : rows)
        os << to_string(r.scheme) << ',' << format_double(target_ber, "%.3g") << ',' << cell(r.ebno_db) << ','
           << cell(r.baseline_ebno_db) << ',' << cell(r.gain_db) << '\n';
}

}  // namespace hybridlink

#pragma once

// Experiment description and its flat "key = value" config format.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hybridlink/channel.hpp"
#include "hybridlink/combining.hpp"
#include "hybridlink/estimation.hpp"
#include "hybridlink/noise.hpp"
#include "hybridlink/ofdm.hpp"
#include "hybridlink/sync.hpp"

namespace hybridlink {

enum class Modulation { bpsk_coherent, dbpsk_tddm, dbpsk_fddm };
enum class Scheme { plc_only, wl_only, asc, isc, psdc, trsd, dssc, mixed, egc };
enum class ReceiverMode { genie, estimated, full };
// How the estimated receiver measures the noise PSD.
enum class PsdEstimator { residual, subtract };

inline bool is_differential(Modulation m) { return m != Modulation::bpsk_coherent; }
inline DiffMode diff_mode(Modulation m) { return m == Modulation::dbpsk_fddm ? DiffMode::fddm : DiffMode::tddm; }

inline const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::plc_only: return "plc_only";
        case Scheme::wl_only: return "wl_only";
        case Scheme::asc: return "asc";
        case Scheme::isc: return "isc";
        case Scheme::psdc: return "psdc";
        case Scheme::trsd: return "trsd";
        case Scheme::dssc: return "dssc";
        case Scheme::mixed: return "mixed";
        case Scheme::egc: return "egc";
    }
    return "?";
}

inline Scheme parse_scheme(const std::string& s) {
    for (auto v : {Scheme::plc_only, Scheme::wl_only, Scheme::asc, Scheme::isc, Scheme::psdc, Scheme::trsd,
                   Scheme::dssc, Scheme::mixed, Scheme::egc})
        if (s == to_string(v)) return v;
    throw ConfigError("unknown scheme: " + s);
}

inline const char* to_string(Modulation m) {
    switch (m) {
        case Modulation::bpsk_coherent: return "bpsk_coherent";
        case Modulation::dbpsk_tddm: return "dbpsk_tddm";
        case Modulation::dbpsk_fddm: return "dbpsk_fddm";
    }
    return "?";
}

inline Modulation parse_modulation(const std::string& s) {
    for (auto v : {Modulation::bpsk_coherent, Modulation::dbpsk_tddm, Modulation::dbpsk_fddm})
        if (s == to_string(v)) return v;
    throw ConfigError("unknown modulation: " + s);
}

struct ChannelSpec {
    enum class Kind { preset, taps, rayleigh } kind = Kind::preset;
    std::string preset = "flat";
    std::vector<Complex> taps;
    std::size_t rayleigh_taps = 4;
};

struct NoiseSpec {
    bool enabled = true;
    NoiseModel model = AwgnParams{};
    std::optional<std::size_t> ac_phase;  // cyclostationary only; random per frame when unset
};

struct LinkScenario {
    OfdmConfig ofdm;
    NoiseSpec noise;
    ChannelSpec channel;
    Modulation modulation = Modulation::bpsk_coherent;
    double cfo_hz = 0.0;
};

struct StopRule {
    std::uint64_t min_errors = 100;
    std::uint64_t max_bits = 100'000'000;
};

struct Scenario {
    LinkScenario plc = default_plc();
    LinkScenario wl = default_wireless();
    Scheme scheme = Scheme::psdc;
    std::vector<double> sweep{0, 2, 4, 6, 8, 10};  // PLC Eb/N0 [dB]
    double wl_ebno_db = 3.0;
    bool fec = true;
    std::uint64_t seed = 1;
    StopRule stop;
    double stop_below_ber = 0.0;  // skip the rest of the sweep once BER drops below this
    ReceiverMode receiver = ReceiverMode::estimated;
    InstantaneousMode isc_mode = InstantaneousMode::symbol;
    DetectorConfig detector;
    bool wl_estimate_cfo = false;
    std::size_t n_syncp = 8;
    std::size_t max_lead = 256;  // full-chain runs: random idle samples before the preamble
    std::size_t interleaver_rows = 0;  // 0 = one row per data symbol
    double psd_floor = 1e-6;
    PsdEstimator psd_estimator = PsdEstimator::residual;
    Denominator single_denominator = Denominator::average;  // plc_only / wl_only receivers

    static LinkScenario default_plc() {
        LinkScenario l;
        l.noise.model = CycloParams{};
        l.channel.preset = "lowpass3";
        return l;
    }

    static LinkScenario default_wireless() {
        LinkScenario l;
        l.noise.model = GmParams{};
        l.channel.kind = ChannelSpec::Kind::rayleigh;
        return l;
    }

    bool uses_plc() const { return scheme != Scheme::wl_only; }
    bool uses_wl() const { return scheme != Scheme::plc_only; }

    void validate() const {
        plc.ofdm.validate();
        wl.ofdm.validate();
        if (sweep.empty()) throw ConfigError("sweep must contain at least one Eb/N0 value");
        if (stop.min_errors == 0 || stop.max_bits == 0) throw ConfigError("stop rule limits must be positive");
        const bool plc_diff = is_differential(plc.modulation);
        const bool wl_diff = is_differential(wl.modulation);
        switch (scheme) {
            case Scheme::trsd:
                if (plc_diff || wl_diff) throw ConfigError("trsd needs coherent BPSK on both links");
                if (plc.ofdm.active_subcarriers != wl.ofdm.active_subcarriers ||
                    plc.ofdm.symbols_per_frame != wl.ofdm.symbols_per_frame)
                    throw ConfigError("trsd needs identical subcarrier grids on both links");
                break;
            case Scheme::dssc:
                if (!plc_diff || !wl_diff) throw ConfigError("dssc needs differential modulation on both links");
                break;
            case Scheme::mixed:
                if (!plc_diff || wl_diff) throw ConfigError("mixed needs differential PLC and coherent wireless");
                break;
            default: break;
        }
        for (const auto* l : {&plc, &wl}) {
            if (l->modulation == Modulation::dbpsk_tddm && l->ofdm.symbols_per_frame < 2)
                throw ConfigError("TDDM needs at least two symbols per frame");
            if (l->modulation == Modulation::dbpsk_fddm && l->ofdm.active_count() < 2)
                throw ConfigError("FDDM needs at least two active subcarriers");
            if (l->channel.kind == ChannelSpec::Kind::preset) plc_preset_taps(l->channel.preset);
        }
        if (n_syncp < 3) throw ConfigError("sync.n_syncp must be at least 3");
    }
};

// ---------------------------------------------------------------------------
// Config file parsing

/// key = value lines; '#' comments; keys are dotted paths.
inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string{};
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second) throw ConfigError("duplicate key: " + key);
    }
    return kv;
}

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
    if (v == "-inf") return -std::numeric_limits<double>::infinity();
    if (v == "inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: " + v);
    }
    if (used != v.size()) throw ConfigError(key + ": not a number: " + v);
    return d;
}

inline std::uint64_t to_count(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19) throw ConfigError(key + ": expected a nonnegative integer");
    return static_cast<std::uint64_t>(d);
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected on/off");
}

inline std::vector<std::string> split(const std::string& v, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(v);
    while (std::getline(in, cur, sep)) {
        const auto a = cur.find_first_not_of(" \t");
        const auto b = cur.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(cur.substr(a, b - a + 1));
    }
    return out;
}

inline std::vector<double> to_doubles(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split(v, ',')) out.push_back(to_double(key, s));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

// "a:b:c" inclusive ranges are accepted alongside comma lists.
inline std::vector<double> to_sweep(const std::string& key, const std::string& v) {
    if (v.find(':') != std::string::npos && v.find(',') == std::string::npos) {
        const auto parts = split(v, ':');
        if (parts.size() != 3) throw ConfigError(key + ": range must be start:step:stop");
        const double a = to_double(key, parts[0]);
        const double step = to_double(key, parts[1]);
        const double b = to_double(key, parts[2]);
        if (!(step > 0.0) || b < a) throw ConfigError(key + ": invalid range");
        std::vector<double> out;
        for (std::size_t i = 0;; ++i) {
            const double x = a + step * static_cast<double>(i);
            if (x > b + 1e-9) break;
            out.push_back(std::round(x * 1e9) / 1e9);
        }
        return out;
    }
    return to_doubles(key, v);
}

// "23-58" or "23,24,30-40"
inline std::vector<std::size_t> to_subcarriers(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    for (const auto& part : split(v, ',')) {
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            out.push_back(to_count(key, part));
        } else {
            const auto a = to_count(key, part.substr(0, dash));
            const auto b = to_count(key, part.substr(dash + 1));
            if (b < a) throw ConfigError(key + ": descending range");
            for (auto k = a; k <= b; ++k) out.push_back(k);
        }
    }
    return out;
}

// "re im; re im; ..."
inline std::vector<Complex> to_taps(const std::string& key, const std::string& v) {
    std::vector<Complex> taps;
    for (const auto& t : split(v, ';')) {
        const auto xs = split(t, ' ');
        if (xs.empty() || xs.size() > 2) throw ConfigError(key + ": taps are 're im' pairs separated by ';'");
        taps.emplace_back(to_double(key, xs[0]), xs.size() == 2 ? to_double(key, xs[1]) : 0.0);
    }
    if (taps.empty()) throw ConfigError(key + ": empty tap list");
    return taps;
}

class KeyReader {
public:
    explicit KeyReader(const std::map<std::string, std::string>& kv) : kv_(kv) {}

    const std::string* get(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return nullptr;
        used_.insert(key);
        return &it->second;
    }

    void check_all_used() const {
        for (const auto& [k, v] : kv_)
            if (!used_.count(k)) throw ConfigError("unknown config key: " + k);
    }

private:
    const std::map<std::string, std::string>& kv_;
    std::set<std::string> used_;
};

inline void read_ofdm(KeyReader& r, const std::string& prefix, OfdmConfig& o) {
    if (auto v = r.get(prefix + "fft_size")) o.fft_size = to_count(prefix + "fft_size", *v);
    if (auto v = r.get(prefix + "cp_len")) o.cp_len = to_count(prefix + "cp_len", *v);
    if (auto v = r.get(prefix + "subcarriers")) o.active_subcarriers = to_subcarriers(prefix + "subcarriers", *v);
    if (auto v = r.get(prefix + "sample_rate")) o.sample_rate = to_double(prefix + "sample_rate", *v);
    if (auto v = r.get(prefix + "symbols_per_frame")) o.symbols_per_frame = to_count(prefix + "symbols_per_frame", *v);
}

inline void read_link(KeyReader& r, const std::string& name, LinkScenario& l, const OfdmConfig& shared) {
    const std::string p = name + ".";
    l.ofdm = shared;
    read_ofdm(r, p + "ofdm.", l.ofdm);
    if (auto v = r.get(p + "modulation")) l.modulation = parse_modulation(*v);
    if (auto v = r.get(p + "cfo_hz")) l.cfo_hz = to_double(p + "cfo_hz", *v);

    if (auto v = r.get(p + "channel")) {
        if (*v == "rayleigh") {
            l.channel.kind = ChannelSpec::Kind::rayleigh;
        } else if (*v == "taps") {
            l.channel.kind = ChannelSpec::Kind::taps;
        } else if (*v == "file") {
            l.channel.kind = ChannelSpec::Kind::taps;
        } else {
            l.channel.kind = ChannelSpec::Kind::preset;
            l.channel.preset = *v;
        }
    }
    if (auto v = r.get(p + "channel.taps")) {
        l.channel.kind = ChannelSpec::Kind::taps;
        l.channel.taps = to_taps(p + "channel.taps", *v);
    }
    if (auto v = r.get(p + "channel.file")) {
        l.channel.kind = ChannelSpec::Kind::taps;
        l.channel.taps = load_taps_file(*v);
    }
    if (l.channel.kind == ChannelSpec::Kind::taps && l.channel.taps.empty())
        throw ConfigError(p + "channel: tap list requires channel.taps or channel.file");
    if (auto v = r.get(p + "channel.rayleigh_taps")) l.channel.rayleigh_taps = to_count(p + "channel.rayleigh_taps", *v);

    std::string kind;
    if (std::holds_alternative<AwgnParams>(l.noise.model)) kind = "awgn";
    else if (std::holds_alternative<GmParams>(l.noise.model)) kind = "gm";
    else kind = "cyclo";
    if (auto v = r.get(p + "noise")) {
        kind = *v;
        l.noise.enabled = kind != "off";
        if (kind == "awgn") l.noise.model = AwgnParams{};
        else if (kind == "gm") l.noise.model = GmParams{};
        else if (kind == "cyclo") l.noise.model = CycloParams{};
        else if (kind != "off") throw ConfigError(p + "noise: expected off, awgn, gm or cyclo");
    }

    GmParams gm = std::holds_alternative<GmParams>(l.noise.model) ? std::get<GmParams>(l.noise.model) : GmParams{};
    if (auto v = r.get(p + "noise.gm.weights")) gm.weights = to_doubles(p + "noise.gm.weights", *v);
    if (auto v = r.get(p + "noise.gm.variances")) gm.variances = to_doubles(p + "noise.gm.variances", *v);
    if (kind == "gm") {
        gm.validate();
        l.noise.model = gm;
    }

    CycloParams cy = std::holds_alternative<CycloParams>(l.noise.model) ? std::get<CycloParams>(l.noise.model) : CycloParams{};
    double ac_hz = 60.0;
    if (auto v = r.get(p + "noise.cyclo.ac_hz")) ac_hz = to_double(p + "noise.cyclo.ac_hz", *v);
    if (!(ac_hz > 0.0)) throw ConfigError(p + "noise.cyclo.ac_hz must be positive");
    cy.period_samples = CycloParams::period_for(l.ofdm.sample_rate, ac_hz);
    if (auto v = r.get(p + "noise.cyclo.period_samples")) cy.period_samples = to_count(p + "noise.cyclo.period_samples", *v);
    std::vector<double> starts;
    std::vector<double> mults;
    for (const auto& reg : cy.regions) {
        starts.push_back(reg.start_fraction);
        mults.push_back(reg.multiplier);
    }
    if (auto v = r.get(p + "noise.cyclo.starts")) starts = to_doubles(p + "noise.cyclo.starts", *v);
    if (auto v = r.get(p + "noise.cyclo.multipliers")) mults = to_doubles(p + "noise.cyclo.multipliers", *v);
    if (starts.size() != mults.size()) throw ConfigError(p + "noise.cyclo: starts and multipliers differ in length");
    std::vector<NoiseRegion> regions(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        regions[i].start_fraction = starts[i];
        regions[i].multiplier = mults[i];
        regions[i].shaping = i < cy.regions.size() ? cy.regions[i].shaping : std::vector<double>{1.0};
        if (auto v = r.get(p + "noise.cyclo.region" + std::to_string(i) + ".shaping"))
            regions[i].shaping = to_doubles(p + "noise.cyclo.region" + std::to_string(i) + ".shaping", *v);
    }
    cy.regions = std::move(regions);
    if (auto v = r.get(p + "noise.cyclo.phase")) {
        if (*v == "random") l.noise.ac_phase.reset();
        else l.noise.ac_phase = to_count(p + "noise.cyclo.phase", *v);
    }
    if (kind == "cyclo") {
        cy.validate();
        l.noise.model = cy;
    }
}

}  // namespace detail

/// A parsed config: one scenario plus the schemes to sweep with it.
struct Experiment {
    Scenario scenario;
    std::vector<Scheme> schemes;
};

inline Experiment parse_experiment(const std::map<std::string, std::string>& kv) {
    using namespace detail;
    KeyReader r(kv);
    Experiment ex;
    Scenario& s = ex.scenario;
    if (auto v = r.get("scheme"))
        for (const auto& name : split(*v, ',')) ex.schemes.push_back(parse_scheme(name));
    if (ex.schemes.empty()) ex.schemes.push_back(s.scheme);
    if (auto v = r.get("fec")) s.fec = to_bool("fec", *v);
    if (auto v = r.get("seed")) s.seed = to_count("seed", *v);
    if (auto v = r.get("receiver")) {
        if (*v == "genie") s.receiver = ReceiverMode::genie;
        else if (*v == "estimated") s.receiver = ReceiverMode::estimated;
        else if (*v == "full") s.receiver = ReceiverMode::full;
        else throw ConfigError("receiver: expected genie, estimated or full");
    }
    if (auto v = r.get("isc.mode")) {
        if (*v == "genie") s.isc_mode = InstantaneousMode::genie;
        else if (*v == "symbol") s.isc_mode = InstantaneousMode::symbol;
        else if (*v == "residual") s.isc_mode = InstantaneousMode::residual;
        else throw ConfigError("isc.mode: expected symbol, genie or residual");
    }
    if (auto v = r.get("sweep.ebno_db")) s.sweep = to_sweep("sweep.ebno_db", *v);
    if (auto v = r.get("sweep.stop_below_ber")) s.stop_below_ber = to_double("sweep.stop_below_ber", *v);
    if (auto v = r.get("stop.min_errors")) s.stop.min_errors = to_count("stop.min_errors", *v);
    if (auto v = r.get("stop.max_bits")) s.stop.max_bits = to_count("stop.max_bits", *v);
    if (auto v = r.get("wl.ebno_db")) s.wl_ebno_db = to_double("wl.ebno_db", *v);
    if (auto v = r.get("single.denominator")) {
        if (*v == "average") s.single_denominator = Denominator::average;
        else if (*v == "psd") s.single_denominator = Denominator::psd;
        else throw ConfigError("single.denominator: expected average or psd");
    }
    if (auto v = r.get("receiver.psd_estimator")) {
        if (*v == "residual") s.psd_estimator = PsdEstimator::residual;
        else if (*v == "subtract") s.psd_estimator = PsdEstimator::subtract;
        else throw ConfigError("receiver.psd_estimator: expected residual or subtract");
    }
    if (auto v = r.get("receiver.psd_floor")) s.psd_floor = to_double("receiver.psd_floor", *v);
    if (auto v = r.get("fec.interleaver_rows")) s.interleaver_rows = to_count("fec.interleaver_rows", *v);

    if (auto v = r.get("sync.n_syncp")) s.n_syncp = to_count("sync.n_syncp", *v);
    if (auto v = r.get("sync.stage1_threshold")) s.detector.stage1_threshold = to_double("sync.stage1_threshold", *v);
    if (auto v = r.get("sync.stage2_threshold")) s.detector.stage2_threshold = to_double("sync.stage2_threshold", *v);
    if (auto v = r.get("sync.search_range")) s.detector.search_range = to_count("sync.search_range", *v);
    if (auto v = r.get("sync.int_cfo_range")) s.detector.int_cfo_range = static_cast<int>(to_count("sync.int_cfo_range", *v));
    if (auto v = r.get("sync.band_filter")) s.detector.band_filter = to_bool("sync.band_filter", *v);
    if (auto v = r.get("sync.estimate_cfo")) s.wl_estimate_cfo = to_bool("sync.estimate_cfo", *v);
    if (auto v = r.get("sync.max_lead")) s.max_lead = to_count("sync.max_lead", *v);

    OfdmConfig shared;
    read_ofdm(r, "ofdm.", shared);
    read_link(r, "plc", s.plc, shared);
    read_link(r, "wl", s.wl, shared);
    r.check_all_used();

    s.scheme = ex.schemes.front();
    for (auto sc : ex.schemes) {
        Scenario copy = s;
        copy.scheme = sc;
        copy.validate();
    }
    return ex;
}

inline Experiment parse_experiment(std::istream& in) { return parse_experiment(parse_key_values(in)); }

inline Experiment load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_experiment(in);
}

}  // namespace hybridlink

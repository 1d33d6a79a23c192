// Command line front end: BER sweeps, gain reports, and offline preamble
// detection on recorded I/Q.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "hybridlink/hybridlink.hpp"

using namespace hybridlink;

namespace {

int cmd_ber(const std::string& config, const std::string& out_path, std::optional<std::uint64_t> seed, unsigned workers,
            bool quiet) {
    Experiment ex = load_experiment(config);
    if (seed) ex.scenario.seed = *seed;
    std::vector<BerPoint> points;
    for (Scheme s : ex.schemes) {
        Scenario sc = ex.scenario;
        sc.scheme = s;
        for (const auto& p : run_sweep(sc, workers)) {
            if (!quiet)
                std::fprintf(stderr, "%-8s %6.2f dB  ber %.3e  (%llu/%llu)\n", to_string(s), p.ebno_db, p.ber,
                             static_cast<unsigned long long>(p.bit_errors), static_cast<unsigned long long>(p.bits));
            points.push_back(p);
        }
    }
    if (out_path.empty() || out_path == "-") {
        write_csv(std::cout, points);
    } else {
        std::ofstream os(out_path);
        if (!os) throw ConfigError("cannot write " + out_path);
        write_csv(os, points);
    }
    return 0;
}

int cmd_gain(double target, const std::string& curve_path, const std::string& baseline_path,
             const std::string& baseline_scheme) {
    const auto curve = load_csv(curve_path);
    auto baseline = load_csv(baseline_path);
    if (!baseline_scheme.empty()) {
        const Scheme s = parse_scheme(baseline_scheme);
        std::erase_if(baseline, [s](const BerPoint& p) { return p.scheme != s; });
    } else {
        // default: the first scheme in the baseline file
        if (baseline.empty()) throw ConfigError("baseline curve is empty");
        const Scheme s = baseline.front().scheme;
        std::erase_if(baseline, [s](const BerPoint& p) { return p.scheme != s; });
    }
    write_report(std::cout, report(curve, baseline, target), target);
    return 0;
}

Samples read_iq(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<float> raw;
    float buf[2];
    while (in.read(reinterpret_cast<char*>(buf), sizeof buf)) {
        raw.push_back(buf[0]);
        raw.push_back(buf[1]);
    }
    Samples x(raw.size() / 2);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = {raw[2 * i], raw[2 * i + 1]};
    return x;
}

int cmd_detect(const std::string& path, const std::string& config, const std::string& link, bool cfo) {
    OfdmConfig cfg;
    DetectorConfig dc;
    std::size_t n_syncp = 8;
    if (!config.empty()) {
        const auto ex = load_experiment(config);
        cfg = link == "wl" ? ex.scenario.wl.ofdm : ex.scenario.plc.ofdm;
        dc = ex.scenario.detector;
        n_syncp = ex.scenario.n_syncp;
    }
    dc.estimate_cfo = cfo;
    const auto spec = make_preamble_spec(cfg, n_syncp);
    const Samples x = read_iq(path);
    std::cout << "start,cfo_hz,int_cfo_bins,metric\n";
    std::size_t offset = 0;
    while (offset + spec.length() <= x.size()) {
        const auto det = hybrid_detect(std::span<const Complex>(x).subspan(offset), spec, cfg, dc);
        if (!det.detected) break;
        const std::size_t start = offset + det.start_index;
        std::printf("%zu,%.3f,%d,%.4f\n", start, det.cfo_hz(cfg.subcarrier_spacing()), det.int_cfo_bins, det.metric_peak);
        offset = start + spec.length();
    }
    return 0;
}

// Writes a test capture: idle gaps, then `count` preambles, each followed by
// a frame of random BPSK symbols, through AWGN at the requested SNR.
int cmd_synth(const std::string& path, std::size_t count, double snr_db, double cfo_hz, std::uint64_t seed) {
    OfdmConfig cfg;
    const auto spec = make_preamble_spec(cfg);
    RngStream rng(seed, 0);
    Samples x;
    for (std::size_t i = 0; i < count; ++i) {
        x.resize(x.size() + 1000 + rng.below(1000));
        const auto pre = gen_preamble(spec);
        x.insert(x.end(), pre.data.begin(), pre.data.end());
        SymbolGrid g(4, cfg.active_count());
        for (auto& c : g.cells()) c = rng.bit() ? -1.0 : 1.0;
        const auto body = modulate(g, cfg);
        x.insert(x.end(), body.data.begin(), body.data.end());
    }
    x.resize(x.size() + 1000);
    rotate(x, cfo_hz, cfg.sample_rate);
    const double p = energy(gen_preamble(spec).data) / static_cast<double>(spec.length());
    const double var = p / std::pow(10.0, snr_db / 10.0);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path);
    for (auto& v : x) {
        v += rng.complex_gaussian(var);
        const float buf[2] = {static_cast<float>(v.real()), static_cast<float>(v.imag())};
        os.write(reinterpret_cast<const char*>(buf), sizeof buf);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid PLC/wireless OFDM link simulator"};
    app.require_subcommand(1);

    auto* ber = app.add_subcommand("ber", "run a BER sweep and write a CSV");
    std::string config, out;
    std::optional<std::uint64_t> seed;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    bool quiet = false;
    ber->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
    ber->add_option("--out", out, "output CSV (- for stdout)");
    ber->add_option("--seed", seed, "override the config seed");
    ber->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    ber->add_flag("-q,--quiet", quiet, "no progress on stderr");

    auto* gain = app.add_subcommand("gain", "Eb/N0 gain of one curve over a baseline at a target BER");
    double target = 1e-4;
    std::string curve, baseline, baseline_scheme;
    gain->add_option("--target-ber", target)->check(CLI::PositiveNumber);
    gain->add_option("--curve", curve)->required()->check(CLI::ExistingFile);
    gain->add_option("--baseline", baseline)->required()->check(CLI::ExistingFile);
    gain->add_option("--baseline-scheme", baseline_scheme, "scheme to pick from the baseline file");

    auto* detect = app.add_subcommand("detect", "find preambles in interleaved float32 I/Q");
    std::string iq, link = "wl";
    bool cfo = true;
    detect->add_option("--input", iq)->required()->check(CLI::ExistingFile);
    detect->add_option("--config", config, "scenario file for OFDM and detector settings");
    detect->add_option("--link", link, "plc or wl")->check(CLI::IsMember({"plc", "wl"}));
    detect->add_option("--cfo", cfo, "estimate and report CFO");

    auto* synth = app.add_subcommand("synth", "write a synthetic I/Q capture");
    std::size_t count = 3;
    double snr = 10.0, cfo_hz = 0.0;
    std::uint64_t synth_seed = 1;
    synth->add_option("--out", out)->required();
    synth->add_option("--count", count);
    synth->add_option("--snr-db", snr);
    synth->add_option("--cfo-hz", cfo_hz);
    synth->add_option("--seed", synth_seed);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*ber) return cmd_ber(config, out, seed, workers, quiet);
        if (*gain) return cmd_gain(target, curve, baseline, baseline_scheme);
        if (*detect) return cmd_detect(iq, config, link, cfo);
        if (*synth) return cmd_synth(out, count, snr, cfo_hz, synth_seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

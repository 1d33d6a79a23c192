#pragma once

// Interference models for the two links: Gaussian-mixture impulsive noise
// (wireless) and region-based cyclostationary noise (PLC), plus the Eb/N0
// calibration that places either model on a link budget.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "hybridlink/channel.hpp"
#include "hybridlink/ofdm.hpp"
#include "hybridlink/signal.hpp"

namespace hybridlink {

struct AwgnParams {
    double variance = 1.0;
};

struct GmParams {
    std::vector<double> weights{0.9, 0.1};
    std::vector<double> variances{1.0, 100.0};

    double total_variance() const {
        double v = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) v += weights[i] * variances[i];
        return v;
    }

    void validate() const {
        if (weights.empty() || weights.size() != variances.size())
            throw ConfigError("GM weights and variances must be non-empty and equally long");
        double sum = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (!(weights[i] >= 0.0)) throw ConfigError("GM weights must be nonnegative");
            if (!(variances[i] > 0.0)) throw ConfigError("GM variances must be positive");
            sum += weights[i];
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("GM weights must sum to 1");
    }
};

struct NoiseRegion {
    double start_fraction = 0.0;      // in [0, 1) of the noise period
    double multiplier = 1.0;          // power relative to base_variance
    std::vector<double> shaping{1.0};  // FIR taps, normalized to unit energy on use
};

struct CycloParams {
    std::size_t period_samples = period_for(400'000.0, 60.0);
    std::vector<NoiseRegion> regions = default_regions();
    double base_variance = 1.0;

    // The noise repeats every half mains cycle.
    static std::size_t period_for(double sample_rate, double ac_hz) {
        return static_cast<std::size_t>(std::floor(sample_rate / (2.0 * ac_hz)));
    }

    static std::vector<NoiseRegion> default_regions() {
        return {{0.0, 1.0, {1.0}}, {0.4, 10.0, {1.0, 0.5}}, {0.7, 100.0, {1.0, -0.5}}};
    }

    void validate() const {
        if (period_samples == 0) throw ConfigError("cyclostationary period must be positive");
        if (regions.empty()) throw ConfigError("cyclostationary model needs at least one region");
        if (regions.front().start_fraction != 0.0) throw ConfigError("first noise region must start at 0");
        for (std::size_t r = 0; r < regions.size(); ++r) {
            if (!(regions[r].start_fraction >= 0.0 && regions[r].start_fraction < 1.0))
                throw ConfigError("region start fraction must be in [0, 1)");
            if (r > 0 && !(regions[r].start_fraction > regions[r - 1].start_fraction))
                throw ConfigError("region start fractions must be strictly increasing");
            if (!(regions[r].multiplier > 0.0)) throw ConfigError("region power multiplier must be positive");
            if (regions[r].shaping.empty()) throw ConfigError("region shaping filter is empty");
            double e = 0.0;
            for (double t : regions[r].shaping) e += t * t;
            if (!(e > 0.0)) throw ConfigError("region shaping filter has zero energy");
        }
        if (base_variance <= 0.0) throw ConfigError("base variance must be positive");
    }

    std::size_t region_start(std::size_t r) const {
        return static_cast<std::size_t>(std::floor(regions[r].start_fraction * static_cast<double>(period_samples)));
    }

    // Region of absolute sample index t for the given AC phase offset.
    std::size_t region_at(std::size_t t, std::size_t phase_offset) const {
        const std::size_t pos = (t + phase_offset) % period_samples;
        std::size_t r = 0;
        while (r + 1 < regions.size() && region_start(r + 1) <= pos) ++r;
        return r;
    }

    // Region contributing the most noise energy to samples [first, first + len).
    // A window straddling a boundary is dominated by the louder region.
    std::size_t dominant_region(std::size_t first, std::size_t len, std::size_t phase_offset) const {
        std::vector<double> e(regions.size(), 0.0);
        for (std::size_t t = first; t < first + len; ++t) {
            const std::size_t r = region_at(t, phase_offset);
            e[r] += regions[r].multiplier;
        }
        return static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
    }

    // Fraction of the period spent in each region (by sample count).
    std::vector<double> region_fractions() const {
        std::vector<double> f(regions.size());
        for (std::size_t r = 0; r < regions.size(); ++r) {
            const std::size_t end = r + 1 < regions.size() ? region_start(r + 1) : period_samples;
            f[r] = static_cast<double>(end - region_start(r)) / static_cast<double>(period_samples);
        }
        return f;
    }

    std::vector<double> normalized_shaping(std::size_t r) const {
        auto taps = regions[r].shaping;
        double e = 0.0;
        for (double t : taps) e += t * t;
        for (double& t : taps) t /= std::sqrt(e);
        return taps;
    }

    // Time-average per-sample power.
    double average_power() const {
        const auto f = region_fractions();
        double p = 0.0;
        for (std::size_t r = 0; r < regions.size(); ++r) p += f[r] * regions[r].multiplier;
        return p * base_variance;
    }
};

using NoiseModel = std::variant<AwgnParams, GmParams, CycloParams>;

/// Per-link noise statistics seen by the combiners.
struct NoiseStats {
    double avg_power = 0.0;
    std::vector<std::vector<double>> psd;  // [region][active subcarrier]
    std::vector<double> region_weights;    // time fraction of each psd row
};

inline double average_power(const NoiseModel& model) {
    return std::visit(
        [](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AwgnParams>) return m.variance;
            else if constexpr (std::is_same_v<T, GmParams>) return m.total_variance();
            else return m.average_power();
        },
        model);
}

inline NoiseModel scaled(const NoiseModel& model, double factor) {
    return std::visit(
        [factor](auto m) -> NoiseModel {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AwgnParams>) m.variance *= factor;
            else if constexpr (std::is_same_v<T, GmParams>) for (auto& v : m.variances) v *= factor;
            else m.base_variance *= factor;
            return m;
        },
        model);
}

inline ComplexFrame awgn_sample(std::size_t n, double variance, RngStream& stream) {
    ComplexFrame out{Samples(n), Domain::time};
    for (auto& v : out.data) v = stream.complex_gaussian(variance);
    return out;
}

/// `state_variance`, when given, receives the variance of the component
/// drawn for each sample.
inline ComplexFrame gm_sample(std::size_t n, const GmParams& p, RngStream& stream,
                              std::vector<double>* state_variance = nullptr) {
    p.validate();
    std::vector<double> cdf(p.weights.size());
    std::partial_sum(p.weights.begin(), p.weights.end(), cdf.begin());
    ComplexFrame out{Samples(n), Domain::time};
    if (state_variance) state_variance->resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double u = stream.uniform();
        std::size_t i = 0;
        while (i + 1 < cdf.size() && u >= cdf[i]) ++i;
        out[t] = stream.complex_gaussian(p.variances[i]);
        if (state_variance) (*state_variance)[t] = p.variances[i];
    }
    return out;
}

/// Sample t belongs to region r((t + phase_offset) mod period) and is the
/// region's shaping filter applied to unit white noise, scaled to the
/// region's power.
inline ComplexFrame cyclo_sample(std::size_t n, const CycloParams& p, RngStream& stream,
                                 std::size_t phase_offset = 0) {
    p.validate();
    std::vector<std::vector<double>> shaping(p.regions.size());
    std::size_t memory = 0;
    for (std::size_t r = 0; r < p.regions.size(); ++r) {
        shaping[r] = p.normalized_shaping(r);
        memory = std::max(memory, shaping[r].size() - 1);
    }
    Samples white(n + memory);
    for (auto& w : white) w = stream.complex_gaussian(1.0);

    ComplexFrame out{Samples(n), Domain::time};
    std::size_t pos = phase_offset % p.period_samples;
    std::size_t region = p.region_at(0, phase_offset);
    std::vector<double> scale(p.regions.size());
    for (std::size_t r = 0; r < p.regions.size(); ++r) scale[r] = std::sqrt(p.base_variance * p.regions[r].multiplier);
    for (std::size_t t = 0; t < n; ++t) {
        const auto& g = shaping[region];
        Complex acc{};
        for (std::size_t j = 0; j < g.size(); ++j) acc += g[j] * white[t + memory - j];
        out[t] = scale[region] * acc;
        if (++pos == p.period_samples) {
            pos = 0;
            region = 0;
        } else if (region + 1 < p.regions.size() && pos == p.region_start(region + 1)) {
            ++region;
        }
    }
    return out;
}

/// `state_variance` receives the per-sample generating variance (the drawn
/// mixture component for GM, the region power for cyclostationary noise).
inline ComplexFrame sample(const NoiseModel& model, std::size_t n, RngStream& stream, std::size_t phase_offset = 0,
                           std::vector<double>* state_variance = nullptr) {
    return std::visit(
        [&](const auto& m) -> ComplexFrame {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AwgnParams>) {
                if (state_variance) state_variance->assign(n, m.variance);
                return awgn_sample(n, m.variance, stream);
            } else if constexpr (std::is_same_v<T, GmParams>) {
                return gm_sample(n, m, stream, state_variance);
            } else {
                if (state_variance) {
                    state_variance->resize(n);
                    for (std::size_t t = 0; t < n; ++t)
                        (*state_variance)[t] = m.base_variance * m.regions[m.region_at(t, phase_offset)].multiplier;
                }
                return cyclo_sample(n, m, stream, phase_offset);
            }
        },
        model);
}

/// Energy bookkeeping for one link. Eb = Es / (code_rate * bits_per_symbol).
struct LinkBudget {
    double signal_power = 1.0;  // per active subcarrier
    double code_rate = 1.0;
    double bits_per_symbol = 1.0;
};

inline double noise_variance_for_ebno(double ebno_db, const LinkBudget& budget) {
    if (!(budget.signal_power > 0.0)) throw DomainError("signal power must be positive");
    if (!(budget.code_rate > 0.0) || !(budget.bits_per_symbol > 0.0))
        throw DomainError("code rate and bits per symbol must be positive");
    const double ebno = std::pow(10.0, ebno_db / 10.0);
    return budget.signal_power / (budget.code_rate * budget.bits_per_symbol * ebno);
}

/// Rescales every variance so the time-average noise power meets the
/// requested Eb/N0.
inline NoiseModel calibrate_to_ebno(const NoiseModel& model, double ebno_db, const LinkBudget& budget) {
    const double target = noise_variance_for_ebno(ebno_db, budget);
    const double current = average_power(model);
    if (!(current > 0.0)) throw DomainError("noise model has no power to scale");
    return scaled(model, target / current);
}

/// Ground-truth statistics on the active subcarriers. For cyclostationary
/// noise there is one psd row per region; otherwise a single flat row.
inline NoiseStats true_stats(const NoiseModel& model, const OfdmConfig& cfg) {
    NoiseStats st;
    const std::size_t K = cfg.active_count();
    if (const auto* c = std::get_if<CycloParams>(&model)) {
        st.region_weights = c->region_fractions();
        for (std::size_t r = 0; r < c->regions.size(); ++r) {
            const auto g = c->normalized_shaping(r);
            std::vector<Complex> taps(g.begin(), g.end());
            const auto resp = frequency_response(taps, cfg);
            std::vector<double> row(K);
            for (std::size_t k = 0; k < K; ++k)
                row[k] = c->base_variance * c->regions[r].multiplier * std::norm(resp[k]);
            st.psd.push_back(std::move(row));
        }
    } else {
        st.psd.assign(1, std::vector<double>(K, average_power(model)));
        st.region_weights = {1.0};
    }
    double avg = 0.0;
    for (std::size_t r = 0; r < st.psd.size(); ++r)
        for (double v : st.psd[r]) avg += st.region_weights[r] * v;
    st.avg_power = avg / static_cast<double>(K);
    return st;
}

}  // namespace hybridlink

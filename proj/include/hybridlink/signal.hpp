#pragma once

// Numeric substrate shared by every other module: complex sample buffers,
// a unitary radix-2 DFT and seedable per-trial random streams.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hybridlink/errors.hpp"

namespace hybridlink {

using Complex = std::complex<double>;
using Samples = std::vector<Complex>;

enum class Domain { time, frequency };

struct ComplexFrame {
    Samples data;
    Domain domain = Domain::time;

    std::size_t size() const { return data.size(); }
    Complex& operator[](std::size_t i) { return data[i]; }
    const Complex& operator[](std::size_t i) const { return data[i]; }
};

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline double energy(std::span<const Complex> x) {
    double e = 0.0;
    for (const auto& v : x) e += std::norm(v);
    return e;
}

/// In-place radix-2 transform of a fixed size with precomputed twiddles.
/// Both directions carry a 1/sqrt(n) factor so the transform is unitary.
class Dft {
public:
    explicit Dft(std::size_t n) : n_(n) {
        if (!is_power_of_two(n)) throw ConfigError("DFT size must be a power of two");
        twiddle_.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            twiddle_[k] = {std::cos(a), std::sin(a)};
        }
        bitrev_.resize(n);
        std::size_t bits = 0;
        while ((std::size_t{1} << bits) < n) ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < bits; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
            bitrev_[i] = r;
        }
        scale_ = 1.0 / std::sqrt(static_cast<double>(n));
    }

    std::size_t size() const { return n_; }

    void forward(std::span<Complex> x) const { run(x, false); }
    void inverse(std::span<Complex> x) const { run(x, true); }

private:
    void run(std::span<Complex> x, bool inverse) const {
        if (x.size() != n_) throw ConfigError("DFT input length does not match plan size");
        for (std::size_t i = 0; i < n_; ++i)
            if (i < bitrev_[i]) std::swap(x[i], x[bitrev_[i]]);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t half = len / 2;
            const std::size_t step = n_ / len;
            for (std::size_t start = 0; start < n_; start += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    Complex w = twiddle_[j * step];
                    if (inverse) w = std::conj(w);
                    const Complex u = x[start + j];
                    const Complex v = x[start + j + half] * w;
                    x[start + j] = u + v;
                    x[start + j + half] = u - v;
                }
            }
        }
        for (auto& v : x) v *= scale_;
    }

    std::size_t n_;
    double scale_ = 1.0;
    std::vector<Complex> twiddle_;
    std::vector<std::size_t> bitrev_;
};

/// Plan cache; one per thread so workers never share mutable state.
inline const Dft& dft_plan(std::size_t n) {
    thread_local std::unordered_map<std::size_t, Dft> plans;
    auto it = plans.find(n);
    if (it == plans.end()) it = plans.emplace(n, Dft(n)).first;
    return it->second;
}

inline ComplexFrame dft(const ComplexFrame& frame, std::size_t n) {
    if (!is_power_of_two(n)) throw ConfigError("DFT size must be a power of two");
    if (frame.size() != n) throw ConfigError("frame length does not match DFT size");
    ComplexFrame out{frame.data, Domain::frequency};
    dft_plan(n).forward(out.data);
    return out;
}

inline ComplexFrame inverse_dft(const ComplexFrame& frame, std::size_t n) {
    if (!is_power_of_two(n)) throw ConfigError("DFT size must be a power of two");
    if (frame.size() != n) throw ConfigError("frame length does not match DFT size");
    ComplexFrame out{frame.data, Domain::time};
    dft_plan(n).inverse(out.data);
    return out;
}

/// Independent random stream addressed by (seed, stream_id). The same pair
/// always reproduces the same sequence.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id),
                          static_cast<std::uint32_t>(stream_id >> 32), 0x9e3779b9u};
        engine_.seed(seq);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::uint64_t below(std::uint64_t bound) {
        std::uniform_int_distribution<std::uint64_t> d(0, bound - 1);
        return d(engine_);
    }

    bool bit() { return (engine_() >> 63) != 0; }

    // Box-Muller; both outputs are used.
    std::pair<double, double> gaussian_pair() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(t), r * std::sin(t)};
    }

    // Circularly symmetric complex Gaussian with E|z|^2 = variance.
    Complex complex_gaussian(double variance = 1.0) {
        const auto [a, b] = gaussian_pair();
        const double s = std::sqrt(variance / 2.0);
        return {a * s, b * s};
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

inline std::pair<double, double> gaussian_pair(RngStream& stream) { return stream.gaussian_pair(); }

}  // namespace hybridlink

#pragma once

// CP-OFDM modulation and coherent/differential BPSK symbol handling.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hybridlink/signal.hpp"

namespace hybridlink {

struct OfdmConfig {
    std::size_t fft_size = 256;
    std::size_t cp_len = 30;
    std::vector<std::size_t> active_subcarriers = default_active();
    double sample_rate = 400'000.0;
    std::size_t symbols_per_frame = 48;

    static std::vector<std::size_t> default_active() { return contiguous(23, 58); }

    static std::vector<std::size_t> contiguous(std::size_t first, std::size_t last) {
        std::vector<std::size_t> v;
        for (std::size_t k = first; k <= last; ++k) v.push_back(k);
        return v;
    }

    std::size_t symbol_len() const { return fft_size + cp_len; }
    std::size_t active_count() const { return active_subcarriers.size(); }
    double subcarrier_spacing() const { return sample_rate / static_cast<double>(fft_size); }

    void validate() const {
        if (!is_power_of_two(fft_size)) throw ConfigError("fft_size must be a power of two");
        if (cp_len >= fft_size) throw ConfigError("cp_len must be smaller than fft_size");
        if (active_subcarriers.empty()) throw ConfigError("active subcarrier set is empty");
        for (auto k : active_subcarriers)
            if (k >= fft_size / 2) throw ConfigError("active subcarrier index must be below fft_size/2");
        if (symbols_per_frame == 0) throw ConfigError("symbols_per_frame must be positive");
        if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be positive");
    }
};

/// Frequency-domain cells, symbol-major: cell(s, k) is symbol s on the k-th
/// active subcarrier.
class SymbolGrid {
public:
    SymbolGrid() = default;
    SymbolGrid(std::size_t symbols, std::size_t subcarriers, Complex fill = {0.0, 0.0})
        : symbols_(symbols), subcarriers_(subcarriers), cells_(symbols * subcarriers, fill) {}

    std::size_t symbols() const { return symbols_; }
    std::size_t subcarriers() const { return subcarriers_; }
    std::size_t size() const { return cells_.size(); }

    Complex& operator()(std::size_t s, std::size_t k) { return cells_[s * subcarriers_ + k]; }
    const Complex& operator()(std::size_t s, std::size_t k) const { return cells_[s * subcarriers_ + k]; }

    std::vector<Complex>& cells() { return cells_; }
    const std::vector<Complex>& cells() const { return cells_; }

private:
    std::size_t symbols_ = 0;
    std::size_t subcarriers_ = 0;
    std::vector<Complex> cells_;
};

enum class DiffMode { tddm, fddm };

inline ComplexFrame modulate(const SymbolGrid& grid, const OfdmConfig& cfg) {
    cfg.validate();
    if (grid.subcarriers() != cfg.active_count())
        throw ConfigError("grid columns do not match the active subcarrier set");
    const auto& plan = dft_plan(cfg.fft_size);
    const std::size_t sym_len = cfg.symbol_len();
    ComplexFrame out{Samples(grid.symbols() * sym_len), Domain::time};
    Samples bins(cfg.fft_size);
    for (std::size_t s = 0; s < grid.symbols(); ++s) {
        std::fill(bins.begin(), bins.end(), Complex{});
        for (std::size_t k = 0; k < cfg.active_count(); ++k) bins[cfg.active_subcarriers[k]] = grid(s, k);
        plan.inverse(bins);
        Complex* dst = out.data.data() + s * sym_len;
        std::copy(bins.end() - static_cast<std::ptrdiff_t>(cfg.cp_len), bins.end(), dst);
        std::copy(bins.begin(), bins.end(), dst + cfg.cp_len);
    }
    return out;
}

inline SymbolGrid demodulate(std::span<const Complex> frame, const OfdmConfig& cfg) {
    cfg.validate();
    const std::size_t sym_len = cfg.symbol_len();
    if (frame.empty() || frame.size() % sym_len != 0)
        throw FramingError("frame length is not a multiple of the OFDM symbol length");
    const auto& plan = dft_plan(cfg.fft_size);
    const std::size_t n_sym = frame.size() / sym_len;
    SymbolGrid grid(n_sym, cfg.active_count());
    Samples bins(cfg.fft_size);
    for (std::size_t s = 0; s < n_sym; ++s) {
        const Complex* src = frame.data() + s * sym_len + cfg.cp_len;
        std::copy(src, src + cfg.fft_size, bins.begin());
        plan.forward(bins);
        for (std::size_t k = 0; k < cfg.active_count(); ++k) grid(s, k) = bins[cfg.active_subcarriers[k]];
    }
    return grid;
}

inline SymbolGrid demodulate(const ComplexFrame& frame, const OfdmConfig& cfg) {
    return demodulate(std::span<const Complex>(frame.data), cfg);
}

/// Differential encoding. TDDM chains along symbols with an all-ones
/// reference symbol 0; FDDM chains along subcarriers with cell (s, 0) = 1.
/// The reference row/column of `data` is ignored.
inline SymbolGrid diff_encode(const SymbolGrid& data, DiffMode mode) {
    for (const auto& c : data.cells())
        if (std::abs(std::abs(c) - 1.0) > 1e-9) throw DomainError("differential encoding needs unit-modulus cells");
    SymbolGrid out(data.symbols(), data.subcarriers());
    for (std::size_t s = 0; s < data.symbols(); ++s) {
        for (std::size_t k = 0; k < data.subcarriers(); ++k) {
            if (mode == DiffMode::tddm)
                out(s, k) = s == 0 ? Complex{1.0, 0.0} : out(s - 1, k) * data(s, k);
            else
                out(s, k) = k == 0 ? Complex{1.0, 0.0} : out(s, k - 1) * data(s, k);
        }
    }
    return out;
}

/// cell times the conjugate of its reference neighbour; the reference
/// row/column of the output is set to zero.
inline SymbolGrid diff_detect(const SymbolGrid& grid, DiffMode mode) {
    SymbolGrid out(grid.symbols(), grid.subcarriers());
    for (std::size_t s = 0; s < grid.symbols(); ++s) {
        for (std::size_t k = 0; k < grid.subcarriers(); ++k) {
            if (mode == DiffMode::tddm)
                out(s, k) = s == 0 ? Complex{} : grid(s, k) * std::conj(grid(s - 1, k));
            else
                out(s, k) = k == 0 ? Complex{} : grid(s, k) * std::conj(grid(s, k - 1));
        }
    }
    return out;
}

/// Whether cell (s, k) carries data under the given modulation.
inline bool is_data_cell(std::size_t s, std::size_t k, bool differential, DiffMode mode) {
    if (!differential) return true;
    return mode == DiffMode::tddm ? s != 0 : k != 0;
}

}  // namespace hybridlink

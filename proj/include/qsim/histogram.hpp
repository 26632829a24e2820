#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsim/state.hpp"

namespace qsim {

// Bit j of the key is atom j; rendered strings put atom 0 leftmost.
inline std::string bitstring_to_string(std::uint64_t b, int n) {
    std::string s(n, '0');
    for (int j = 0; j < n; ++j)
        if ((b >> j) & 1u) s[j] = '1';
    return s;
}

inline std::uint64_t bitstring_from_string(const std::string& s) {
    std::uint64_t b = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j] == '1')
            b |= std::uint64_t{1} << j;
        else if (s[j] != '0')
            throw std::invalid_argument("bitstring: invalid character");
    }
    return b;
}

// Sparse outcome table.  shots == 0 marks an exact distribution (values are
// probabilities); otherwise values are counts summing to shots.
struct BitstringHistogram {
    int n = 0;
    std::uint64_t shots = 0;
    std::map<std::uint64_t, double> entries;

    bool exact() const { return shots == 0; }

    double total() const {
        double t = 0.0;
        for (const auto& [b, v] : entries) t += v;
        return t;
    }

    double probability(std::uint64_t b) const {
        auto it = entries.find(b);
        if (it == entries.end()) return 0.0;
        return exact() ? it->second : it->second / static_cast<double>(shots);
    }
};

inline constexpr double prob_floor = 1e-15;  // clamp denormal noise

inline BitstringHistogram probabilities(const QuantumState& state) {
    BitstringHistogram h;
    h.n = state.n;
    for (std::size_t b = 0; b < state.amp.size(); ++b) {
        const double p = std::norm(state.amp[b]);
        if (p > prob_floor) h.entries[b] = p;
    }
    return h;
}

// Multinomial sampling by inverse CDF over explicit mt19937_64 draws, so a
// fixed seed reproduces bit-identical histograms on every platform.
inline BitstringHistogram sample_shots(const BitstringHistogram& hist, std::uint64_t shots,
                                       std::uint64_t seed) {
    if (!hist.exact()) throw std::invalid_argument("sample_shots: input must be exact-mode");
    if (shots == 0) throw std::invalid_argument("sample_shots: zero shots");
    std::vector<std::uint64_t> keys;
    std::vector<double> cdf;
    keys.reserve(hist.entries.size());
    cdf.reserve(hist.entries.size());
    double acc = 0.0;
    for (const auto& [b, p] : hist.entries) {
        acc += p;
        keys.push_back(b);
        cdf.push_back(acc);
    }
    if (keys.empty()) throw std::invalid_argument("sample_shots: empty histogram");
    const double total = acc;

    BitstringHistogram out;
    out.n = hist.n;
    out.shots = shots;
    std::mt19937_64 rng(seed);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
        std::size_t lo = 0, hi = cdf.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cdf[mid] <= u)
                lo = mid + 1;
            else
                hi = mid;
        }
        out.entries[keys[lo]] += 1.0;
    }
    return out;
}

inline std::vector<double> rydberg_density(const BitstringHistogram& hist) {
    if (hist.entries.empty()) throw std::invalid_argument("rydberg_density: empty histogram");
    std::vector<double> dens(hist.n, 0.0);
    const double norm = hist.exact() ? 1.0 : static_cast<double>(hist.shots);
    for (const auto& [b, v] : hist.entries)
        for (int j = 0; j < hist.n; ++j)
            if ((b >> j) & 1u) dens[j] += v / norm;
    return dens;
}

}  // namespace qsim

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

#include "qsim/histogram.hpp"

namespace qsim {

// Asymmetric readout: a true '1' reads as '0' with probability epsilon; a
// true '0' always reads correctly.
struct ReadoutModel {
    double epsilon = 0.05;

    explicit ReadoutModel(double eps = 0.05) : epsilon(eps) {
        if (eps < 0.0 || eps >= 1.0)
            throw std::invalid_argument("readout model: epsilon outside [0, 1)");
    }
};

namespace detail {

inline std::map<std::uint64_t, double> to_probs(const BitstringHistogram& h) {
    std::map<std::uint64_t, double> p;
    const double norm = h.exact() ? 1.0 : static_cast<double>(h.shots);
    for (const auto& [b, v] : h.entries) p[b] = v / norm;
    return p;
}

// Clip negative quasi-probabilities, renormalize, surface the clipped mass.
inline BitstringHistogram clip_renormalize(std::map<std::uint64_t, double> p, int n,
                                           double* clipped_mass) {
    double neg = 0.0, pos = 0.0;
    for (auto& [b, v] : p) {
        if (v < 0.0) {
            neg -= v;
            v = 0.0;
        } else {
            pos += v;
        }
    }
    if (clipped_mass) *clipped_mass = neg;
    BitstringHistogram out;
    out.n = n;
    if (pos > 0.0)
        for (const auto& [b, v] : p)
            if (v > prob_floor * pos) out.entries[b] = v / pos;
    return out;
}

}  // namespace detail

// Forward channel: per-bit kernel K(0|1)=eps, K(1|1)=1-eps, K(0|0)=1, K(1|0)=0.
inline BitstringHistogram apply_error_channel(const BitstringHistogram& hist,
                                              const ReadoutModel& model) {
    if (!hist.exact())
        throw std::invalid_argument("apply_error_channel: input must be exact-mode");
    const double eps = model.epsilon;
    std::map<std::uint64_t, double> p = detail::to_probs(hist);
    for (int j = 0; j < hist.n; ++j) {
        const std::uint64_t bit = std::uint64_t{1} << j;
        std::map<std::uint64_t, double> next;
        for (const auto& [b, v] : p) {
            if (b & bit) {
                next[b] += (1.0 - eps) * v;
                if (eps > 0.0) next[b ^ bit] += eps * v;
            } else {
                next[b] += v;
            }
        }
        p = std::move(next);
    }
    BitstringHistogram out;
    out.n = hist.n;
    for (const auto& [b, v] : p)
        if (v > prob_floor) out.entries[b] = v;
    return out;
}

// Exact tensor-product inverse: per-bit kernel K^-1(1|1)=1/(1-eps),
// K^-1(0|1)=-eps/(1-eps), K^-1(0|0)=1, K^-1(1|0)=0.  Negative entries from the
// inversion are clipped and the distribution renormalized; the pre-clip
// negativity mass is reported through clipped_mass.
inline BitstringHistogram mitigate_exact(const BitstringHistogram& hist, const ReadoutModel& model,
                                         double* clipped_mass = nullptr) {
    const double eps = model.epsilon;
    std::map<std::uint64_t, double> p = detail::to_probs(hist);
    for (int j = 0; j < hist.n; ++j) {
        const std::uint64_t bit = std::uint64_t{1} << j;
        std::map<std::uint64_t, double> next;
        for (const auto& [b, v] : p) {
            if (b & bit) {
                next[b] += v / (1.0 - eps);
                next[b ^ bit] -= eps / (1.0 - eps) * v;
            } else {
                next[b] += v;
            }
        }
        p = std::move(next);
    }
    return detail::clip_renormalize(std::move(p), hist.n, clipped_mass);
}

// Inverse truncated to single-bit-flip transfers:
//   p~(b) = (1 + popcount(b) eps) p(b) - eps * sum over unset bits j of p(b | bit j)
inline BitstringHistogram mitigate_first_order(const BitstringHistogram& hist,
                                               const ReadoutModel& model,
                                               double* clipped_mass = nullptr) {
    const double eps = model.epsilon;
    const std::map<std::uint64_t, double> p = detail::to_probs(hist);
    std::map<std::uint64_t, double> out;
    for (const auto& [b, v] : p) {
        out[b] += (1.0 + eps * static_cast<double>(std::popcount(b))) * v;
        for (int j = 0; j < hist.n; ++j) {
            const std::uint64_t bit = std::uint64_t{1} << j;
            if (!(b & bit)) continue;
            out[b ^ bit] -= eps * v;  // b is "(b^bit) with bit j set"
        }
    }
    return detail::clip_renormalize(std::move(out), hist.n, clipped_mass);
}

}  // namespace qsim

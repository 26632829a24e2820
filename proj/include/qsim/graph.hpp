#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qsim/diagonal.hpp"
#include "qsim/histogram.hpp"
#include "qsim/register.hpp"

namespace qsim {

// Unit-disk graph over atom positions: edge iff distance <= radius (ties are
// edges).  Adjacency is kept as per-vertex bitmasks for fast IS tests.
struct UnitDiskGraph {
    int n = 0;
    double radius = 0.0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::uint64_t> adj;  // adj[v] = neighbor bitmask
    std::vector<std::array<double, 2>> positions;
};

inline UnitDiskGraph unit_disk_graph(const AtomRegister& reg, double radius) {
    if (radius <= 0.0) throw std::invalid_argument("unit_disk_graph: radius must be positive");
    UnitDiskGraph g;
    g.n = static_cast<int>(reg.size());
    g.radius = radius;
    g.adj.assign(g.n, 0);
    g.positions = reg.positions;
    for (int j = 0; j < g.n; ++j)
        for (int k = j + 1; k < g.n; ++k)
            if (reg.distance(j, k) <= radius) {
                g.edges.emplace_back(j, k);
                g.adj[j] |= std::uint64_t{1} << k;
                g.adj[k] |= std::uint64_t{1} << j;
            }
    return g;
}

inline bool is_independent_set(const UnitDiskGraph& g, std::uint64_t b) {
    std::uint64_t rest = b;
    while (rest) {
        const int v = std::countr_zero(rest);
        rest &= rest - 1;
        if (g.adj[v] & b) return false;
    }
    return true;
}

inline bool is_maximal(const UnitDiskGraph& g, std::uint64_t b) {
    if (!is_independent_set(g, b))
        throw std::invalid_argument("is_maximal: bitstring is not an independent set");
    for (int v = 0; v < g.n; ++v) {
        const std::uint64_t bit = std::uint64_t{1} << v;
        if ((b & bit) == 0 && (g.adj[v] & b) == 0) return false;  // v addable
    }
    return true;
}

struct MaxISResult {
    int max_cardinality = 0;
    std::vector<std::uint64_t> solutions;        // lexicographically sorted bitstrings
    std::map<int, std::uint64_t> maximal_count;  // maximal ISs per cardinality
};

inline MaxISResult enumerate_max_independent_sets(const UnitDiskGraph& g) {
    if (g.n > max_atoms)
        throw std::invalid_argument("enumerate_max_independent_sets: graph too large");
    MaxISResult res;
    const std::uint64_t dim = std::uint64_t{1} << g.n;
    for (std::uint64_t b = 0; b < dim; ++b) {
        if (!is_independent_set(g, b)) continue;
        const int card = std::popcount(b);
        if (is_maximal(g, b)) res.maximal_count[card] += 1;
        if (card > res.max_cardinality) {
            res.max_cardinality = card;
            res.solutions.clear();
        }
        if (card == res.max_cardinality) res.solutions.push_back(b);
    }
    // Sort by rendered bitstring (atom 0 leftmost).
    std::sort(res.solutions.begin(), res.solutions.end(),
              [&](std::uint64_t a, std::uint64_t b2) {
                  return bitstring_to_string(a, g.n) < bitstring_to_string(b2, g.n);
              });
    return res;
}

enum class ISLabel { not_is, is, maximal_is, maximum_is };

inline const char* to_string(ISLabel label) {
    switch (label) {
        case ISLabel::not_is: return "not-IS";
        case ISLabel::is: return "IS";
        case ISLabel::maximal_is: return "maximal-IS";
        case ISLabel::maximum_is: return "maximum-IS";
    }
    return "?";
}

struct HistogramClassification {
    std::map<std::uint64_t, ISLabel> labels;
    std::map<ISLabel, double> mass_per_label;
    std::map<int, double> mass_per_cardinality;  // over IS outcomes only
};

inline HistogramClassification classify_histogram(const UnitDiskGraph& g,
                                                  const BitstringHistogram& hist) {
    if (hist.n != g.n) throw std::invalid_argument("classify_histogram: size mismatch");
    const MaxISResult mis = enumerate_max_independent_sets(g);
    HistogramClassification cls;
    const double norm = hist.exact() ? 1.0 : static_cast<double>(hist.shots);
    for (const auto& [b, v] : hist.entries) {
        ISLabel label = ISLabel::not_is;
        if (is_independent_set(g, b)) {
            label = ISLabel::is;
            if (is_maximal(g, b))
                label = std::popcount(b) == mis.max_cardinality ? ISLabel::maximum_is
                                                                : ISLabel::maximal_is;
            cls.mass_per_cardinality[std::popcount(b)] += v / norm;
        }
        cls.labels[b] = label;
        cls.mass_per_label[label] += v / norm;
    }
    return cls;
}

}  // namespace qsim

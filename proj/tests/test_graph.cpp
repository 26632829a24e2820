#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <bit>
#include <cstdint>
#include <numeric>
#include <vector>

#include "qsim/graph.hpp"
#include "qsim/histogram.hpp"
#include "qsim/register.hpp"

using namespace qsim;

namespace {

// 12 atoms on a square loop, 4 per side region, nearest neighbors 7 um apart
AtomRegister square_loop12() {
    const double s = 7.0;
    std::vector<std::array<double, 2>> pos;
    for (int i = 0; i < 3; ++i) pos.push_back({s * i, 0.0});
    for (int i = 0; i < 3; ++i) pos.push_back({3 * s, s * i});
    for (int i = 0; i < 3; ++i) pos.push_back({3 * s - s * i, 3 * s});
    for (int i = 0; i < 3; ++i) pos.push_back({0.0, 3 * s - s * i});
    return AtomRegister(pos);
}

AtomRegister triangle() { return AtomRegister({{0.0, 0.0}, {5.0, 0.0}, {2.5, 4.33}}); }

// Count of maximal independent sets of the n-cycle: the Perrin recurrence
// p(n) = p(n-2) + p(n-3) with p(3)=3, p(4)=2, p(5)=5.
std::uint64_t cycle_maximal_count(int n) {
    std::vector<std::uint64_t> p(n + 1, 0);
    p[3] = 3;
    if (n >= 4) p[4] = 2;
    if (n >= 5) p[5] = 5;
    for (int k = 6; k <= n; ++k) p[k] = p[k - 2] + p[k - 3];
    return p[n];
}

}  // namespace

TEST_CASE("square loop forms a 12-cycle at nearest-neighbor radius") {
    auto g = unit_disk_graph(square_loop12(), 7.0);
    CHECK(g.n == 12);
    CHECK(g.edges.size() == 12);
    for (int v = 0; v < 12; ++v) CHECK(std::popcount(g.adj[v]) == 2);
}

TEST_CASE("12-cycle maximum independent sets match the combinatorial oracle") {
    auto g = unit_disk_graph(square_loop12(), 7.0);
    auto mis = enumerate_max_independent_sets(g);
    // even cycle C_n: alpha = n/2 with exactly the two alternating patterns
    CHECK(mis.max_cardinality == 6);
    REQUIRE(mis.solutions.size() == 2);
    for (auto b : mis.solutions) {
        CHECK(std::popcount(b) == 6);
        CHECK(is_independent_set(g, b));
        CHECK(is_maximal(g, b));
    }
    CHECK(mis.solutions[0] != mis.solutions[1]);
    CHECK((mis.solutions[0] | mis.solutions[1]) == 0xFFFu);  // they partition the cycle

    // total maximal-IS count across cardinalities equals the Perrin number
    std::uint64_t total = 0;
    for (const auto& [card, count] : mis.maximal_count) total += count;
    CHECK(total == cycle_maximal_count(12));  // 29
}

TEST_CASE("triangle and edgeless graphs bracket the extremes") {
    auto tri = unit_disk_graph(triangle(), 6.0);
    CHECK(tri.edges.size() == 3);
    auto mis = enumerate_max_independent_sets(tri);
    CHECK(mis.max_cardinality == 1);
    CHECK(mis.solutions.size() == 3);
    CHECK(mis.maximal_count.at(1) == 3);

    auto loose = unit_disk_graph(triangle(), 1.0);  // below every pair distance
    CHECK(loose.edges.empty());
    auto all = enumerate_max_independent_sets(loose);
    CHECK(all.max_cardinality == 3);
    REQUIRE(all.solutions.size() == 1);
    CHECK(all.solutions[0] == 0b111u);
    CHECK(all.maximal_count.at(3) == 1);
}

TEST_CASE("distance exactly at the radius is an edge") {
    AtomRegister pair({{0.0, 0.0}, {7.0, 0.0}});
    CHECK(unit_disk_graph(pair, 7.0).edges.size() == 1);
    CHECK(unit_disk_graph(pair, 7.0 - 1e-9).edges.empty());
}

TEST_CASE("path graph maximal sets by hand enumeration") {
    AtomRegister path({{0.0, 0.0}, {5.0, 0.0}, {10.0, 0.0}, {15.0, 0.0}});
    auto g = unit_disk_graph(path, 5.0);
    CHECK(g.edges.size() == 3);
    auto mis = enumerate_max_independent_sets(g);
    CHECK(mis.max_cardinality == 2);
    CHECK(mis.solutions.size() == 3);  // {0,2} {0,3} {1,3}
    CHECK(mis.maximal_count.size() == 1);
    CHECK(mis.maximal_count.at(2) == 3);
}

TEST_CASE("independence and maximality predicates") {
    auto g = unit_disk_graph(triangle(), 6.0);
    CHECK(is_independent_set(g, 0));  // empty set
    CHECK(is_independent_set(g, 0b001));
    CHECK_FALSE(is_independent_set(g, 0b011));
    CHECK_FALSE(is_maximal(g, 0));  // any vertex is addable
    CHECK(is_maximal(g, 0b010));
    CHECK_THROWS_AS(is_maximal(g, 0b011), std::invalid_argument);
}

TEST_CASE("relabeling atoms permutes solutions without changing structure") {
    auto base = square_loop12();
    std::vector<std::array<double, 2>> shuffled(base.positions);
    // rotate labels by 5 (coprime with 12 keeps it a relabeling of the cycle)
    std::vector<std::array<double, 2>> perm(12);
    for (int i = 0; i < 12; ++i) perm[(i * 5) % 12] = base.positions[i];
    auto g1 = unit_disk_graph(base, 7.0);
    auto g2 = unit_disk_graph(AtomRegister(perm), 7.0);
    auto m1 = enumerate_max_independent_sets(g1);
    auto m2 = enumerate_max_independent_sets(g2);
    CHECK(m1.max_cardinality == m2.max_cardinality);
    CHECK(m1.solutions.size() == m2.solutions.size());
    CHECK(m1.maximal_count == m2.maximal_count);
}

TEST_CASE("histogram classification labels and masses") {
    auto g = unit_disk_graph(triangle(), 6.0);
    BitstringHistogram h;
    h.n = 3;
    h.entries = {{0b000, 0.1}, {0b001, 0.5}, {0b011, 0.4}};
    auto cls = classify_histogram(g, h);
    CHECK(cls.labels.at(0b000) == ISLabel::is);          // empty, not maximal
    CHECK(cls.labels.at(0b001) == ISLabel::maximum_is);  // single vertex is alpha here
    CHECK(cls.labels.at(0b011) == ISLabel::not_is);
    CHECK(cls.mass_per_label.at(ISLabel::is) == doctest::Approx(0.1));
    CHECK(cls.mass_per_label.at(ISLabel::maximum_is) == doctest::Approx(0.5));
    CHECK(cls.mass_per_label.at(ISLabel::not_is) == doctest::Approx(0.4));
    CHECK(cls.mass_per_cardinality.at(0) == doctest::Approx(0.1));
    CHECK(cls.mass_per_cardinality.at(1) == doctest::Approx(0.5));
    CHECK(cls.mass_per_cardinality.count(2) == 0);

    // sampled-mode masses are normalized by shots
    BitstringHistogram counts;
    counts.n = 3;
    counts.shots = 10;
    counts.entries = {{0b001, 10.0}};
    auto cs = classify_histogram(g, counts);
    CHECK(cs.mass_per_label.at(ISLabel::maximum_is) == doctest::Approx(1.0));

    CHECK(std::string(to_string(ISLabel::maximal_is)) == "maximal-IS");
}

TEST_CASE("graph input validation") {
    CHECK_THROWS_AS(unit_disk_graph(triangle(), 0.0), std::invalid_argument);

    auto g = unit_disk_graph(triangle(), 6.0);
    BitstringHistogram wrong;
    wrong.n = 2;
    wrong.entries = {{0, 1.0}};
    CHECK_THROWS_AS(classify_histogram(g, wrong), std::invalid_argument);

    std::vector<std::array<double, 2>> many(max_atoms + 1);
    for (int i = 0; i <= max_atoms; ++i) many[i] = {5.0 * i, 0.0};
    auto big = unit_disk_graph(AtomRegister(many), 1.0);
    CHECK_THROWS_AS(enumerate_max_independent_sets(big), std::invalid_argument);
}

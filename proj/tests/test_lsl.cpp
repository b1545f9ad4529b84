#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "leotopo/errors.hpp"
#include "leotopo/lsl.hpp"
#include "leotopo/stable_links.hpp"

using namespace leotopo;

namespace {

struct ToyContext {
    Snapshot snapshot;
    std::vector<CandidateEdge> candidates;
};

ToyContext toy_context() {
    const ShellConfig config = make_shell_config(12, 12, 550.0, 53.0);
    ToyContext ctx;
    ctx.snapshot = generate_synthetic_shell(config);
    ctx.candidates = build_stable_link_set(ctx.snapshot, compute_stable_region(config));
    return ctx;
}

bool is_ring_pair(const Snapshot& snapshot, SatelliteId a, SatelliteId b) {
    const int per_plane = snapshot.config.sats_per_plane;
    if (a / per_plane != b / per_plane) {
        return false;
    }
    const int ka = static_cast<int>(a % per_plane);
    const int kb = static_cast<int>(b % per_plane);
    const int gap = std::abs(ka - kb);
    return gap == 1 || gap == per_plane - 1;
}

}  // namespace

TEST_CASE("lsl builds rings plus bounded-span shortcuts") {
    const ToyContext ctx = toy_context();
    LslParams params;
    params.max_plane_span = 2;  // spans 1..2 are the stable ones at this scale
    params.degree_budget = 4;
    const Topology topo = build_lsl(ctx.snapshot, ctx.candidates, params);

    int ring_edges = 0;
    for (const auto& edge : topo.edges()) {
        CHECK(edge.plane_span <= params.max_plane_span);
        if (edge.plane_span == 0) {
            CHECK(is_ring_pair(ctx.snapshot, edge.a, edge.b));
            ++ring_edges;
        } else {
            CHECK(edge.plane_span >= 1);
        }
    }
    CHECK(ring_edges == 144);
    for (const SatelliteId id : topo.nodes()) {
        CHECK(topo.degree(id) <= params.degree_budget);
    }
    CHECK(topo.is_connected());
}

TEST_CASE("lsl is deterministic") {
    const ToyContext ctx = toy_context();
    LslParams params;
    params.max_plane_span = 2;
    const Topology first = build_lsl(ctx.snapshot, ctx.candidates, params);
    const Topology second = build_lsl(ctx.snapshot, ctx.candidates, params);
    REQUIRE(first.edge_count() == second.edge_count());
    for (const auto& edge : first.edges()) {
        CHECK(second.has_edge(edge.a, edge.b));
    }
}

TEST_CASE("cyclic spans stay balanced before the fill stage") {
    const ShellConfig config = make_shell_config(72, 22, 550.0, 53.0);
    const Snapshot snapshot = generate_synthetic_shell(config);
    const auto candidates = build_stable_link_set(snapshot, compute_stable_region(config));
    LslParams params;
    params.max_plane_span = 9;
    params.degree_budget = 4;
    params.fill_residual = false;
    const Topology topo = build_lsl(snapshot, candidates, params);

    std::map<int, int> per_span;
    for (const auto& edge : topo.edges()) {
        if (edge.plane_span >= 1) {
            ++per_span[edge.plane_span];
        }
    }
    REQUIRE(per_span.size() == 9);
    int lo = topo.edge_count();
    int hi = 0;
    for (const auto& [span, count] : per_span) {
        lo = std::min(lo, count);
        hi = std::max(hi, count);
    }
    CHECK(hi - lo <= config.num_planes);
}

TEST_CASE("residual fill only adds spare-degree shortcuts") {
    const ShellConfig config = make_shell_config(72, 22, 550.0, 53.0);
    const Snapshot snapshot = generate_synthetic_shell(config);
    const auto candidates = build_stable_link_set(snapshot, compute_stable_region(config));
    LslParams no_fill;
    no_fill.max_plane_span = 9;
    no_fill.fill_residual = false;
    LslParams with_fill = no_fill;
    with_fill.fill_residual = true;
    const Topology base = build_lsl(snapshot, candidates, no_fill);
    const Topology filled = build_lsl(snapshot, candidates, with_fill);
    CHECK(filled.edge_count() >= base.edge_count());
    for (const auto& edge : base.edges()) {
        CHECK(filled.has_edge(edge.a, edge.b));
    }
    // Fill-maximality: no remaining in-span candidate has two spare endpoints.
    for (const auto& cand : candidates) {
        if (cand.plane_span < 1 || cand.plane_span > 9 || filled.has_edge(cand.a, cand.b)) {
            continue;
        }
        const bool both_spare =
            filled.degree(cand.a) < 4 && filled.degree(cand.b) < 4;
        CHECK_FALSE(both_spare);
    }
}

TEST_CASE("partial deployment skips missing satellites") {
    const ToyContext full = toy_context();
    Snapshot snapshot = full.snapshot;
    std::vector<SatelliteState> kept;
    for (const auto& sat : snapshot.satellites) {
        if (sat.id % 13 == 1) {
            continue;
        }
        kept.push_back(sat);
    }
    snapshot.satellites = kept;
    const auto candidates =
        build_stable_link_set(snapshot, compute_stable_region(snapshot.config));
    LslParams params;
    params.max_plane_span = 2;
    const Topology topo = build_lsl(snapshot, candidates, params);
    for (const SatelliteId id : topo.nodes()) {
        CHECK(topo.degree(id) <= params.degree_budget);
    }
    // Rings skip over gaps: each populated plane contributes a cycle over the
    // satellites that remain.
    std::map<int, int> intra_per_plane;
    std::map<int, int> members_per_plane;
    for (const auto& sat : snapshot.satellites) {
        ++members_per_plane[sat.plane_index];
    }
    for (const auto& edge : topo.edges()) {
        if (edge.plane_span == 0) {
            ++intra_per_plane[static_cast<int>(edge.a / 12)];
        }
    }
    std::set<std::pair<SatelliteId, SatelliteId>> stable;
    for (const auto& cand : candidates) {
        stable.insert({cand.a, cand.b});
    }
    std::map<int, std::vector<const SatelliteState*>> roster;
    for (const auto& sat : snapshot.satellites) {
        roster[sat.plane_index].push_back(&sat);
    }
    for (auto& [plane, sats] : roster) {
        if (sats.size() < 3) {
            continue;
        }
        std::sort(sats.begin(), sats.end(), [](const SatelliteState* x, const SatelliteState* y) {
            return x->anomaly_deg < y->anomaly_deg;
        });
        int expected = 0;
        for (std::size_t m = 0; m < sats.size(); ++m) {
            const SatelliteState* a = sats[m];
            const SatelliteState* b = sats[(m + 1) % sats.size()];
            expected += stable.count({std::min(a->id, b->id), std::max(a->id, b->id)}) ? 1 : 0;
        }
        CHECK(intra_per_plane[plane] == expected);
    }
}

TEST_CASE("budget three leaves room for one shortcut per satellite") {
    const ToyContext ctx = toy_context();
    LslParams params;
    params.max_plane_span = 2;
    params.degree_budget = 3;
    const Topology topo = build_lsl(ctx.snapshot, ctx.candidates, params);
    for (const SatelliteId id : topo.nodes()) {
        CHECK(topo.degree(id) <= 3);
        int inter = 0;
        const int idx = topo.index_of(id);
        for (const auto& [nbr, slot] : topo.adjacency()[idx]) {
            if (topo.edge_at(slot).plane_span >= 1) {
                ++inter;
            }
        }
        CHECK(inter <= 1);
    }
}

TEST_CASE("lsl validates its parameters") {
    const ToyContext ctx = toy_context();
    LslParams bad_span;
    bad_span.max_plane_span = 7;  // > 12/2
    CHECK_THROWS_AS(build_lsl(ctx.snapshot, ctx.candidates, bad_span), ValidationError);
    LslParams bad_budget;
    bad_budget.max_plane_span = 2;
    bad_budget.degree_budget = 1;
    CHECK_THROWS_AS(build_lsl(ctx.snapshot, ctx.candidates, bad_budget), ValidationError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "leotopo/errors.hpp"
#include "leotopo/evaluation.hpp"
#include "leotopo/rng.hpp"
#include "leotopo/stable_links.hpp"
#include "leotopo/topology.hpp"

using namespace leotopo;

namespace {

Snapshot line_snapshot(int n) {
    Snapshot snapshot;
    snapshot.config = make_shell_config(1, std::max(n, 2), 550.0, 53.0);
    snapshot.label = "line";
    for (int i = 0; i < n; ++i) {
        snapshot.satellites.push_back({i, 0, 0.0, wrap_deg(i * 1.0)});
    }
    return snapshot;
}

// Independent max-min oracle: repeatedly find the tightest link, hand every
// unfrozen flow on it that link's fair share, and freeze them.
std::vector<double> bottleneck_freezing(const std::vector<std::vector<int>>& flow_links,
                                        int link_count, double capacity) {
    const std::size_t flows = flow_links.size();
    std::vector<double> rate(flows, 0.0);
    std::vector<char> frozen(flows, 0);
    std::vector<double> frozen_load(link_count, 0.0);
    std::size_t remaining = flows;
    while (remaining > 0) {
        double best_share = std::numeric_limits<double>::infinity();
        int best_link = -1;
        for (int link = 0; link < link_count; ++link) {
            int unfrozen = 0;
            for (std::size_t f = 0; f < flows; ++f) {
                if (!frozen[f] &&
                    std::find(flow_links[f].begin(), flow_links[f].end(), link) !=
                        flow_links[f].end()) {
                    ++unfrozen;
                }
            }
            if (unfrozen == 0) {
                continue;
            }
            const double share = (capacity - frozen_load[link]) / unfrozen;
            if (share < best_share) {
                best_share = share;
                best_link = link;
            }
        }
        if (best_link < 0) {
            for (std::size_t f = 0; f < flows; ++f) {
                if (!frozen[f]) {
                    rate[f] = capacity;
                    frozen[f] = 1;
                    --remaining;
                }
            }
            break;
        }
        for (std::size_t f = 0; f < flows; ++f) {
            if (frozen[f] ||
                std::find(flow_links[f].begin(), flow_links[f].end(), best_link) ==
                    flow_links[f].end()) {
                continue;
            }
            rate[f] = best_share;
            frozen[f] = 1;
            --remaining;
            for (const int link : flow_links[f]) {
                frozen_load[link] += best_share;
            }
        }
    }
    return rate;
}

}  // namespace

TEST_CASE("two nodes over 1000 km") {
    Snapshot snapshot = line_snapshot(2);
    Topology topo = Topology::for_snapshot(snapshot, 4, Provenance::Lsl);
    topo.add_edge(0, 1, 1000.0, 1000.0, 0);
    const EvalReport report = shortest_path_metrics(topo, snapshot);
    CHECK(report.avg_delay_ms == doctest::Approx(3.3356409520).epsilon(1e-9));
    CHECK(report.avg_hops == doctest::Approx(1.0));
    CHECK(report.worst_hops == 1);
    CHECK(report.pair_count == 1);
}

TEST_CASE("hop metric is unweighted even when distances disagree") {
    Snapshot snapshot = line_snapshot(3);
    Topology topo = Topology::for_snapshot(snapshot, 4, Provenance::Lsl);
    topo.add_edge(0, 1, 10.0, 10.0, 0);
    topo.add_edge(1, 2, 10.0, 10.0, 0);
    topo.add_edge(0, 2, 100.0, 100.0, 0);
    const EvalReport report = shortest_path_metrics(topo, snapshot);
    // Distance routing for 0-2 goes through 1 (20 km), hops report the direct
    // one-hop connectivity.
    const double expected_delay = (10.0 + 10.0 + 20.0) / 3.0 * 1000.0 / kSpeedOfLightKmPerS;
    CHECK(report.avg_delay_ms == doctest::Approx(expected_delay).epsilon(1e-9));
    CHECK(report.avg_hops == doctest::Approx(1.0));
}

TEST_CASE("clique delay equals mean pairwise distance over c") {
    const ShellConfig config = make_shell_config(2, 3, 550.0, 53.0);
    const Snapshot snapshot = generate_synthetic_shell(config);
    Topology clique = Topology::for_snapshot(snapshot, 0, Provenance::Floor);
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < snapshot.satellites.size(); ++i) {
        for (std::size_t j = i + 1; j < snapshot.satellites.size(); ++j) {
            const double dist = instantaneous_distance(snapshot.satellites[i],
                                                       snapshot.satellites[j], config, 0.0);
            clique.add_edge(snapshot.satellites[i].id, snapshot.satellites[j].id, dist, dist,
                            0);
            sum += dist;
            ++pairs;
        }
    }
    const EvalReport report = shortest_path_metrics(clique, snapshot);
    CHECK(report.avg_delay_ms ==
          doctest::Approx(sum / pairs * 1000.0 / kSpeedOfLightKmPerS).epsilon(1e-9));
    CHECK(report.avg_hops == doctest::Approx(1.0));
}

TEST_CASE("plus grid hops equal torus distance on an aligned toy shell") {
    ShellConfig config = make_shell_config(12, 12, 550.0, 53.0);
    config.phasing_offset_deg = 0.0;
    const Snapshot snapshot = generate_synthetic_shell(config);
    const auto candidates =
        build_snapshot_link_set(snapshot, std::numeric_limits<double>::infinity());
    const Topology grid = build_plus_grid(snapshot, candidates);

    // With aligned planes the grid is exactly the 12x12 torus, so BFS hops
    // equal circular Manhattan distance.
    const EvalReport report = shortest_path_metrics(grid, snapshot);
    double manhattan_sum = 0.0;
    int pairs = 0;
    for (int a = 0; a < 144; ++a) {
        for (int b = a + 1; b < 144; ++b) {
            const int pa = a / 12, ka = a % 12;
            const int pb = b / 12, kb = b % 12;
            const int dp = std::min(std::abs(pa - pb), 12 - std::abs(pa - pb));
            const int dk = std::min(std::abs(ka - kb), 12 - std::abs(ka - kb));
            manhattan_sum += dp + dk;
            ++pairs;
        }
    }
    CHECK(report.avg_hops == doctest::Approx(manhattan_sum / pairs).epsilon(1e-12));
}

TEST_CASE("histograms cover every connected pair") {
    const ShellConfig config = make_shell_config(12, 12, 550.0, 53.0);
    const Snapshot snapshot = generate_synthetic_shell(config);
    const auto candidates =
        build_stable_link_set(snapshot, compute_stable_region(config));
    const Topology grid = build_plus_grid(snapshot, candidates);
    const EvalReport report = shortest_path_metrics(grid, snapshot);
    const auto delay_total = std::accumulate(report.delay_histogram.begin(),
                                             report.delay_histogram.end(), std::int64_t{0});
    const auto hop_total = std::accumulate(report.hop_histogram.begin(),
                                           report.hop_histogram.end(), std::int64_t{0});
    CHECK(delay_total == report.pair_count);
    CHECK(hop_total == report.pair_count);
}

TEST_CASE("disconnected pairs are excluded and counted") {
    Snapshot snapshot = line_snapshot(4);
    Topology topo = Topology::for_snapshot(snapshot, 4, Provenance::Lsl);
    topo.add_edge(0, 1, 50.0, 50.0, 0);
    topo.add_edge(2, 3, 50.0, 50.0, 0);
    const EvalReport report = shortest_path_metrics(topo, snapshot);
    CHECK(report.pair_count == 2);
    CHECK(report.disconnected_pairs == 4);
    CHECK(report.avg_hops == doctest::Approx(1.0));
}

TEST_CASE("max-min splits a shared link evenly") {
    Snapshot snapshot = line_snapshot(4);
    Topology topo = Topology::for_snapshot(snapshot, 4, Provenance::Lsl);
    topo.add_edge(0, 1, 10.0, 10.0, 0);
    topo.add_edge(1, 2, 10.0, 10.0, 0);
    topo.add_edge(2, 3, 10.0, 10.0, 0);
    TrafficMatrix matrix;
    matrix.flows.push_back({0, 3, 5.0});
    const FlowAllocation alone = maxmin_throughput(topo, matrix);
    REQUIRE(alone.rate_gbps.size() == 2);
    CHECK(alone.rate_gbps[0] == doctest::Approx(100.0));
    CHECK(alone.rate_gbps[1] == doctest::Approx(100.0));
    CHECK(alone.aggregate_tbps == doctest::Approx(0.2));

    matrix.flows.push_back({1, 3, 5.0});
    const FlowAllocation shared = maxmin_throughput(topo, matrix);
    REQUIRE(shared.rate_gbps.size() == 4);
    // Both forward flows share links 1->2->3; each direction splits 50/50.
    CHECK(shared.rate_gbps[0] == doctest::Approx(50.0));
    CHECK(shared.rate_gbps[2] == doctest::Approx(50.0));
}

TEST_CASE("hand-built water-filling oracle: five shared plus one free") {
    // Six pair-flows: five cross one shared bottleneck, one rides alone.
    Snapshot snapshot;
    snapshot.config = make_shell_config(1, 16, 550.0, 53.0);
    snapshot.label = "star";
    for (int i = 0; i < 14; ++i) {
        snapshot.satellites.push_back({i, 0, 0.0, wrap_deg(i * 1.0)});
    }
    Topology topo = Topology::for_snapshot(snapshot, 0, Provenance::Floor);
    // Sources 0..4 feed hub 10; hub 10 links to hub 11; 11 fans out to 5..9.
    for (int s = 0; s < 5; ++s) {
        topo.add_edge(s, 10, 10.0, 10.0, 0);
        topo.add_edge(11, 5 + s, 10.0, 10.0, 0);
    }
    topo.add_edge(10, 11, 10.0, 10.0, 0);
    topo.add_edge(12, 13, 10.0, 10.0, 0);

    TrafficMatrix matrix;
    for (int s = 0; s < 5; ++s) {
        matrix.flows.push_back({s, 5 + s, 5.0});
    }
    matrix.flows.push_back({12, 13, 5.0});
    const FlowAllocation allocation = maxmin_throughput(topo, matrix);
    REQUIRE(allocation.rate_gbps.size() == 12);
    for (int s = 0; s < 5; ++s) {
        CHECK(allocation.rate_gbps[2 * s] == doctest::Approx(20.0));
        CHECK(allocation.rate_gbps[2 * s + 1] == doctest::Approx(20.0));
    }
    CHECK(allocation.rate_gbps[10] == doctest::Approx(100.0));
    CHECK(allocation.rate_gbps[11] == doctest::Approx(100.0));
}

TEST_CASE("water-filling matches the bottleneck-freezing oracle on random instances") {
    Rng rng(31);
    for (int instance = 0; instance < 60; ++instance) {
        const int n = 4 + static_cast<int>(rng.uniform_below(17));
        Snapshot snapshot;
        snapshot.config = make_shell_config(1, std::max(n, 2), 550.0, 53.0);
        snapshot.label = "random";
        for (int i = 0; i < n; ++i) {
            snapshot.satellites.push_back({i, 0, 0.0, wrap_deg(i * 1.0)});
        }
        Topology topo = Topology::for_snapshot(snapshot, 0, Provenance::Floor);
        for (int i = 1; i < n; ++i) {
            const int parent = static_cast<int>(rng.uniform_below(i));
            topo.add_edge(parent, i, 10.0 + rng.uniform01() * 100.0,
                          10.0 + rng.uniform01() * 100.0, 0);
        }
        const int extra = static_cast<int>(rng.uniform_below(n));
        for (int e = 0; e < extra; ++e) {
            const int a = static_cast<int>(rng.uniform_below(n));
            const int b = static_cast<int>(rng.uniform_below(n));
            if (a != b && !topo.has_edge(a, b)) {
                topo.add_edge(a, b, 10.0 + rng.uniform01() * 100.0,
                              10.0 + rng.uniform01() * 100.0, 0);
            }
        }
        const int flow_count = 1 + static_cast<int>(rng.uniform_below(10));
        TrafficMatrix matrix;
        std::set<std::pair<int, int>> used;
        while (static_cast<int>(matrix.flows.size()) < flow_count) {
            const int a = static_cast<int>(rng.uniform_below(n));
            const int b = static_cast<int>(rng.uniform_below(n));
            if (a == b || !used.insert({std::min(a, b), std::max(a, b)}).second) {
                continue;
            }
            matrix.flows.push_back({a, b, 0.5 + rng.uniform01() * 4.5});
        }
        const FlowAllocation allocation = maxmin_throughput(topo, matrix);

        // Recover each directed flow's links from the reported pair paths.
        std::vector<std::vector<int>> flow_links;
        for (std::size_t p = 0; p < allocation.pair_paths.size(); ++p) {
            const auto& path = allocation.pair_paths[p];
            std::vector<int> fwd;
            std::vector<int> rev;
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                int slot = -1;
                for (int e = 0; e < topo.edge_count(); ++e) {
                    const auto& edge = topo.edges()[e];
                    if ((edge.a == path[i] && edge.b == path[i + 1]) ||
                        (edge.b == path[i] && edge.a == path[i + 1])) {
                        slot = e;
                        break;
                    }
                }
                REQUIRE(slot >= 0);
                const bool along = topo.edges()[slot].a == path[i];
                fwd.push_back(slot * 2 + (along ? 0 : 1));
                rev.push_back(slot * 2 + (along ? 1 : 0));
            }
            const auto& flow = matrix.flows[p];
            const bool src_is_min = flow.src <= flow.dst;
            flow_links.push_back(src_is_min ? fwd : rev);
            flow_links.push_back(src_is_min ? rev : fwd);
        }
        const auto oracle =
            bottleneck_freezing(flow_links, topo.edge_count() * 2, 100.0);
        REQUIRE(oracle.size() == allocation.rate_gbps.size());
        for (std::size_t f = 0; f < oracle.size(); ++f) {
            CHECK(allocation.rate_gbps[f] == doctest::Approx(oracle[f]).epsilon(1e-9));
        }

        // Feasibility and the max-min blocking property.
        std::vector<double> load(topo.edge_count() * 2, 0.0);
        for (std::size_t f = 0; f < flow_links.size(); ++f) {
            for (const int link : flow_links[f]) {
                load[link] += allocation.rate_gbps[f];
            }
        }
        for (const double l : load) {
            CHECK(l <= 100.0 + 1e-9);
        }
        for (std::size_t f = 0; f < flow_links.size(); ++f) {
            if (allocation.rate_gbps[f] >= 100.0 - 1e-9) {
                continue;  // already at link capacity
            }
            bool blocked = false;
            for (const int link : flow_links[f]) {
                if (load[link] >= 100.0 - 1e-9) {
                    bool all_smaller_or_equal = true;
                    for (std::size_t g = 0; g < flow_links.size(); ++g) {
                        if (g == f ||
                            std::find(flow_links[g].begin(), flow_links[g].end(), link) ==
                                flow_links[g].end()) {
                            continue;
                        }
                        if (allocation.rate_gbps[g] > allocation.rate_gbps[f] + 1e-9) {
                            all_smaller_or_equal = false;
                            break;
                        }
                    }
                    if (all_smaller_or_equal) {
                        blocked = true;
                        break;
                    }
                }
            }
            CHECK(blocked);
        }
    }
}

TEST_CASE("demand caps clip rates when enabled") {
    Snapshot snapshot = line_snapshot(2);
    Topology topo = Topology::for_snapshot(snapshot, 4, Provenance::Lsl);
    topo.add_edge(0, 1, 10.0, 10.0, 0);
    TrafficMatrix matrix;
    matrix.flows.push_back({0, 1, 2.5});
    MaxMinOptions options;
    options.cap_at_demand = true;
    const FlowAllocation capped = maxmin_throughput(topo, matrix, options);
    CHECK(capped.rate_gbps[0] == doctest::Approx(2.5));
    CHECK(capped.rate_gbps[1] == doctest::Approx(2.5));
}

TEST_CASE("unroutable flows are rejected") {
    Snapshot snapshot = line_snapshot(4);
    Topology topo = Topology::for_snapshot(snapshot, 4, Provenance::Lsl);
    topo.add_edge(0, 1, 10.0, 10.0, 0);
    topo.add_edge(2, 3, 10.0, 10.0, 0);
    TrafficMatrix matrix;
    matrix.flows.push_back({0, 3, 1.0});
    CHECK_THROWS_AS(maxmin_throughput(topo, matrix), ValidationError);
}

TEST_CASE("flows_per_link counts each traversal once") {
    Snapshot snapshot = line_snapshot(4);
    Topology topo = Topology::for_snapshot(snapshot, 4, Provenance::Lsl);
    topo.add_edge(0, 1, 10.0, 10.0, 0);
    topo.add_edge(1, 2, 10.0, 10.0, 0);
    topo.add_edge(2, 3, 10.0, 10.0, 0);
    TrafficMatrix matrix;
    matrix.flows.push_back({0, 3, 1.0});
    const FlowsPerLinkReport report = flows_per_link(topo, matrix);
    REQUIRE(report.per_link.size() == 6);
    int ones = 0;
    for (const auto& entry : report.per_link) {
        CHECK(entry.flows == 1);  // one flow per direction on every link
        ones += entry.flows;
    }
    CHECK(ones == 6);

    const TrafficMatrix empty;
    const FlowsPerLinkReport zeros = flows_per_link(topo, empty);
    for (const auto& entry : zeros.per_link) {
        CHECK(entry.flows == 0);
    }
}

TEST_CASE("throughput sweep basics") {
    const ShellConfig config = make_shell_config(12, 12, 550.0, 53.0);
    const Snapshot snapshot = generate_synthetic_shell(config);
    const auto candidates =
        build_stable_link_set(snapshot, compute_stable_region(config));
    const Topology grid = build_plus_grid(snapshot, candidates);

    CHECK(throughput_sweep(grid, std::vector<int>{10}, 0, 1).empty());

    const std::vector<int> counts{5, 10};
    const auto first = throughput_sweep(grid, counts, 3, 17);
    const auto second = throughput_sweep(grid, counts, 3, 17);
    REQUIRE(first.size() == 2);
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].mean_aggregate_tbps ==
              doctest::Approx(second[i].mean_aggregate_tbps).epsilon(1e-12));
    }
    // More pairs cannot lower the aggregate in this uncapped model.
    CHECK(first[1].mean_aggregate_tbps >= first[0].mean_aggregate_tbps);
}

TEST_CASE("traffic matrix sampling honors invariants") {
    const ShellConfig config = make_shell_config(12, 12, 550.0, 53.0);
    const Snapshot snapshot = generate_synthetic_shell(config);
    const auto candidates =
        build_stable_link_set(snapshot, compute_stable_region(config));
    const Topology grid = build_plus_grid(snapshot, candidates);
    const TrafficMatrix matrix = sample_traffic_matrix(grid, 25, 99);
    CHECK(matrix.flows.size() == 25);
    std::set<std::pair<SatelliteId, SatelliteId>> seen;
    for (const auto& flow : matrix.flows) {
        CHECK(flow.src != flow.dst);
        CHECK(flow.demand_gbps >= 0.5);
        CHECK(flow.demand_gbps <= 5.0);
        CHECK(seen.insert({std::min(flow.src, flow.dst), std::max(flow.src, flow.dst)}).second);
    }
}

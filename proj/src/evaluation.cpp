#include "leotopo/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <queue>
#include <unordered_set>

#include "leotopo/errors.hpp"
#include "leotopo/parallel.hpp"
#include "leotopo/rng.hpp"

namespace leotopo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Compressed adjacency for the shortest-path sweeps.
struct CsrGraph {
    int n = 0;
    std::vector<int> offsets;
    std::vector<int> targets;
    std::vector<double> weights;
    std::vector<int> edge_slots;
};

CsrGraph build_csr(const Topology& topology, bool use_worst_case) {
    CsrGraph graph;
    graph.n = topology.node_count();
    graph.offsets.assign(graph.n + 1, 0);
    const auto edges = topology.edges();
    for (const auto& edge : edges) {
        ++graph.offsets[topology.index_of(edge.a) + 1];
        ++graph.offsets[topology.index_of(edge.b) + 1];
    }
    for (int v = 0; v < graph.n; ++v) {
        graph.offsets[v + 1] += graph.offsets[v];
    }
    graph.targets.resize(2 * edges.size());
    graph.weights.resize(2 * edges.size());
    graph.edge_slots.resize(2 * edges.size());
    std::vector<int> cursor(graph.offsets.begin(), graph.offsets.end() - 1);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto& edge = edges[e];
        const int ia = topology.index_of(edge.a);
        const int ib = topology.index_of(edge.b);
        const double w = use_worst_case ? edge.worst_case_km : edge.instantaneous_km;
        graph.targets[cursor[ia]] = ib;
        graph.weights[cursor[ia]] = w;
        graph.edge_slots[cursor[ia]] = static_cast<int>(e);
        ++cursor[ia];
        graph.targets[cursor[ib]] = ia;
        graph.weights[cursor[ib]] = w;
        graph.edge_slots[cursor[ib]] = static_cast<int>(e);
        ++cursor[ib];
    }
    return graph;
}

struct SourceStats {
    double delay_sum_ms = 0.0;
    std::int64_t hop_sum = 0;
    int worst_hops = 0;
    std::int64_t reached = 0;  // nodes with index > source reached
    std::int64_t unreachable = 0;
    std::vector<std::int64_t> delay_bins;
    std::vector<std::int64_t> hop_bins;
};

void dijkstra(const CsrGraph& graph, int source, std::vector<double>& dist) {
    dist.assign(graph.n, kInf);
    dist[source] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) {
            continue;
        }
        for (int e = graph.offsets[v]; e < graph.offsets[v + 1]; ++e) {
            const int to = graph.targets[e];
            const double nd = d + graph.weights[e];
            if (nd < dist[to]) {
                dist[to] = nd;
                heap.emplace(nd, to);
            }
        }
    }
}

void bfs_hops(const CsrGraph& graph, int source, std::vector<int>& hops,
              std::vector<int>& queue) {
    hops.assign(graph.n, -1);
    hops[source] = 0;
    queue.clear();
    queue.push_back(source);
    std::size_t head = 0;
    while (head < queue.size()) {
        const int v = queue[head++];
        for (int e = graph.offsets[v]; e < graph.offsets[v + 1]; ++e) {
            const int to = graph.targets[e];
            if (hops[to] == -1) {
                hops[to] = hops[v] + 1;
                queue.push_back(to);
            }
        }
    }
}

}  // namespace

EvalReport shortest_path_metrics(const Topology& topology, const Snapshot& snapshot,
                                 const EvalOptions& options) {
    std::unordered_set<SatelliteId> snapshot_ids;
    snapshot_ids.reserve(snapshot.satellites.size());
    for (const auto& sat : snapshot.satellites) {
        snapshot_ids.insert(sat.id);
    }
    for (const SatelliteId id : topology.nodes()) {
        if (snapshot_ids.count(id) == 0) {
            throw ValidationError("topology node " + std::to_string(id) +
                                  " is not in snapshot '" + snapshot.label + "'");
        }
    }
    if (topology.node_count() == 0) {
        throw ValidationError("cannot evaluate an empty topology");
    }

    const CsrGraph graph = build_csr(topology, options.use_worst_case_for_delay);
    const double ms_per_km = 1000.0 / kSpeedOfLightKmPerS;
    const double bin_ms = options.delay_bin_ms > 0 ? options.delay_bin_ms : 1.0;
    const int n = graph.n;

    std::vector<SourceStats> per_source(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
        std::vector<double> dist;
        std::vector<int> hops;
        std::vector<int> queue;
        for (std::size_t s = begin; s < end; ++s) {
            auto& stats = per_source[s];
            dijkstra(graph, static_cast<int>(s), dist);
            bfs_hops(graph, static_cast<int>(s), hops, queue);
            for (int t = static_cast<int>(s) + 1; t < n; ++t) {
                if (hops[t] < 0) {
                    ++stats.unreachable;
                    continue;
                }
                const double delay = dist[t] * ms_per_km;
                stats.delay_sum_ms += delay;
                stats.hop_sum += hops[t];
                stats.worst_hops = std::max(stats.worst_hops, hops[t]);
                ++stats.reached;
                const auto bin = static_cast<std::size_t>(delay / bin_ms);
                if (stats.delay_bins.size() <= bin) {
                    stats.delay_bins.resize(bin + 1, 0);
                }
                ++stats.delay_bins[bin];
                const auto hbin = static_cast<std::size_t>(hops[t]);
                if (stats.hop_bins.size() <= hbin) {
                    stats.hop_bins.resize(hbin + 1, 0);
                }
                ++stats.hop_bins[hbin];
            }
        }
    }, options.threads);

    EvalReport report;
    report.delay_bin_ms = bin_ms;
    double delay_sum = 0.0;
    std::int64_t hop_sum = 0;
    for (const auto& stats : per_source) {
        delay_sum += stats.delay_sum_ms;
        hop_sum += stats.hop_sum;
        report.worst_hops = std::max(report.worst_hops, stats.worst_hops);
        report.pair_count += stats.reached;
        report.disconnected_pairs += stats.unreachable;
        if (report.delay_histogram.size() < stats.delay_bins.size()) {
            report.delay_histogram.resize(stats.delay_bins.size(), 0);
        }
        for (std::size_t i = 0; i < stats.delay_bins.size(); ++i) {
            report.delay_histogram[i] += stats.delay_bins[i];
        }
        if (report.hop_histogram.size() < stats.hop_bins.size()) {
            report.hop_histogram.resize(stats.hop_bins.size(), 0);
        }
        for (std::size_t i = 0; i < stats.hop_bins.size(); ++i) {
            report.hop_histogram[i] += stats.hop_bins[i];
        }
    }
    if (report.pair_count > 0) {
        report.avg_delay_ms = delay_sum / static_cast<double>(report.pair_count);
        report.avg_hops = static_cast<double>(hop_sum) / static_cast<double>(report.pair_count);
    }
    if (options.floor_delay_ms > 0.0) {
        report.delay_stretch = report.avg_delay_ms / options.floor_delay_ms;
    }
    return report;
}

namespace {

// Lexicographically smallest shortest path between two nodes: walk the
// shortest-path DAG greedily, restricted to nodes that still reach the target.
std::vector<int> lex_min_shortest_path(const CsrGraph& graph, int source, int target) {
    std::vector<double> dist;
    dijkstra(graph, source, dist);
    if (dist[target] == kInf) {
        return {};
    }
    // Reverse reachability of target inside the DAG.
    std::vector<double> dist_to_target;
    dijkstra(graph, target, dist_to_target);
    const double total = dist[target];
    const double slack = 1e-9 * std::max(1.0, total);

    std::vector<int> path{source};
    int current = source;
    while (current != target) {
        int best = -1;
        for (int e = graph.offsets[current]; e < graph.offsets[current + 1]; ++e) {
            const int to = graph.targets[e];
            if (std::abs(dist[current] + graph.weights[e] + dist_to_target[to] - total) > slack) {
                continue;
            }
            if (best == -1 || to < best) {
                best = to;
            }
        }
        if (best == -1) {
            throw ValidationError("shortest-path walk failed; inconsistent distances");
        }
        path.push_back(best);
        current = best;
    }
    return path;
}

struct RoutedFlows {
    // Per directed flow: list of directed link ids (edge slot * 2 + dir).
    std::vector<std::vector<int>> links;
    std::vector<double> demand;
    std::vector<std::vector<SatelliteId>> pair_paths;
};

RoutedFlows route_flows(const Topology& topology, const TrafficMatrix& matrix,
                        const CsrGraph& graph) {
    RoutedFlows routed;
    routed.links.reserve(matrix.flows.size() * 2);
    routed.demand.reserve(matrix.flows.size() * 2);
    routed.pair_paths.reserve(matrix.flows.size());

    std::unordered_map<std::uint64_t, int> slot_by_pair;
    slot_by_pair.reserve(topology.edges().size());
    for (std::size_t e = 0; e < topology.edges().size(); ++e) {
        const auto& edge = topology.edges()[e];
        const auto ia = static_cast<std::uint64_t>(topology.index_of(edge.a));
        const auto ib = static_cast<std::uint64_t>(topology.index_of(edge.b));
        slot_by_pair.emplace((std::min(ia, ib) << 32) | std::max(ia, ib), static_cast<int>(e));
    }

    for (const auto& flow : matrix.flows) {
        if (flow.src == flow.dst) {
            throw ValidationError("traffic flow with identical endpoints");
        }
        const int is = topology.index_of(std::min(flow.src, flow.dst));
        const int it = topology.index_of(std::max(flow.src, flow.dst));
        const std::vector<int> path = lex_min_shortest_path(graph, is, it);
        if (path.empty()) {
            throw ValidationError("unroutable flow between " + std::to_string(flow.src) +
                                  " and " + std::to_string(flow.dst));
        }
        std::vector<SatelliteId> id_path;
        id_path.reserve(path.size());
        for (const int v : path) {
            id_path.push_back(topology.id_of(v));
        }
        // Forward = src->dst; the canonical path runs min(src,dst)->max.
        const bool src_is_min = flow.src <= flow.dst;
        std::vector<int> fwd;
        std::vector<int> rev;
        fwd.reserve(path.size() - 1);
        rev.reserve(path.size() - 1);
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            const auto lo = static_cast<std::uint64_t>(std::min(path[i], path[i + 1]));
            const auto hi = static_cast<std::uint64_t>(std::max(path[i], path[i + 1]));
            const int slot = slot_by_pair.at((lo << 32) | hi);
            const bool along = path[i] < path[i + 1];  // direction a->b of the stored edge
            fwd.push_back(slot * 2 + (along ? 0 : 1));
            rev.push_back(slot * 2 + (along ? 1 : 0));
        }
        if (src_is_min) {
            routed.links.push_back(fwd);
            routed.links.push_back(rev);
        } else {
            routed.links.push_back(rev);
            routed.links.push_back(fwd);
        }
        routed.demand.push_back(flow.demand_gbps);
        routed.demand.push_back(flow.demand_gbps);
        routed.pair_paths.push_back(std::move(id_path));
    }
    return routed;
}

}  // namespace

TrafficMatrix sample_traffic_matrix(const Topology& topology, int pairs, std::uint64_t seed) {
    if (pairs < 0) {
        throw ValidationError("pair count must be >= 0");
    }
    const auto components = topology.connected_components();
    std::vector<int> component_of(topology.node_count(), -1);
    for (std::size_t c = 0; c < components.size(); ++c) {
        for (const SatelliteId id : components[c]) {
            component_of[topology.index_of(id)] = static_cast<int>(c);
        }
    }

    TrafficMatrix matrix;
    matrix.rng_seed = seed;
    Rng rng(seed);
    std::unordered_set<std::uint64_t> chosen;
    const auto& nodes = topology.nodes();
    const std::size_t n = nodes.size();
    if (pairs > 0 && n < 2) {
        throw ValidationError("need at least two satellites for traffic");
    }
    int guard = 0;
    while (static_cast<int>(matrix.flows.size()) < pairs) {
        if (++guard > pairs * 1000 + 1000) {
            throw ValidationError("unable to sample enough connected src-dst pairs");
        }
        const int a = static_cast<int>(rng.uniform_below(n));
        const int b = static_cast<int>(rng.uniform_below(n));
        if (a == b || component_of[a] != component_of[b]) {
            continue;
        }
        const auto lo = static_cast<std::uint64_t>(std::min(a, b));
        const auto hi = static_cast<std::uint64_t>(std::max(a, b));
        if (!chosen.insert((lo << 32) | hi).second) {
            continue;
        }
        Flow flow;
        flow.src = nodes[a];
        flow.dst = nodes[b];
        // Gaussian demand truncated to [0.5, 5] by resampling.
        double demand = rng.normal(2.75, 0.75);
        while (demand < 0.5 || demand > 5.0) {
            demand = rng.normal(2.75, 0.75);
        }
        flow.demand_gbps = demand;
        matrix.flows.push_back(flow);
    }
    return matrix;
}

FlowAllocation maxmin_throughput(const Topology& topology, const TrafficMatrix& matrix,
                                 const MaxMinOptions& options) {
    if (options.link_capacity_gbps <= 0.0) {
        throw ValidationError("link capacity must be > 0");
    }
    const CsrGraph graph = build_csr(topology, false);
    RoutedFlows routed = route_flows(topology, matrix, graph);
    const std::size_t flow_count = routed.links.size();
    const std::size_t link_count = topology.edges().size() * 2;

    // Progressive filling: every unfrozen flow grows at the same rate; each
    // step advances to the next link saturation (or demand cap) and freezes
    // the flows it binds.
    std::vector<int> unfrozen_on_link(link_count, 0);
    std::vector<double> frozen_load(link_count, 0.0);
    std::vector<char> frozen(flow_count, 0);
    std::vector<double> rate(flow_count, 0.0);
    for (std::size_t f = 0; f < flow_count; ++f) {
        for (const int link : routed.links[f]) {
            ++unfrozen_on_link[link];
        }
    }

    double level = 0.0;
    std::size_t remaining = flow_count;
    while (remaining > 0) {
        double next_level = kInf;
        for (std::size_t link = 0; link < link_count; ++link) {
            if (unfrozen_on_link[link] == 0) {
                continue;
            }
            const double cap_level =
                (options.link_capacity_gbps - frozen_load[link]) / unfrozen_on_link[link];
            next_level = std::min(next_level, cap_level);
        }
        if (options.cap_at_demand) {
            for (std::size_t f = 0; f < flow_count; ++f) {
                if (!frozen[f]) {
                    next_level = std::min(next_level, routed.demand[f]);
                }
            }
        }
        if (next_level == kInf) {
            // Remaining flows traverse no links (impossible here since src!=dst)
            // or nothing binds them; freeze at capacity.
            for (std::size_t f = 0; f < flow_count; ++f) {
                if (!frozen[f]) {
                    frozen[f] = 1;
                    rate[f] = options.link_capacity_gbps;
                    --remaining;
                }
            }
            break;
        }
        level = next_level;
        // Freeze flows bound by a saturated link or their demand.
        const double eps = 1e-12 * std::max(1.0, options.link_capacity_gbps);
        std::vector<std::size_t> to_freeze;
        for (std::size_t f = 0; f < flow_count; ++f) {
            if (frozen[f]) {
                continue;
            }
            bool bound = false;
            if (options.cap_at_demand && routed.demand[f] <= level + eps) {
                bound = true;
            }
            if (!bound) {
                for (const int link : routed.links[f]) {
                    const double load =
                        frozen_load[link] + unfrozen_on_link[link] * level;
                    if (load >= options.link_capacity_gbps - eps) {
                        bound = true;
                        break;
                    }
                }
            }
            if (bound) {
                to_freeze.push_back(f);
            }
        }
        if (to_freeze.empty()) {
            throw ValidationError("max-min allocation failed to converge");
        }
        for (const std::size_t f : to_freeze) {
            frozen[f] = 1;
            rate[f] = level;
            --remaining;
            for (const int link : routed.links[f]) {
                --unfrozen_on_link[link];
                frozen_load[link] += level;
            }
        }
    }

    FlowAllocation allocation;
    allocation.rate_gbps = std::move(rate);
    allocation.pair_paths = std::move(routed.pair_paths);
    double total_gbps = 0.0;
    for (const double r : allocation.rate_gbps) {
        total_gbps += r;
    }
    allocation.aggregate_tbps = total_gbps / 1000.0;

    std::vector<int> flows_on_link(link_count, 0);
    for (std::size_t f = 0; f < flow_count; ++f) {
        for (const int link : routed.links[f]) {
            ++flows_on_link[link];
        }
    }
    for (std::size_t link = 0; link < link_count; ++link) {
        ++allocation.flows_per_link_histogram[flows_on_link[link]];
    }
    return allocation;
}

std::vector<ThroughputPoint> throughput_sweep(const Topology& topology,
                                              std::span<const int> pair_counts, int trials,
                                              std::uint64_t seed,
                                              const MaxMinOptions& options) {
    std::vector<ThroughputPoint> series;
    if (trials <= 0) {
        return series;
    }
    series.reserve(pair_counts.size());
    for (const int pairs : pair_counts) {
        ThroughputPoint point;
        point.pairs = pairs;
        point.per_trial_tbps.resize(trials, 0.0);
        parallel_for(static_cast<std::size_t>(trials), [&](std::size_t begin, std::size_t end) {
            for (std::size_t trial = begin; trial < end; ++trial) {
                const std::uint64_t trial_seed =
                    seed ^ (static_cast<std::uint64_t>(pairs) << 32) ^ trial;
                const TrafficMatrix matrix = sample_traffic_matrix(topology, pairs, trial_seed);
                point.per_trial_tbps[trial] =
                    maxmin_throughput(topology, matrix, options).aggregate_tbps;
            }
        });
        double sum = 0.0;
        for (const double v : point.per_trial_tbps) {
            sum += v;
        }
        point.mean_aggregate_tbps = sum / trials;
        series.push_back(std::move(point));
    }
    return series;
}

FlowsPerLinkReport flows_per_link(const Topology& topology, const TrafficMatrix& matrix) {
    const CsrGraph graph = build_csr(topology, false);
    const RoutedFlows routed = route_flows(topology, matrix, graph);
    const std::size_t link_count = topology.edges().size() * 2;
    std::vector<int> counts(link_count, 0);
    for (const auto& links : routed.links) {
        for (const int link : links) {
            ++counts[link];
        }
    }
    FlowsPerLinkReport report;
    report.per_link.reserve(link_count);
    for (std::size_t e = 0; e < topology.edges().size(); ++e) {
        const auto& edge = topology.edges()[e];
        report.per_link.push_back({edge.a, edge.b, counts[e * 2]});
        report.per_link.push_back({edge.b, edge.a, counts[e * 2 + 1]});
    }
    for (const int c : counts) {
        ++report.histogram[c];
    }
    return report;
}

void write_metrics_csv(std::span<const MetricsRow> rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open metrics csv for writing: " + path);
    }
    out << "method,isl_limit,avg_delay_ms,avg_hops,worst_hops,stretch,disconnected_pairs\n";
    char buffer[256];
    for (const auto& row : rows) {
        std::snprintf(buffer, sizeof(buffer), "%s,%d,%.4f,%.4f,%d,%.4f,%lld\n",
                      row.method.c_str(), row.isl_limit, row.report.avg_delay_ms,
                      row.report.avg_hops, row.report.worst_hops, row.report.delay_stretch,
                      static_cast<long long>(row.report.disconnected_pairs));
        out << buffer;
    }
}

void write_delay_histogram_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open histogram csv for writing: " + path);
    }
    out << "bin_start_ms,bin_end_ms,count\n";
    char buffer[128];
    for (std::size_t i = 0; i < report.delay_histogram.size(); ++i) {
        std::snprintf(buffer, sizeof(buffer), "%.3f,%.3f,%lld\n", i * report.delay_bin_ms,
                      (i + 1) * report.delay_bin_ms,
                      static_cast<long long>(report.delay_histogram[i]));
        out << buffer;
    }
}

void write_hop_histogram_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open histogram csv for writing: " + path);
    }
    out << "hops,count\n";
    for (std::size_t i = 0; i < report.hop_histogram.size(); ++i) {
        out << i << ',' << report.hop_histogram[i] << '\n';
    }
}

void write_throughput_csv(std::span<const ThroughputPoint> points, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open throughput csv for writing: " + path);
    }
    out << "pairs,trial,aggregate_tbps\n";
    char buffer[128];
    for (const auto& point : points) {
        for (std::size_t trial = 0; trial < point.per_trial_tbps.size(); ++trial) {
            std::snprintf(buffer, sizeof(buffer), "%d,%zu,%.6f\n", point.pairs, trial,
                          point.per_trial_tbps[trial]);
            out << buffer;
        }
    }
}

void write_flows_per_link_csv(const FlowsPerLinkReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open flows csv for writing: " + path);
    }
    out << "sat_from,sat_to,flow_count\n";
    for (const auto& entry : report.per_link) {
        out << entry.from << ',' << entry.to << ',' << entry.flows << '\n';
    }
}

}  // namespace leotopo

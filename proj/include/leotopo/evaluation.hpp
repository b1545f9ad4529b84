#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "leotopo/topology.hpp"

namespace leotopo {

struct EvalOptions {
    // Delay normally uses the snapshot's instantaneous distances; worst-case
    // lengths are available for sensitivity checks.
    bool use_worst_case_for_delay = false;
    // When > 0, delay_stretch is filled relative to this floor.
    double floor_delay_ms = 0.0;
    double delay_bin_ms = 1.0;
    unsigned threads = 0;
};

struct EvalReport {
    double avg_delay_ms = 0.0;
    double avg_hops = 0.0;
    int worst_hops = 0;
    double delay_stretch = 0.0;  // 0 when no floor was supplied
    double delay_bin_ms = 1.0;
    std::vector<std::int64_t> delay_histogram;  // bin i covers [i*bin, (i+1)*bin) ms
    std::vector<std::int64_t> hop_histogram;    // index = hop count
    std::int64_t pair_count = 0;                // connected unordered pairs
    std::int64_t disconnected_pairs = 0;
};

// All-pairs shortest-path statistics: delay over distance-weighted paths, hop
// counts over unweighted paths, computed per source in parallel.
EvalReport shortest_path_metrics(const Topology& topology, const Snapshot& snapshot,
                                 const EvalOptions& options = {});

struct Flow {
    SatelliteId src = 0;
    SatelliteId dst = 0;
    double demand_gbps = 0.0;
};

struct TrafficMatrix {
    std::vector<Flow> flows;
    std::uint64_t rng_seed = 0;
};

// Distinct connected source-destination pairs with truncated-Gaussian demands
// in [0.5, 5] Gbps.
TrafficMatrix sample_traffic_matrix(const Topology& topology, int pairs, std::uint64_t seed);

struct MaxMinOptions {
    double link_capacity_gbps = 100.0;
    bool cap_at_demand = false;
};

struct FlowAllocation {
    // Two directed flows per pair: [2i] = src->dst, [2i+1] = dst->src.
    std::vector<double> rate_gbps;
    double aggregate_tbps = 0.0;
    // Canonical node path per pair, used by both directions.
    std::vector<std::vector<SatelliteId>> pair_paths;
    // Histogram over directed links: flow count -> number of links.
    std::map<int, int> flows_per_link_histogram;
};

// Progressive water-filling max-min fair allocation over single shortest
// paths. Throws ValidationError when a pair is disconnected.
FlowAllocation maxmin_throughput(const Topology& topology, const TrafficMatrix& matrix,
                                 const MaxMinOptions& options = {});

struct ThroughputPoint {
    int pairs = 0;
    double mean_aggregate_tbps = 0.0;
    std::vector<double> per_trial_tbps;
};

std::vector<ThroughputPoint> throughput_sweep(const Topology& topology,
                                              std::span<const int> pair_counts, int trials,
                                              std::uint64_t seed,
                                              const MaxMinOptions& options = {});

struct LinkFlowCount {
    SatelliteId from = 0;
    SatelliteId to = 0;
    int flows = 0;
};

struct FlowsPerLinkReport {
    std::vector<LinkFlowCount> per_link;  // every directed link, zero counts included
    std::map<int, int> histogram;
};

FlowsPerLinkReport flows_per_link(const Topology& topology, const TrafficMatrix& matrix);

// CSV emission ---------------------------------------------------------------

struct MetricsRow {
    std::string method;
    int isl_limit = 0;
    EvalReport report;
};

void write_metrics_csv(std::span<const MetricsRow> rows, const std::string& path);
void write_delay_histogram_csv(const EvalReport& report, const std::string& path);
void write_hop_histogram_csv(const EvalReport& report, const std::string& path);
void write_throughput_csv(std::span<const ThroughputPoint> points, const std::string& path);
void write_flows_per_link_csv(const FlowsPerLinkReport& report, const std::string& path);

}  // namespace leotopo

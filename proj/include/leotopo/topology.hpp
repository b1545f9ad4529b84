#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "leotopo/shell.hpp"
#include "leotopo/stable_links.hpp"

namespace leotopo {

enum class Provenance { PlusGrid, ThreeIslGrid, Lsl, Sa, Floor, Incremental };

std::string provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

struct TopologyEdge {
    SatelliteId a = 0;  // a < b
    SatelliteId b = 0;
    double worst_case_km = 0.0;
    double instantaneous_km = 0.0;
    int plane_span = 0;
};

enum class AddEdgeResult { Added, Duplicate, DegreeViolation };

// Undirected degree-bounded ISL graph over one snapshot's active satellites.
// Floor topologies carry no degree bound.
class Topology {
public:
    Topology(std::vector<SatelliteId> nodes, int degree_budget, Provenance provenance);

    static Topology for_snapshot(const Snapshot& snapshot, int degree_budget,
                                 Provenance provenance);

    int node_count() const { return static_cast<int>(nodes_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<SatelliteId>& nodes() const { return nodes_; }
    std::span<const TopologyEdge> edges() const { return edges_; }

    int degree_budget() const { return degree_budget_; }
    bool budget_enforced() const { return provenance_ != Provenance::Floor; }
    Provenance provenance() const { return provenance_; }
    void set_provenance(Provenance p) { provenance_ = p; }

    bool has_node(SatelliteId id) const { return index_.count(id) != 0; }
    // Dense index of a node; throws ValidationError for unknown ids.
    int index_of(SatelliteId id) const;
    SatelliteId id_of(int index) const { return nodes_[index]; }

    bool has_edge(SatelliteId a, SatelliteId b) const;
    bool has_edge_idx(int ia, int ib) const;
    int degree(SatelliteId id) const { return degree_idx(index_of(id)); }
    int degree_idx(int index) const { return static_cast<int>(adjacency_[index].size()); }

    AddEdgeResult add_edge(const CandidateEdge& edge);
    AddEdgeResult add_edge(SatelliteId a, SatelliteId b, double worst_case_km,
                           double instantaneous_km, int plane_span);
    AddEdgeResult add_edge_idx(int ia, int ib, double worst_case_km, double instantaneous_km,
                               int plane_span);
    bool remove_edge(SatelliteId a, SatelliteId b);
    bool remove_edge_idx(int ia, int ib);

    // (neighbor index, edge slot) pairs per node index.
    const std::vector<std::vector<std::pair<int, int>>>& adjacency() const { return adjacency_; }
    const TopologyEdge& edge_at(int slot) const { return edges_[slot]; }

    // Node-id partitions, largest component first.
    std::vector<std::vector<SatelliteId>> connected_components() const;
    bool is_connected() const;

private:
    std::uint64_t pair_key(int ia, int ib) const;
    void unlink_adjacency(int node, int slot);

    std::vector<SatelliteId> nodes_;
    std::unordered_map<SatelliteId, int> index_;
    std::vector<std::vector<std::pair<int, int>>> adjacency_;
    std::vector<TopologyEdge> edges_;
    std::unordered_map<std::uint64_t, int> edge_slots_;
    int degree_budget_ = 0;
    Provenance provenance_ = Provenance::PlusGrid;
};

// Baselines -----------------------------------------------------------------

// 4-ISL grid: intra-plane ring neighbors plus the nearest stable satellite in
// each adjacent non-empty plane. Nearest is ranked by worst-case distance.
Topology build_plus_grid(const Snapshot& snapshot, std::span<const CandidateEdge> candidates);

// 3-ISL brick-wall grid; requires a full, even deployment.
Topology build_three_isl_grid(const Snapshot& snapshot, std::span<const CandidateEdge> candidates);

// Degree-unbounded graph of every pair instantaneously feasible at phase 0.
Topology build_theoretical_floor(const Snapshot& snapshot);

// Degree-unbounded graph over the stable-link set only.
Topology build_theoretical_floor(const Snapshot& snapshot,
                                 std::span<const CandidateEdge> stable_candidates);

// CSV -----------------------------------------------------------------------

// Rows: sat_a,sat_b,worst_case_km,instantaneous_km with a provenance preamble.
void write_topology_csv(const Topology& topology, const std::string& path,
                        const std::string& snapshot_label);

// Nodes come from the snapshot; the file supplies edges and provenance.
Topology load_topology_csv(const std::string& path, const Snapshot& snapshot);

}  // namespace leotopo

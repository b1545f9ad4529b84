#include "leotopo/incremental.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "leotopo/errors.hpp"

namespace leotopo {
namespace {

std::uint64_t id_pair_key(SatelliteId a, SatelliteId b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

using CandidateMap = std::unordered_map<std::uint64_t, const CandidateEdge*>;

CandidateMap candidate_lookup(std::span<const CandidateEdge> candidates) {
    CandidateMap map;
    map.reserve(candidates.size());
    for (const auto& edge : candidates) {
        map.emplace(id_pair_key(edge.a, edge.b), &edge);
    }
    return map;
}

// Retain previous-day edges that are still stable, refreshed with the new
// day's distances, shortest first under the budget.
void retain_edges(const Topology& prev, Topology& next, const CandidateMap& lookup,
                  UpdateLog* log) {
    std::vector<const CandidateEdge*> keep;
    keep.reserve(prev.edges().size());
    for (const auto& edge : prev.edges()) {
        if (!next.has_node(edge.a) || !next.has_node(edge.b)) {
            continue;
        }
        auto it = lookup.find(id_pair_key(edge.a, edge.b));
        if (it == lookup.end()) {
            if (log != nullptr) {
                ++log->dropped_infeasible;
            }
            continue;
        }
        keep.push_back(it->second);
    }
    std::sort(keep.begin(), keep.end(), [](const CandidateEdge* x, const CandidateEdge* y) {
        if (x->worst_case_km != y->worst_case_km) {
            return x->worst_case_km < y->worst_case_km;
        }
        if (x->a != y->a) {
            return x->a < y->a;
        }
        return x->b < y->b;
    });
    for (const CandidateEdge* edge : keep) {
        const AddEdgeResult result = next.add_edge(*edge);
        if (log != nullptr) {
            if (result == AddEdgeResult::Added) {
                ++log->retained;
            } else if (result == AddEdgeResult::DegreeViolation) {
                ++log->dropped_budget;
            }
        }
    }
}

// Attach smaller components to the largest through the cheapest feasible
// candidates until the graph is connected.
void repair_connectivity(Topology& topology, std::span<const CandidateEdge> candidates,
                         UpdateLog* log) {
    for (;;) {
        const auto components = topology.connected_components();
        if (components.size() <= 1) {
            return;
        }
        std::unordered_set<SatelliteId> largest(components[0].begin(), components[0].end());
        const CandidateEdge* best = nullptr;
        bool best_touches_largest = false;
        std::unordered_map<SatelliteId, int> component_of;
        for (std::size_t c = 0; c < components.size(); ++c) {
            for (const SatelliteId id : components[c]) {
                component_of.emplace(id, static_cast<int>(c));
            }
        }
        auto better = [](const CandidateEdge* x, const CandidateEdge* y) {
            if (x->worst_case_km != y->worst_case_km) {
                return x->worst_case_km < y->worst_case_km;
            }
            if (x->a != y->a) {
                return x->a < y->a;
            }
            return x->b < y->b;
        };
        for (const auto& edge : candidates) {
            if (!topology.has_node(edge.a) || !topology.has_node(edge.b)) {
                continue;
            }
            if (component_of.at(edge.a) == component_of.at(edge.b)) {
                continue;
            }
            if (topology.budget_enforced() &&
                (topology.degree(edge.a) >= topology.degree_budget() ||
                 topology.degree(edge.b) >= topology.degree_budget())) {
                continue;
            }
            const bool touches_largest =
                largest.count(edge.a) != 0 || largest.count(edge.b) != 0;
            if (best == nullptr || (touches_largest && !best_touches_largest) ||
                (touches_largest == best_touches_largest && better(&edge, best))) {
                best = &edge;
                best_touches_largest = touches_largest;
            }
        }
        if (best == nullptr) {
            throw InfeasibleDeploymentError(
                "connectivity repair found no feasible joining link across " +
                std::to_string(components.size()) + " components");
        }
        topology.add_edge(*best);
        if (log != nullptr) {
            ++log->repair_links;
        }
    }
}

}  // namespace

Topology update_lsl(const DayTransition& transition, const LslParams& params, UpdateLog* log) {
    const Provenance prev_prov = transition.prev_topology.provenance();
    if (prev_prov != Provenance::Lsl && prev_prov != Provenance::Incremental) {
        throw ValidationError("update_lsl expects a previous LSL or incremental topology");
    }
    transition.next_snapshot.validate();
    const int n_planes = transition.next_snapshot.config.num_planes;
    params.validate(n_planes);

    Topology next = Topology::for_snapshot(transition.next_snapshot, params.degree_budget,
                                           Provenance::Incremental);
    const CandidateMap lookup = candidate_lookup(transition.next_candidates);
    retain_edges(transition.prev_topology, next, lookup, log);

    // Ring refresh. Rings are the construction's backbone, so a blocked ring
    // edge may evict the longest retained non-ring edge at the full endpoint.
    std::vector<std::vector<const SatelliteState*>> planes(n_planes);
    for (const auto& sat : transition.next_snapshot.satellites) {
        planes[sat.plane_index].push_back(&sat);
    }
    for (auto& plane : planes) {
        std::sort(plane.begin(), plane.end(),
                  [](const SatelliteState* x, const SatelliteState* y) {
                      if (x->anomaly_deg != y->anomaly_deg) {
                          return x->anomaly_deg < y->anomaly_deg;
                      }
                      return x->id < y->id;
                  });
    }
    std::unordered_set<std::uint64_t> ring_keys;
    std::vector<const CandidateEdge*> ring_edges;
    for (const auto& plane : planes) {
        if (plane.size() < 2) {
            continue;
        }
        const std::size_t count = plane.size() == 2 ? 1 : plane.size();
        for (std::size_t m = 0; m < count; ++m) {
            const SatelliteState* a = plane[m];
            const SatelliteState* b = plane[(m + 1) % plane.size()];
            auto it = lookup.find(id_pair_key(a->id, b->id));
            if (it == lookup.end()) {
                continue;  // gap too wide to bridge stably
            }
            ring_keys.insert(id_pair_key(a->id, b->id));
            ring_edges.push_back(it->second);
        }
    }
    auto evict_non_ring = [&](SatelliteId node) {
        const TopologyEdge* longest = nullptr;
        for (const auto& [nbr, slot] : next.adjacency()[next.index_of(node)]) {
            const TopologyEdge& edge = next.edge_at(slot);
            if (ring_keys.count(id_pair_key(edge.a, edge.b)) != 0) {
                continue;
            }
            if (longest == nullptr || edge.worst_case_km > longest->worst_case_km ||
                (edge.worst_case_km == longest->worst_case_km &&
                 id_pair_key(edge.a, edge.b) < id_pair_key(longest->a, longest->b))) {
                longest = &edge;
            }
        }
        if (longest == nullptr) {
            return false;
        }
        const SatelliteId ea = longest->a;
        const SatelliteId eb = longest->b;
        next.remove_edge(ea, eb);
        if (log != nullptr) {
            ++log->ring_evictions;
            log->notes.push_back("evicted " + std::to_string(ea) + "-" + std::to_string(eb) +
                                 " to restore an intra-plane ring link");
        }
        return true;
    };
    for (const CandidateEdge* edge : ring_edges) {
        if (next.has_edge(edge->a, edge->b)) {
            continue;
        }
        if (next.degree(edge->a) >= params.degree_budget && !evict_non_ring(edge->a)) {
            continue;
        }
        if (next.degree(edge->b) >= params.degree_budget && !evict_non_ring(edge->b)) {
            continue;
        }
        next.add_edge(*edge);
    }

    repair_connectivity(next, transition.next_candidates, log);

    // Standard LSL inter-orbit pass over the remaining degree.
    const int span_limit = params.max_plane_span;
    for (int p = 0; p < n_planes; ++p) {
        const auto& members = planes[p];
        const bool descending = p % 2 == 0;
        for (std::size_t m = 0; m < members.size(); ++m) {
            const int cycle_pos = static_cast<int>(m % span_limit);
            const int span = descending ? span_limit - cycle_pos : 1 + cycle_pos;
            const SatelliteState* sat = members[m];
            if (next.degree(sat->id) >= params.degree_budget) {
                continue;
            }
            const int target_plane = (p + span) % n_planes;
            if (target_plane == p || planes[target_plane].empty()) {
                continue;
            }
            const CandidateEdge* best = nullptr;
            for (const SatelliteState* other : planes[target_plane]) {
                if (next.degree(other->id) >= params.degree_budget) {
                    continue;
                }
                auto it = lookup.find(id_pair_key(sat->id, other->id));
                if (it == lookup.end() || next.has_edge(sat->id, other->id)) {
                    continue;
                }
                const CandidateEdge* edge = it->second;
                if (best == nullptr || edge->worst_case_km < best->worst_case_km ||
                    (edge->worst_case_km == best->worst_case_km &&
                     std::min(edge->a, edge->b) < std::min(best->a, best->b))) {
                    best = edge;
                }
            }
            if (best != nullptr) {
                next.add_edge(*best);
            }
        }
    }

    if (params.fill_residual) {
        lsl_fill_residual(next, transition.next_candidates, params);
    }
    return next;
}

Topology update_sa(const DayTransition& transition, const SurrogateWeights& weights,
                   const AnnealSchedule& sched, UpdateLog* log) {
    const Provenance prev_prov = transition.prev_topology.provenance();
    if (prev_prov != Provenance::Sa && prev_prov != Provenance::Incremental) {
        throw ValidationError("update_sa expects a previous SA or incremental topology");
    }
    transition.next_snapshot.validate();
    const int budget = transition.prev_topology.degree_budget();

    Topology warm = Topology::for_snapshot(transition.next_snapshot, budget,
                                           Provenance::Incremental);
    const CandidateMap lookup = candidate_lookup(transition.next_candidates);
    retain_edges(transition.prev_topology, warm, lookup, log);
    repair_connectivity(warm, transition.next_candidates, log);

    Topology next = anneal(transition.next_snapshot, transition.next_candidates, budget,
                           weights, sched, &warm);
    next.set_provenance(Provenance::Incremental);
    return next;
}

BreakageReport measure_breakage(const DayTransition& transition) {
    BreakageReport report;
    std::unordered_set<SatelliteId> active;
    active.reserve(transition.next_snapshot.satellites.size());
    for (const auto& sat : transition.next_snapshot.satellites) {
        active.insert(sat.id);
    }
    std::unordered_set<std::uint64_t> feasible;
    feasible.reserve(transition.next_candidates.size());
    for (const auto& edge : transition.next_candidates) {
        feasible.insert(id_pair_key(edge.a, edge.b));
    }
    report.selected_prev = static_cast<int>(transition.prev_topology.edges().size());
    for (const auto& edge : transition.prev_topology.edges()) {
        if (active.count(edge.a) == 0 || active.count(edge.b) == 0) {
            ++report.endpoint_removed;
            ++report.broken;
        } else if (feasible.count(id_pair_key(edge.a, edge.b)) == 0) {
            ++report.infeasible_now;
            ++report.broken;
        }
    }
    report.breakage_rate_pct =
        report.selected_prev == 0
            ? 0.0
            : 100.0 * static_cast<double>(report.broken) / report.selected_prev;
    return report;
}

int edge_churn(const Topology& before, const Topology& after) {
    std::unordered_set<std::uint64_t> before_keys;
    before_keys.reserve(before.edges().size());
    for (const auto& edge : before.edges()) {
        before_keys.insert(id_pair_key(edge.a, edge.b));
    }
    int churn = 0;
    for (const auto& edge : after.edges()) {
        if (before_keys.count(id_pair_key(edge.a, edge.b)) == 0) {
            ++churn;
        }
    }
    for (const auto& edge : before.edges()) {
        if (!after.has_edge(edge.a, edge.b)) {
            ++churn;
        }
    }
    return churn;
}

}  // namespace leotopo

#include "leotopo/lsl.hpp"

#include <algorithm>
#include <unordered_map>

#include "leotopo/errors.hpp"

namespace leotopo {
namespace {

std::uint64_t id_pair_key(SatelliteId a, SatelliteId b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

struct PlaneView {
    // Dense positions of present satellites sorted by anomaly.
    std::vector<const SatelliteState*> members;
};

}  // namespace

void LslParams::validate(int num_planes) const {
    if (degree_budget < 2) {
        throw ValidationError("lsl degree budget must be >= 2");
    }
    if (max_plane_span < 1 || max_plane_span > num_planes / 2) {
        throw ValidationError("lsl max_plane_span must lie in [1, num_planes/2]");
    }
}

Topology build_lsl(const Snapshot& snapshot, std::span<const CandidateEdge> candidates,
                   const LslParams& params) {
    snapshot.validate();
    const int n_planes = snapshot.config.num_planes;
    params.validate(n_planes);

    Topology topo = Topology::for_snapshot(snapshot, params.degree_budget, Provenance::Lsl);

    std::vector<PlaneView> planes(n_planes);
    for (const auto& sat : snapshot.satellites) {
        planes[sat.plane_index].members.push_back(&sat);
    }
    for (auto& plane : planes) {
        std::sort(plane.members.begin(), plane.members.end(),
                  [](const SatelliteState* x, const SatelliteState* y) {
                      if (x->anomaly_deg != y->anomaly_deg) {
                          return x->anomaly_deg < y->anomaly_deg;
                      }
                      return x->id < y->id;
                  });
    }

    std::unordered_map<std::uint64_t, const CandidateEdge*> lookup;
    lookup.reserve(candidates.size());
    for (const auto& edge : candidates) {
        lookup.emplace(id_pair_key(edge.a, edge.b), &edge);
    }
    auto find_edge = [&](SatelliteId a, SatelliteId b) -> const CandidateEdge* {
        auto it = lookup.find(id_pair_key(a, b));
        return it == lookup.end() ? nullptr : it->second;
    };

    // Stage 1: intra-orbit rings; unstable skip links over missing satellites
    // stay open.
    for (const auto& plane : planes) {
        const auto& members = plane.members;
        if (members.size() < 2) {
            continue;
        }
        const std::size_t count = members.size() == 2 ? 1 : members.size();
        for (std::size_t m = 0; m < count; ++m) {
            const SatelliteState* a = members[m];
            const SatelliteState* b = members[(m + 1) % members.size()];
            if (const CandidateEdge* edge = find_edge(a->id, b->id)) {
                topo.add_edge(*edge);
            }
        }
    }

    // Stage 2: eastward inter-orbit shortcuts with cyclic span assignment.
    const int span_limit = params.max_plane_span;
    for (int p = 0; p < n_planes; ++p) {
        const auto& members = planes[p].members;
        const bool descending = p % 2 == 0;
        for (std::size_t m = 0; m < members.size(); ++m) {
            const int cycle_pos = static_cast<int>(m % span_limit);
            const int span = descending ? span_limit - cycle_pos : 1 + cycle_pos;
            const SatelliteState* sat = members[m];
            if (topo.degree(sat->id) >= params.degree_budget) {
                continue;
            }
            const int target_plane = (p + span) % n_planes;
            if (target_plane == p || planes[target_plane].members.empty()) {
                continue;
            }
            const CandidateEdge* best = nullptr;
            for (const SatelliteState* other : planes[target_plane].members) {
                if (topo.degree(other->id) >= params.degree_budget) {
                    continue;
                }
                const CandidateEdge* edge = find_edge(sat->id, other->id);
                if (edge == nullptr || topo.has_edge(edge->a, edge->b)) {
                    continue;
                }
                if (best == nullptr || edge->worst_case_km < best->worst_case_km ||
                    (edge->worst_case_km == best->worst_case_km &&
                     std::min(edge->a, edge->b) < std::min(best->a, best->b))) {
                    best = edge;
                }
            }
            if (best != nullptr) {
                topo.add_edge(*best);
            }
        }
    }

    if (params.fill_residual) {
        lsl_fill_residual(topo, candidates, params);
    }
    return topo;
}

void lsl_fill_residual(Topology& topology, std::span<const CandidateEdge> candidates,
                       const LslParams& params) {
    std::vector<const CandidateEdge*> pool;
    pool.reserve(candidates.size());
    for (const auto& edge : candidates) {
        if (edge.plane_span >= 1 && edge.plane_span <= params.max_plane_span) {
            pool.push_back(&edge);
        }
    }
    std::sort(pool.begin(), pool.end(), [](const CandidateEdge* x, const CandidateEdge* y) {
        if (x->worst_case_km != y->worst_case_km) {
            return x->worst_case_km < y->worst_case_km;
        }
        if (x->a != y->a) {
            return x->a < y->a;
        }
        return x->b < y->b;
    });
    for (const CandidateEdge* edge : pool) {
        if (topology.degree(edge->a) < params.degree_budget &&
            topology.degree(edge->b) < params.degree_budget) {
            topology.add_edge(*edge);
        }
    }
}

}  // namespace leotopo

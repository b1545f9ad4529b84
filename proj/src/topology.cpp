#include "leotopo/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "leotopo/errors.hpp"

namespace leotopo {

std::string provenance_name(Provenance p) {
    switch (p) {
        case Provenance::PlusGrid: return "plus-grid";
        case Provenance::ThreeIslGrid: return "three-isl-grid";
        case Provenance::Lsl: return "lsl";
        case Provenance::Sa: return "sa";
        case Provenance::Floor: return "floor";
        case Provenance::Incremental: return "incremental";
    }
    return "unknown";
}

Provenance provenance_from_name(const std::string& name) {
    if (name == "plus-grid") return Provenance::PlusGrid;
    if (name == "three-isl-grid") return Provenance::ThreeIslGrid;
    if (name == "lsl") return Provenance::Lsl;
    if (name == "sa") return Provenance::Sa;
    if (name == "floor") return Provenance::Floor;
    if (name == "incremental") return Provenance::Incremental;
    throw ValidationError("unknown provenance name: " + name);
}

Topology::Topology(std::vector<SatelliteId> nodes, int degree_budget, Provenance provenance)
    : nodes_(std::move(nodes)), degree_budget_(degree_budget), provenance_(provenance) {
    if (provenance_ != Provenance::Floor && degree_budget_ < 1) {
        throw ValidationError("degree budget must be >= 1");
    }
    std::sort(nodes_.begin(), nodes_.end());
    index_.reserve(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!index_.emplace(nodes_[i], static_cast<int>(i)).second) {
            throw ValidationError("duplicate node id " + std::to_string(nodes_[i]));
        }
    }
    adjacency_.resize(nodes_.size());
}

Topology Topology::for_snapshot(const Snapshot& snapshot, int degree_budget,
                                Provenance provenance) {
    std::vector<SatelliteId> ids;
    ids.reserve(snapshot.satellites.size());
    for (const auto& sat : snapshot.satellites) {
        ids.push_back(sat.id);
    }
    return Topology(std::move(ids), degree_budget, provenance);
}

int Topology::index_of(SatelliteId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw ValidationError("unknown satellite id " + std::to_string(id));
    }
    return it->second;
}

std::uint64_t Topology::pair_key(int ia, int ib) const {
    const auto lo = static_cast<std::uint64_t>(std::min(ia, ib));
    const auto hi = static_cast<std::uint64_t>(std::max(ia, ib));
    return (lo << 32) | hi;
}

bool Topology::has_edge(SatelliteId a, SatelliteId b) const {
    auto ia = index_.find(a);
    auto ib = index_.find(b);
    if (ia == index_.end() || ib == index_.end()) {
        return false;
    }
    return has_edge_idx(ia->second, ib->second);
}

bool Topology::has_edge_idx(int ia, int ib) const {
    return edge_slots_.count(pair_key(ia, ib)) != 0;
}

AddEdgeResult Topology::add_edge(const CandidateEdge& edge) {
    return add_edge(edge.a, edge.b, edge.worst_case_km, edge.instantaneous_km, edge.plane_span);
}

AddEdgeResult Topology::add_edge(SatelliteId a, SatelliteId b, double worst_case_km,
                                 double instantaneous_km, int plane_span) {
    return add_edge_idx(index_of(a), index_of(b), worst_case_km, instantaneous_km, plane_span);
}

AddEdgeResult Topology::add_edge_idx(int ia, int ib, double worst_case_km,
                                     double instantaneous_km, int plane_span) {
    if (ia == ib) {
        throw ValidationError("self-loop rejected on node " + std::to_string(nodes_[ia]));
    }
    const std::uint64_t key = pair_key(ia, ib);
    if (edge_slots_.count(key) != 0) {
        return AddEdgeResult::Duplicate;
    }
    if (budget_enforced() &&
        (degree_idx(ia) >= degree_budget_ || degree_idx(ib) >= degree_budget_)) {
        return AddEdgeResult::DegreeViolation;
    }
    TopologyEdge edge;
    edge.a = std::min(nodes_[ia], nodes_[ib]);
    edge.b = std::max(nodes_[ia], nodes_[ib]);
    edge.worst_case_km = worst_case_km;
    edge.instantaneous_km = instantaneous_km;
    edge.plane_span = plane_span;
    const int slot = static_cast<int>(edges_.size());
    edges_.push_back(edge);
    edge_slots_.emplace(key, slot);
    adjacency_[ia].emplace_back(ib, slot);
    adjacency_[ib].emplace_back(ia, slot);
    return AddEdgeResult::Added;
}

void Topology::unlink_adjacency(int node, int slot) {
    auto& list = adjacency_[node];
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (list[i].second == slot) {
            list[i] = list.back();
            list.pop_back();
            return;
        }
    }
}

bool Topology::remove_edge(SatelliteId a, SatelliteId b) {
    return remove_edge_idx(index_of(a), index_of(b));
}

bool Topology::remove_edge_idx(int ia, int ib) {
    const std::uint64_t key = pair_key(ia, ib);
    auto it = edge_slots_.find(key);
    if (it == edge_slots_.end()) {
        return false;
    }
    const int slot = it->second;
    edge_slots_.erase(it);
    unlink_adjacency(ia, slot);
    unlink_adjacency(ib, slot);

    const int last = static_cast<int>(edges_.size()) - 1;
    if (slot != last) {
        // Move the last edge into the vacated slot and rewire its bookkeeping.
        edges_[slot] = edges_[last];
        const int ma = index_of(edges_[slot].a);
        const int mb = index_of(edges_[slot].b);
        edge_slots_[pair_key(ma, mb)] = slot;
        for (auto& entry : adjacency_[ma]) {
            if (entry.second == last) {
                entry.second = slot;
            }
        }
        for (auto& entry : adjacency_[mb]) {
            if (entry.second == last) {
                entry.second = slot;
            }
        }
    }
    edges_.pop_back();
    return true;
}

std::vector<std::vector<SatelliteId>> Topology::connected_components() const {
    const int n = node_count();
    std::vector<int> label(n, -1);
    std::vector<int> stack;
    int next_label = 0;
    for (int start = 0; start < n; ++start) {
        if (label[start] != -1) {
            continue;
        }
        stack.push_back(start);
        label[start] = next_label;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (const auto& [nbr, slot] : adjacency_[v]) {
                if (label[nbr] == -1) {
                    label[nbr] = next_label;
                    stack.push_back(nbr);
                }
            }
        }
        ++next_label;
    }
    std::vector<std::vector<SatelliteId>> components(next_label);
    for (int v = 0; v < n; ++v) {
        components[label[v]].push_back(nodes_[v]);
    }
    for (auto& comp : components) {
        std::sort(comp.begin(), comp.end());
    }
    std::sort(components.begin(), components.end(),
              [](const auto& x, const auto& y) {
                  if (x.size() != y.size()) {
                      return x.size() > y.size();
                  }
                  return x.front() < y.front();
              });
    return components;
}

bool Topology::is_connected() const {
    if (node_count() <= 1) {
        return true;
    }
    std::vector<char> seen(node_count(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (const auto& [nbr, slot] : adjacency_[v]) {
            if (!seen[nbr]) {
                seen[nbr] = 1;
                ++reached;
                stack.push_back(nbr);
            }
        }
    }
    return reached == node_count();
}

namespace {

struct PlaneRoster {
    // Satellite dense indices sorted by anomaly within one plane.
    std::vector<int> members;
};

// Snapshot view with dense indices aligned to Topology::for_snapshot ordering.
struct SnapshotIndex {
    std::vector<const SatelliteState*> sats;  // by dense index (sorted by id)
    std::vector<PlaneRoster> planes;

    explicit SnapshotIndex(const Snapshot& snapshot) {
        sats.reserve(snapshot.satellites.size());
        for (const auto& sat : snapshot.satellites) {
            sats.push_back(&sat);
        }
        std::sort(sats.begin(), sats.end(),
                  [](const SatelliteState* x, const SatelliteState* y) { return x->id < y->id; });
        planes.resize(snapshot.config.num_planes);
        for (std::size_t i = 0; i < sats.size(); ++i) {
            planes[sats[i]->plane_index].members.push_back(static_cast<int>(i));
        }
        for (auto& plane : planes) {
            std::sort(plane.members.begin(), plane.members.end(), [&](int x, int y) {
                if (sats[x]->anomaly_deg != sats[y]->anomaly_deg) {
                    return sats[x]->anomaly_deg < sats[y]->anomaly_deg;
                }
                return sats[x]->id < sats[y]->id;
            });
        }
    }
};

std::uint64_t id_pair_key(SatelliteId a, SatelliteId b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

std::unordered_map<std::uint64_t, const CandidateEdge*> candidate_lookup(
    std::span<const CandidateEdge> candidates) {
    std::unordered_map<std::uint64_t, const CandidateEdge*> map;
    map.reserve(candidates.size());
    for (const auto& edge : candidates) {
        map.emplace(id_pair_key(edge.a, edge.b), &edge);
    }
    return map;
}

const CandidateEdge* find_candidate(
    const std::unordered_map<std::uint64_t, const CandidateEdge*>& lookup, SatelliteId a,
    SatelliteId b) {
    auto it = lookup.find(id_pair_key(a, b));
    return it == lookup.end() ? nullptr : it->second;
}

// Ring links over present satellites sorted by anomaly; gaps whose skip link
// is not stable stay open.
void add_intra_plane_rings(Topology& topo, const SnapshotIndex& view,
                           const std::unordered_map<std::uint64_t, const CandidateEdge*>& lookup) {
    for (const auto& plane : view.planes) {
        const auto& members = plane.members;
        if (members.size() < 2) {
            continue;
        }
        const std::size_t count = members.size() == 2 ? 1 : members.size();
        for (std::size_t m = 0; m < count; ++m) {
            const SatelliteState& a = *view.sats[members[m]];
            const SatelliteState& b = *view.sats[members[(m + 1) % members.size()]];
            if (const CandidateEdge* edge = find_candidate(lookup, a.id, b.id)) {
                topo.add_edge(*edge);
            }
        }
    }
}

}  // namespace

Topology build_plus_grid(const Snapshot& snapshot, std::span<const CandidateEdge> candidates) {
    snapshot.validate();
    Topology topo = Topology::for_snapshot(snapshot, 4, Provenance::PlusGrid);
    const SnapshotIndex view(snapshot);
    const auto lookup = candidate_lookup(candidates);

    add_intra_plane_rings(topo, view, lookup);

    // Nearest stable neighbor in each adjacent plane, both directions; the
    // proposals are deduplicated and added shortest first under the budget.
    const int n_planes = snapshot.config.num_planes;
    std::unordered_map<std::uint64_t, const CandidateEdge*> proposals;
    for (int p = 0; p < n_planes; ++p) {
        for (const int member : view.planes[p].members) {
            const SatelliteState& sat = *view.sats[member];
            for (const int dir : {1, n_planes - 1}) {
                const int q = (p + dir) % n_planes;
                if (q == p) {
                    continue;
                }
                const CandidateEdge* best = nullptr;
                for (const int other : view.planes[q].members) {
                    const CandidateEdge* edge =
                        find_candidate(lookup, sat.id, view.sats[other]->id);
                    if (edge == nullptr) {
                        continue;
                    }
                    if (best == nullptr || edge->worst_case_km < best->worst_case_km ||
                        (edge->worst_case_km == best->worst_case_km &&
                         std::min(edge->a, edge->b) < std::min(best->a, best->b))) {
                        best = edge;
                    }
                }
                if (best != nullptr) {
                    proposals.emplace(id_pair_key(best->a, best->b), best);
                }
            }
        }
    }
    std::vector<const CandidateEdge*> ordered;
    ordered.reserve(proposals.size());
    for (const auto& [key, edge] : proposals) {
        ordered.push_back(edge);
    }
    std::sort(ordered.begin(), ordered.end(), [](const CandidateEdge* x, const CandidateEdge* y) {
        if (x->worst_case_km != y->worst_case_km) {
            return x->worst_case_km < y->worst_case_km;
        }
        if (x->a != y->a) {
            return x->a < y->a;
        }
        return x->b < y->b;
    });
    for (const CandidateEdge* edge : ordered) {
        topo.add_edge(*edge);
    }
    return topo;
}

Topology build_three_isl_grid(const Snapshot& snapshot,
                              std::span<const CandidateEdge> candidates) {
    snapshot.validate();
    const SnapshotIndex view(snapshot);
    const int n_planes = snapshot.config.num_planes;
    if (n_planes % 2 != 0) {
        throw InfeasibleDeploymentError(
            "three-isl grid needs an even plane count for the alternating pattern");
    }
    const std::size_t population = view.planes.empty() ? 0 : view.planes[0].members.size();
    for (const auto& plane : view.planes) {
        if (plane.members.size() != population || plane.members.empty()) {
            throw InfeasibleDeploymentError(
                "three-isl grid requires full, even plane populations");
        }
    }

    Topology topo = Topology::for_snapshot(snapshot, 3, Provenance::ThreeIslGrid);
    const auto lookup = candidate_lookup(candidates);
    add_intra_plane_rings(topo, view, lookup);

    // Brick-wall inter-plane links: the satellite at sorted slot k of plane p
    // initiates eastward when (k + p) is even. Its rung partner is slot k of
    // plane p+1, whose parity is odd there, so every satellite carries
    // exactly one inter-plane link and the pattern closes at the seam.
    for (int p = 0; p < n_planes; ++p) {
        const auto& members = view.planes[p].members;
        const auto& east = view.planes[(p + 1) % n_planes].members;
        for (std::size_t k = 0; k < members.size(); ++k) {
            if ((static_cast<int>(k) + p) % 2 != 0) {
                continue;
            }
            const SatelliteState& sat = *view.sats[members[k]];
            const SatelliteState& partner = *view.sats[east[k]];
            const CandidateEdge* edge = find_candidate(lookup, sat.id, partner.id);
            if (edge == nullptr || topo.add_edge(*edge) != AddEdgeResult::Added) {
                throw InfeasibleDeploymentError(
                    "three-isl grid could not place an alternating inter-plane link between " +
                    std::to_string(sat.id) + " and " + std::to_string(partner.id));
            }
        }
    }
    return topo;
}

Topology build_theoretical_floor(const Snapshot& snapshot) {
    snapshot.validate();
    Topology topo = Topology::for_snapshot(snapshot, 0, Provenance::Floor);
    const SnapshotIndex view(snapshot);
    const double limit = d_stab(snapshot.config);
    const std::size_t n = view.sats.size();
    for (std::size_t i = 0; i < n; ++i) {
        const SatelliteState& a = *view.sats[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const SatelliteState& b = *view.sats[j];
            const double dist = instantaneous_distance(a, b, snapshot.config, 0.0);
            if (dist <= limit) {
                const int span = plane_span(a.plane_index, b.plane_index,
                                            snapshot.config.num_planes);
                topo.add_edge(a.id, b.id, dist, dist, span);
            }
        }
    }
    return topo;
}

Topology build_theoretical_floor(const Snapshot& snapshot,
                                 std::span<const CandidateEdge> stable_candidates) {
    snapshot.validate();
    Topology topo = Topology::for_snapshot(snapshot, 0, Provenance::Floor);
    for (const auto& edge : stable_candidates) {
        topo.add_edge(edge);
    }
    return topo;
}

void write_topology_csv(const Topology& topology, const std::string& path,
                        const std::string& snapshot_label) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open topology csv for writing: " + path);
    }
    out << "# provenance=" << provenance_name(topology.provenance()) << "\n";
    out << "# degree_budget=" << (topology.budget_enforced() ? topology.degree_budget() : -1)
        << "\n";
    out << "# snapshot=" << snapshot_label << "\n";
    out << "sat_a,sat_b,worst_case_km,instantaneous_km\n";

    std::vector<TopologyEdge> sorted(topology.edges().begin(), topology.edges().end());
    std::sort(sorted.begin(), sorted.end(), [](const TopologyEdge& x, const TopologyEdge& y) {
        if (x.a != y.a) {
            return x.a < y.a;
        }
        return x.b < y.b;
    });
    char buffer[160];
    for (const auto& edge : sorted) {
        std::snprintf(buffer, sizeof(buffer), "%lld,%lld,%.6f,%.6f\n",
                      static_cast<long long>(edge.a), static_cast<long long>(edge.b),
                      edge.worst_case_km, edge.instantaneous_km);
        out << buffer;
    }
    if (!out) {
        throw IoError("failed writing topology csv: " + path);
    }
}

Topology load_topology_csv(const std::string& path, const Snapshot& snapshot) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open topology csv: " + path);
    }
    Provenance provenance = Provenance::PlusGrid;
    int degree_budget = 4;
    bool unbounded = false;

    std::unordered_map<SatelliteId, const SatelliteState*> by_id;
    for (const auto& sat : snapshot.satellites) {
        by_id.emplace(sat.id, &sat);
    }

    std::string line;
    int line_no = 0;
    bool header_seen = false;
    std::vector<TopologyEdge> edges;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                std::string value = line.substr(eq + 1);
                key.erase(0, key.find_first_not_of(' '));
                key.erase(key.find_last_not_of(' ') + 1);
                if (key == "provenance") {
                    provenance = provenance_from_name(value);
                } else if (key == "degree_budget") {
                    const int budget = std::stoi(value);
                    unbounded = budget < 0;
                    degree_budget = unbounded ? 0 : budget;
                }
            }
            continue;
        }
        if (!header_seen) {
            header_seen = true;  // column header row
            continue;
        }
        std::istringstream row(line);
        std::string field;
        TopologyEdge edge;
        try {
            std::getline(row, field, ',');
            edge.a = std::stoll(field);
            std::getline(row, field, ',');
            edge.b = std::stoll(field);
            std::getline(row, field, ',');
            edge.worst_case_km = std::stod(field);
            std::getline(row, field, ',');
            edge.instantaneous_km = std::stod(field);
        } catch (const std::exception&) {
            throw IoError("malformed topology row at " + path + ":" + std::to_string(line_no));
        }
        auto ia = by_id.find(edge.a);
        auto ib = by_id.find(edge.b);
        if (ia == by_id.end() || ib == by_id.end()) {
            throw IoError("topology edge references satellite missing from snapshot at " + path +
                          ":" + std::to_string(line_no));
        }
        edge.plane_span = plane_span(ia->second->plane_index, ib->second->plane_index,
                                     snapshot.config.num_planes);
        edges.push_back(edge);
    }

    if (unbounded && provenance != Provenance::Floor) {
        throw IoError("unbounded degree budget in " + path + " requires floor provenance");
    }
    Topology topo = Topology::for_snapshot(snapshot, degree_budget, provenance);
    for (const auto& edge : edges) {
        topo.add_edge(edge.a, edge.b, edge.worst_case_km, edge.instantaneous_km, edge.plane_span);
    }
    return topo;
}

}  // namespace leotopo

#include "leotopo/sa.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "leotopo/errors.hpp"
#include "leotopo/parallel.hpp"

namespace leotopo {

void SurrogateWeights::validate() const {
    if (alpha_l < 0.0 || alpha_m < 0.0 || alpha_u < 0.0) {
        throw ValidationError("surrogate weights must be >= 0");
    }
    if (alpha_l == 0.0 && alpha_m == 0.0 && alpha_u == 0.0) {
        throw ValidationError("surrogate weights must not all be zero");
    }
}

void AnnealSchedule::validate() const {
    if (!(t_initial > t_min && t_min > 0.0)) {
        throw ValidationError("anneal schedule requires t_initial > t_min > 0");
    }
    if (!(rho > 0.0 && rho < 1.0)) {
        throw ValidationError("anneal schedule requires rho in (0, 1)");
    }
    if (iterations < 0) {
        throw ValidationError("anneal iterations must be >= 0");
    }
}

SurrogateScore SurrogateScore::from_topology(const Topology& topology, double l_max_km,
                                             int long_span_threshold) {
    SurrogateScore score;
    score.l_max_km = l_max_km;
    score.e_max = static_cast<std::int64_t>(topology.degree_budget()) *
                  topology.node_count() / 2;
    for (const auto& edge : topology.edges()) {
        score.apply_add(edge.worst_case_km, edge.plane_span > long_span_threshold);
    }
    return score;
}

double score_delta(const SurrogateScore& before, const SurrogateScore& after,
                   const SurrogateWeights& weights) {
    return weights.alpha_l * (before.mean_link_length_pct() - after.mean_link_length_pct()) +
           weights.alpha_m *
               (after.long_range_fraction_pct() - before.long_range_fraction_pct()) +
           weights.alpha_u * (after.edge_utilization_pct() - before.edge_utilization_pct());
}

bool accept_proposal(double delta, double temperature, Rng& rng) {
    if (delta >= 0.0) {
        return true;
    }
    if (temperature <= 0.0) {
        return false;
    }
    return rng.uniform01() < std::exp(delta / temperature);
}

namespace {

struct DenseCandidate {
    int a = 0;
    int b = 0;
    double worst_case_km = 0.0;
    double instantaneous_km = 0.0;
    int plane_span = 0;
};

std::string describe_components(const Topology& topology) {
    const auto components = topology.connected_components();
    std::ostringstream msg;
    msg << components.size() << " components with sizes";
    for (std::size_t i = 0; i < components.size() && i < 8; ++i) {
        msg << ' ' << components[i].size();
    }
    if (components.size() > 8) {
        msg << " ...";
    }
    return msg.str();
}

// Seeded random spanning structure: shuffled Kruskal passes that respect the
// degree budget. Retries with fresh shuffles before giving up.
void build_random_spanning_tree(Topology& topology, const std::vector<DenseCandidate>& cands,
                                int degree_budget, Rng& rng) {
    const int n = topology.node_count();
    if (n <= 1 || cands.empty()) {
        if (n > 1) {
            throw InfeasibleDeploymentError(
                "stable-link set cannot connect the active satellites: no candidates");
        }
        return;
    }
    std::vector<std::size_t> order(cands.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::vector<int> parent(n);

    for (int attempt = 0; attempt < 8; ++attempt) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.uniform_below(i)]);
        }
        for (int v = 0; v < n; ++v) {
            parent[v] = v;
        }
        std::function<int(int)> find = [&](int v) {
            while (parent[v] != v) {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            return v;
        };
        int joined = 1;
        for (const std::size_t idx : order) {
            const auto& cand = cands[idx];
            if (topology.degree_idx(cand.a) >= degree_budget ||
                topology.degree_idx(cand.b) >= degree_budget) {
                continue;
            }
            const int ra = find(cand.a);
            const int rb = find(cand.b);
            if (ra == rb) {
                continue;
            }
            parent[ra] = rb;
            topology.add_edge_idx(cand.a, cand.b, cand.worst_case_km, cand.instantaneous_km,
                                  cand.plane_span);
            ++joined;
            if (joined == n) {
                return;
            }
        }
        if (topology.is_connected()) {
            return;
        }
        // Strip this attempt's edges and reshuffle.
        while (topology.edge_count() > 0) {
            const auto& edge = topology.edges()[topology.edge_count() - 1];
            topology.remove_edge(edge.a, edge.b);
        }
    }
    throw InfeasibleDeploymentError(
        "stable-link set cannot connect the active satellites under the degree budget: " +
        describe_components(topology));
}

// After removing up to two edges and adding (u,v), the graph stays connected
// iff each removed edge's far endpoint is still reachable from u.
bool still_connected(const Topology& topology, int start, int need_a, int need_b,
                     std::vector<int>& stamp, int epoch, std::vector<int>& queue) {
    bool found_a = need_a < 0;
    bool found_b = need_b < 0;
    if (found_a && found_b) {
        return true;
    }
    queue.clear();
    queue.push_back(start);
    stamp[start] = epoch;
    std::size_t head = 0;
    const auto& adjacency = topology.adjacency();
    while (head < queue.size()) {
        const int v = queue[head++];
        if (v == need_a) {
            found_a = true;
        }
        if (v == need_b) {
            found_b = true;
        }
        if (found_a && found_b) {
            return true;
        }
        for (const auto& [nbr, slot] : adjacency[v]) {
            if (stamp[nbr] != epoch) {
                stamp[nbr] = epoch;
                queue.push_back(nbr);
            }
        }
    }
    return false;
}

}  // namespace

Topology anneal(const Snapshot& snapshot, std::span<const CandidateEdge> candidates,
                int degree_budget, const SurrogateWeights& weights,
                const AnnealSchedule& sched, const Topology* warm_start,
                const AnnealOptions& options) {
    snapshot.validate();
    weights.validate();
    sched.validate();
    if (degree_budget < 2) {
        throw ValidationError("anneal degree budget must be >= 2");
    }
    if (candidates.empty() && snapshot.satellites.size() > 1) {
        throw InfeasibleDeploymentError("anneal requires a non-empty candidate set");
    }

    Topology topology = Topology::for_snapshot(snapshot, degree_budget, Provenance::Sa);
    Rng rng(sched.rng_seed);

    std::vector<DenseCandidate> cands;
    cands.reserve(candidates.size());
    for (const auto& edge : candidates) {
        DenseCandidate dense;
        dense.a = topology.index_of(edge.a);
        dense.b = topology.index_of(edge.b);
        dense.worst_case_km = edge.worst_case_km;
        dense.instantaneous_km = edge.instantaneous_km;
        dense.plane_span = edge.plane_span;
        cands.push_back(dense);
    }

    if (warm_start != nullptr) {
        for (const auto& edge : warm_start->edges()) {
            topology.add_edge(edge.a, edge.b, edge.worst_case_km, edge.instantaneous_km,
                              edge.plane_span);
        }
        if (!topology.is_connected() && topology.node_count() > 1) {
            throw InfeasibleDeploymentError("anneal warm start is disconnected: " +
                                            describe_components(topology));
        }
    } else {
        build_random_spanning_tree(topology, cands, degree_budget, rng);
    }

    const double l_max = d_stab(snapshot.config);
    SurrogateScore score =
        SurrogateScore::from_topology(topology, l_max, options.long_span_threshold);

    std::vector<int> stamp(topology.node_count(), -1);
    std::vector<int> queue;
    int epoch = 0;

    double temperature = sched.t_initial;
    for (long iter = 0; iter < sched.iterations; ++iter) {
        bool accepted = false;
        if (!cands.empty()) {
            const auto& cand = cands[rng.uniform_below(cands.size())];
            if (!topology.has_edge_idx(cand.a, cand.b)) {
                const bool cand_long = cand.plane_span > options.long_span_threshold;
                const bool violates_a = topology.degree_idx(cand.a) >= degree_budget;
                const bool violates_b = topology.degree_idx(cand.b) >= degree_budget;
                if (!violates_a && !violates_b) {
                    // Pure addition; cannot disconnect.
                    SurrogateScore after = score;
                    after.apply_add(cand.worst_case_km, cand_long);
                    if (accept_proposal(score_delta(score, after, weights), temperature, rng)) {
                        topology.add_edge_idx(cand.a, cand.b, cand.worst_case_km,
                                              cand.instantaneous_km, cand.plane_span);
                        score = after;
                        accepted = true;
                    }
                } else {
                    // Swap: drop one random incident edge at each violated
                    // endpoint, then add the candidate.
                    TopologyEdge removed_a{};
                    TopologyEdge removed_b{};
                    bool have_a = false;
                    bool have_b = false;
                    int far_a = -1;
                    int far_b = -1;
                    if (violates_a) {
                        const auto& list = topology.adjacency()[cand.a];
                        const auto& pick = list[rng.uniform_below(list.size())];
                        removed_a = topology.edge_at(pick.second);
                        far_a = pick.first;
                        have_a = true;
                    }
                    if (violates_b) {
                        const auto& list = topology.adjacency()[cand.b];
                        const auto& pick = list[rng.uniform_below(list.size())];
                        removed_b = topology.edge_at(pick.second);
                        far_b = pick.first;
                        have_b = true;
                    }
                    if (have_a) {
                        topology.remove_edge(removed_a.a, removed_a.b);
                    }
                    if (have_b && !topology.remove_edge(removed_b.a, removed_b.b)) {
                        // Both endpoints picked the same edge only when it joins
                        // them, which cannot happen for an absent candidate.
                        throw ValidationError("swap bookkeeping lost an edge");
                    }
                    topology.add_edge_idx(cand.a, cand.b, cand.worst_case_km,
                                          cand.instantaneous_km, cand.plane_span);

                    ++epoch;
                    const bool connected = still_connected(topology, cand.a, far_a, far_b,
                                                           stamp, epoch, queue);
                    bool keep = false;
                    if (connected) {
                        SurrogateScore after = score;
                        after.apply_add(cand.worst_case_km, cand_long);
                        if (have_a) {
                            after.apply_remove(removed_a.worst_case_km,
                                               removed_a.plane_span >
                                                   options.long_span_threshold);
                        }
                        if (have_b) {
                            after.apply_remove(removed_b.worst_case_km,
                                               removed_b.plane_span >
                                                   options.long_span_threshold);
                        }
                        if (accept_proposal(score_delta(score, after, weights), temperature,
                                            rng)) {
                            score = after;
                            keep = true;
                        }
                    }
                    if (keep) {
                        accepted = true;
                    } else {
                        topology.remove_edge_idx(cand.a, cand.b);
                        if (have_a) {
                            topology.add_edge(removed_a.a, removed_a.b,
                                              removed_a.worst_case_km,
                                              removed_a.instantaneous_km,
                                              removed_a.plane_span);
                        }
                        if (have_b) {
                            topology.add_edge(removed_b.a, removed_b.b,
                                              removed_b.worst_case_km,
                                              removed_b.instantaneous_km,
                                              removed_b.plane_span);
                        }
                    }
                }
            }
        }
        temperature = std::max(sched.t_min, sched.rho * temperature);
        if (options.observer_stride > 0 && options.observer &&
            (iter % options.observer_stride == 0 || iter + 1 == sched.iterations)) {
            AnnealSample sample;
            sample.iteration = iter;
            sample.temperature = temperature;
            sample.l = score.mean_link_length_pct();
            sample.m = score.long_range_fraction_pct();
            sample.u = score.edge_utilization_pct();
            sample.accepted = accepted;
            options.observer(sample, topology);
        }
    }

    // Residual fill: shortest-first greedy over the remaining budget.
    std::vector<std::size_t> by_length(cands.size());
    for (std::size_t i = 0; i < by_length.size(); ++i) {
        by_length[i] = i;
    }
    std::sort(by_length.begin(), by_length.end(), [&](std::size_t x, std::size_t y) {
        if (cands[x].worst_case_km != cands[y].worst_case_km) {
            return cands[x].worst_case_km < cands[y].worst_case_km;
        }
        if (cands[x].a != cands[y].a) {
            return cands[x].a < cands[y].a;
        }
        return cands[x].b < cands[y].b;
    });
    for (const std::size_t idx : by_length) {
        const auto& cand = cands[idx];
        if (topology.degree_idx(cand.a) >= degree_budget ||
            topology.degree_idx(cand.b) >= degree_budget) {
            continue;
        }
        topology.add_edge_idx(cand.a, cand.b, cand.worst_case_km, cand.instantaneous_km,
                              cand.plane_span);
    }
    return topology;
}

ParetoSweepResult pareto_sweep(const Snapshot& snapshot,
                               std::span<const CandidateEdge> candidates, int degree_budget,
                               std::span<const SurrogateWeights> weight_grid,
                               const AnnealSchedule& sched) {
    ParetoSweepResult result;
    result.designs.reserve(weight_grid.size());

    std::vector<SweepDesign*> slots(weight_grid.size(), nullptr);
    std::vector<std::unique_ptr<SweepDesign>> storage(weight_grid.size());
    parallel_for(weight_grid.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto design = std::make_unique<SweepDesign>(SweepDesign{
                weight_grid[i],
                anneal(snapshot, candidates, degree_budget, weight_grid[i], sched),
                EvalReport{}, 0.0, 0.0, 0.0});
            EvalOptions eval_options;
            eval_options.threads = 1;  // designs already run in parallel
            design->report = shortest_path_metrics(design->topology, snapshot, eval_options);
            const SurrogateScore score =
                SurrogateScore::from_topology(design->topology, d_stab(snapshot.config), 3);
            design->final_l = score.mean_link_length_pct();
            design->final_m = score.long_range_fraction_pct();
            design->final_u = score.edge_utilization_pct();
            storage[i] = std::move(design);
        }
    });
    for (auto& design : storage) {
        result.designs.push_back(std::move(*design));
    }

    for (std::size_t i = 0; i < result.designs.size(); ++i) {
        const auto& a = result.designs[i].report;
        bool dominated = false;
        for (std::size_t j = 0; j < result.designs.size(); ++j) {
            if (i == j) {
                continue;
            }
            const auto& b = result.designs[j].report;
            const bool no_worse =
                b.avg_delay_ms <= a.avg_delay_ms && b.avg_hops <= a.avg_hops;
            const bool better = b.avg_delay_ms < a.avg_delay_ms || b.avg_hops < a.avg_hops;
            if (no_worse && better) {
                dominated = true;
                break;
            }
        }
        if (!dominated) {
            result.front.push_back(i);
        }
    }
    return result;
}

}  // namespace leotopo

#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "leotopo/evaluation.hpp"
#include "leotopo/rng.hpp"
#include "leotopo/topology.hpp"

namespace leotopo {

struct SurrogateWeights {
    double alpha_l = 1.0;  // weight on mean link length (minimized)
    double alpha_m = 1.0;  // weight on long-range fraction (maximized)
    double alpha_u = 1.0;  // weight on edge utilization (maximized)

    void validate() const;
};

struct AnnealSchedule {
    double t_initial = 1.0;
    double rho = 0.9995;
    double t_min = 1e-4;
    long iterations = 200000;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

// O(1)-updatable accumulators behind the L/M/U surrogates.
struct SurrogateScore {
    double sum_edge_length_km = 0.0;
    std::int64_t edge_count = 0;
    std::int64_t long_edge_count = 0;
    double l_max_km = 0.0;      // normalization: the shell's d_stab
    std::int64_t e_max = 0;     // floor(deg_max * |V| / 2)

    double mean_link_length_pct() const {  // L
        return edge_count == 0 ? 0.0
                               : 100.0 * sum_edge_length_km / (edge_count * l_max_km);
    }
    double long_range_fraction_pct() const {  // M
        return edge_count == 0 ? 0.0
                               : 100.0 * static_cast<double>(long_edge_count) / edge_count;
    }
    double edge_utilization_pct() const {  // U
        return e_max == 0 ? 0.0 : 100.0 * static_cast<double>(edge_count) / e_max;
    }

    void apply_add(double length_km, bool long_range) {
        sum_edge_length_km += length_km;
        ++edge_count;
        long_edge_count += long_range ? 1 : 0;
    }
    void apply_remove(double length_km, bool long_range) {
        sum_edge_length_km -= length_km;
        --edge_count;
        long_edge_count -= long_range ? 1 : 0;
    }

    static SurrogateScore from_topology(const Topology& topology, double l_max_km,
                                        int long_span_threshold);
};

// Weighted improvement: alpha_L*(L_old-L_new) + alpha_M*(M_new-M_old)
// + alpha_U*(U_new-U_old). Positive favors the edit.
double score_delta(const SurrogateScore& before, const SurrogateScore& after,
                   const SurrogateWeights& weights);

// Standard annealing rule: accept when delta >= 0, else with prob exp(delta/T).
bool accept_proposal(double delta, double temperature, Rng& rng);

struct AnnealSample {
    long iteration = 0;
    double temperature = 0.0;
    double l = 0.0;
    double m = 0.0;
    double u = 0.0;
    bool accepted = false;
};

struct AnnealOptions {
    // Links spanning more planes than this count as long-range.
    int long_span_threshold = 3;
    // Observer fires every `observer_stride` iterations (0 disables it).
    long observer_stride = 0;
    std::function<void(const AnnealSample&, const Topology&)> observer;
};

// Simulated-annealing search over the stable-link set. Starts from the warm
// start (or a seeded random spanning tree), runs exactly sched.iterations
// add/swap proposals with O(1) surrogate updates, then fills leftover degree
// shortest-first.
Topology anneal(const Snapshot& snapshot, std::span<const CandidateEdge> candidates,
                int degree_budget, const SurrogateWeights& weights,
                const AnnealSchedule& sched, const Topology* warm_start = nullptr,
                const AnnealOptions& options = {});

struct SweepDesign {
    SurrogateWeights weights;
    Topology topology;
    EvalReport report;
    double final_l = 0.0;
    double final_m = 0.0;
    double final_u = 0.0;
};

struct ParetoSweepResult {
    std::vector<SweepDesign> designs;
    // Indices of designs on the (delay, hops) Pareto front.
    std::vector<std::size_t> front;
};

// One annealed topology per weight triple (shared seed), each evaluated.
ParetoSweepResult pareto_sweep(const Snapshot& snapshot,
                               std::span<const CandidateEdge> candidates, int degree_budget,
                               std::span<const SurrogateWeights> weight_grid,
                               const AnnealSchedule& sched);

}  // namespace leotopo

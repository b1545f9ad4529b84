#pragma once

#include <span>
#include <string>
#include <vector>

#include "leotopo/lsl.hpp"
#include "leotopo/sa.hpp"
#include "leotopo/topology.hpp"

namespace leotopo {

// One day-to-day maintenance step; satellite ids persist across days.
struct DayTransition {
    const Snapshot& prev_snapshot;
    const Topology& prev_topology;
    const Snapshot& next_snapshot;
    std::span<const CandidateEdge> next_candidates;
};

struct BreakageReport {
    int selected_prev = 0;
    int broken = 0;
    double breakage_rate_pct = 0.0;
    int endpoint_removed = 0;
    int infeasible_now = 0;
};

// Extra detail about what an update had to change.
struct UpdateLog {
    int retained = 0;
    int dropped_infeasible = 0;
    int dropped_budget = 0;
    int ring_evictions = 0;
    int repair_links = 0;
    std::vector<std::string> notes;
};

// Daily LSL maintenance: retain feasible links, refresh intra-plane rings
// (rings may evict retained non-ring edges when budget-blocked), repair
// connectivity toward the largest component, then fill leftover degree with
// the standard LSL inter-orbit pass.
Topology update_lsl(const DayTransition& transition, const LslParams& params,
                    UpdateLog* log = nullptr);

// Daily SA maintenance: retain feasible links, repair connectivity, then
// re-optimize from the warm start with the incremental iteration budget.
Topology update_sa(const DayTransition& transition, const SurrogateWeights& weights,
                   const AnnealSchedule& sched, UpdateLog* log = nullptr);

// Fraction of day-t links that are infeasible on day t+1, by cause.
BreakageReport measure_breakage(const DayTransition& transition);

// Edges present in exactly one of the two topologies.
int edge_churn(const Topology& before, const Topology& after);

}  // namespace leotopo

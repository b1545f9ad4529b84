#pragma once

#include <span>

#include "leotopo/topology.hpp"

namespace leotopo {

struct LslParams {
    int max_plane_span = 1;  // D: furthest plane a shortcut may reach
    int degree_budget = 4;
    // Complete leftover degree with shortest-first inter-orbit links (spans
    // 1..D) after the cyclic pass.
    bool fill_residual = true;

    void validate(int num_planes) const;
};

// Long-Short Links: intra-orbit rings, then one eastward inter-orbit shortcut
// per satellite with target spans cycling D..1 (even planes) or 1..D (odd
// planes in RAAN order), then a shortest-first fill of any spare degree.
Topology build_lsl(const Snapshot& snapshot, std::span<const CandidateEdge> candidates,
                   const LslParams& params);

// The fill stage alone; exposed for the incremental updater.
void lsl_fill_residual(Topology& topology, std::span<const CandidateEdge> candidates,
                       const LslParams& params);

}  // namespace leotopo

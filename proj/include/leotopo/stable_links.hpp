#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "leotopo/shell.hpp"

namespace leotopo {

// Circular distance between plane indices i and j out of n planes.
int plane_span(int i, int j, int n);

// Admissibility of offset-space cells: a cell is in the region when the
// worst-case separation of its lattice offset stays within d_stab.
struct StableRegion {
    double resolution_deg = 1.0;
    double d_stab_km = 0.0;
    int cells = 0;  // per axis
    std::vector<double> worst_case_km;   // cells*cells, row = raan cell
    std::vector<std::uint8_t> admissible;

    double worst_at(int raan_cell, int anomaly_cell) const {
        return worst_case_km[static_cast<std::size_t>(raan_cell) * cells + anomaly_cell];
    }
    bool cell_admissible(int raan_cell, int anomaly_cell) const {
        return admissible[static_cast<std::size_t>(raan_cell) * cells + anomaly_cell] != 0;
    }
    std::size_t admissible_count() const;
};

StableRegion compute_stable_region(const ShellConfig& config, double resolution_deg = 1.0);

// An unordered satellite pair whose link stays feasible through the full
// orbital cycle. Edge length for ranking is the worst-case separation.
struct CandidateEdge {
    SatelliteId a = 0;  // a < b
    SatelliteId b = 0;
    double worst_case_km = 0.0;
    double instantaneous_km = 0.0;  // at snapshot phase 0
    int plane_span = 0;
};

// All stable links among the snapshot's active satellites, ordered by (a, b).
// The region prunes clearly infeasible offsets; every surviving pair is
// verified with an exact per-offset sweep.
std::vector<CandidateEdge> build_stable_link_set(const Snapshot& snapshot,
                                                 const StableRegion& region);

// Idealized candidate set for illustrative shells: every pair within
// range_limit_km at the snapshot instant, ranked by that instantaneous
// distance (an infinite limit keeps every pair). Small dense shells cannot
// realize multi-plane shortcuts under the full-cycle stability rule, so toy
// constructions use this set instead.
std::vector<CandidateEdge> build_snapshot_link_set(const Snapshot& snapshot,
                                                   double range_limit_km);

// CSV rows: d_raan_deg,d_anomaly_deg,worst_case_km,admissible
void write_region_csv(const StableRegion& region, const std::string& path);

// Regions depend only on shell geometry, so daily snapshots with a shared
// config reuse one computation.
class StableRegionCache {
public:
    const StableRegion& get(const ShellConfig& config, double resolution_deg = 1.0);

private:
    std::mutex mutex_;
    std::unordered_map<std::string, StableRegion> regions_;
};

}  // namespace leotopo

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leotopo/shell.hpp"

namespace leotopo {

// Snapshot CSV: `# key=value` preamble (config + label), then rows of
// sat_id,plane_id,raan_deg,anomaly_deg at fixed 6-decimal precision.
void save_snapshot(const Snapshot& snapshot, const std::string& path);

// Round-trips save_snapshot output. Angles outside [0,360) are normalized
// with a warning; duplicate ids and malformed rows are hard errors.
Snapshot load_snapshot(const std::string& path, std::vector<std::string>* warnings = nullptr);

struct TleElements {
    long catalog_number = 0;
    double inclination_deg = 0.0;
    double raan_deg = 0.0;
    // Along-orbit angle: mean anomaly + argument of perigee, wrapped.
    double anomaly_deg = 0.0;
    double mean_motion_rev_per_day = 0.0;
    // From the circular-orbit relation on the mean motion.
    double altitude_km = 0.0;
};

// Parses one element set from standard 69-column TLE lines, verifying both
// checksums.
TleElements parse_tle_elements(const std::string& line1, const std::string& line2,
                               double earth_radius_km = 6371.0);

// Reads a 2-line or 3-line TLE file into a snapshot. Planes are assigned by
// clustering RAAN values with the given gap threshold; satellites far from
// any cluster centroid are excluded with a warning.
Snapshot load_tle_snapshot(const std::string& path, const ShellConfig& base_config,
                           const std::string& label, double raan_gap_deg = 2.5,
                           std::vector<std::string>* warnings = nullptr);

enum class TurnoverMode { Growth, Shrinkage };

struct TurnoverScenario {
    TurnoverMode mode = TurnoverMode::Shrinkage;
    double start_fraction = 1.0;
    double end_fraction = 0.8;
    double daily_change_pct = 1.0;  // percent of the full shell per day
    std::uint64_t rng_seed = 0;

    void validate() const;
};

// Seeded day-by-day active subsets of `base`. Day 0 holds start_fraction of
// the shell; each transition moves daily_change_pct of the full size toward
// end_fraction. Growth and shrinkage with one seed are exact inverses.
std::vector<Snapshot> generate_turnover_series(const Snapshot& base,
                                               const TurnoverScenario& scenario, int days);

}  // namespace leotopo

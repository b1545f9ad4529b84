#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace leotopo {

inline constexpr double kSpeedOfLightKmPerS = 299792.458;

using SatelliteId = std::int64_t;

// One circular-orbit shell: every satellite shares altitude and inclination,
// planes differ only in RAAN.
struct ShellConfig {
    int num_planes = 0;
    int sats_per_plane = 0;
    double altitude_km = 0.0;
    double inclination_deg = 0.0;
    double earth_radius_km = 6371.0;
    double atmosphere_km = 80.0;
    double max_isl_range_km = 8000.0;
    // Anomaly shift applied per plane when synthesizing a shell.
    double phasing_offset_deg = 0.0;

    double orbit_radius_km() const { return earth_radius_km + altitude_km; }

    // Throws ValidationError when any invariant is broken.
    void validate() const;
};

// Walker-delta style defaults (F=1): phasing = 360 / (planes * per_plane).
ShellConfig make_shell_config(int planes, int per_plane, double altitude_km,
                              double inclination_deg);

struct SatelliteState {
    SatelliteId id = 0;
    int plane_index = 0;
    double raan_deg = 0.0;     // Omega
    double anomaly_deg = 0.0;  // u
};

// Active satellite set for one day.
struct Snapshot {
    ShellConfig config;
    std::vector<SatelliteState> satellites;
    std::string label;

    void validate() const;
};

// Relative position of two same-shell satellites; constant over the cycle.
struct AngularOffset {
    double d_raan_deg = 0.0;
    double d_anomaly_deg = 0.0;
};

// Wraps an angle into [0, 360).
double wrap_deg(double deg);

AngularOffset offset_between(const SatelliteState& a, const SatelliteState& b);

Snapshot generate_synthetic_shell(const ShellConfig& config, std::string label = "synthetic");

// Earth-centered position on the circular orbit, with the whole shell
// advanced along-track by phase_deg.
Eigen::Vector3d position_at(const SatelliteState& sat, const ShellConfig& config,
                            double phase_deg);

double instantaneous_distance(const SatelliteState& a, const SatelliteState& b,
                              const ShellConfig& config, double phase_deg);

// Worst-case separation of a canonical pair realizing `offset`, sampled over
// one orbital cycle at resolution_deg.
double max_separation(const AngularOffset& offset, const ShellConfig& config,
                      double resolution_deg = 1.0);

// Line-of-sight bound: 2*sqrt((r+h)^2 - (r+a)^2). Rejects a >= h.
double d_los(const ShellConfig& config);

// Stable-link threshold: min(hardware range, line-of-sight bound).
double d_stab(const ShellConfig& config);

// Reusable phase sweep with precomputed trig tables; one instance serves many
// offsets at a fixed resolution.
class PhaseSweep {
public:
    PhaseSweep(const ShellConfig& config, double resolution_deg = 1.0);

    double max_separation(const AngularOffset& offset) const;
    int steps() const { return static_cast<int>(cos_.size()); }

private:
    double radius_km_;
    double cos_incl_;
    double sin_incl_;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

}  // namespace leotopo

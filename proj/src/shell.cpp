#include "leotopo/shell.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "leotopo/errors.hpp"

namespace leotopo {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

void ShellConfig::validate() const {
    std::ostringstream problems;
    if (num_planes < 1) {
        problems << "num_planes must be >= 1; ";
    }
    if (sats_per_plane < 1) {
        problems << "sats_per_plane must be >= 1; ";
    }
    if (!(altitude_km > 0.0)) {
        problems << "altitude_km must be > 0; ";
    }
    if (!(atmosphere_km > 0.0 && atmosphere_km < altitude_km)) {
        problems << "atmosphere_km must lie in (0, altitude_km); ";
    }
    if (!(inclination_deg > 0.0 && inclination_deg < 180.0)) {
        problems << "inclination_deg must lie in (0, 180); ";
    }
    if (!(earth_radius_km > 0.0)) {
        problems << "earth_radius_km must be > 0; ";
    }
    if (!(max_isl_range_km > 0.0)) {
        problems << "max_isl_range_km must be > 0; ";
    }
    if (!std::isfinite(phasing_offset_deg)) {
        problems << "phasing_offset_deg must be finite; ";
    }
    const std::string msg = problems.str();
    if (!msg.empty()) {
        throw ValidationError("invalid shell config: " + msg);
    }
}

ShellConfig make_shell_config(int planes, int per_plane, double altitude_km,
                              double inclination_deg) {
    ShellConfig config;
    config.num_planes = planes;
    config.sats_per_plane = per_plane;
    config.altitude_km = altitude_km;
    config.inclination_deg = inclination_deg;
    if (planes >= 1 && per_plane >= 1) {
        config.phasing_offset_deg = 360.0 / (static_cast<double>(planes) * per_plane);
    }
    config.validate();
    return config;
}

void Snapshot::validate() const {
    config.validate();
    std::unordered_set<SatelliteId> seen;
    seen.reserve(satellites.size());
    for (const auto& sat : satellites) {
        if (!seen.insert(sat.id).second) {
            throw ValidationError("duplicate satellite id " + std::to_string(sat.id) +
                                  " in snapshot '" + label + "'");
        }
        if (sat.plane_index < 0 || sat.plane_index >= config.num_planes) {
            throw ValidationError("satellite " + std::to_string(sat.id) +
                                  " has plane_index " + std::to_string(sat.plane_index) +
                                  " outside [0, " + std::to_string(config.num_planes) + ")");
        }
    }
}

double wrap_deg(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) {
        w += 360.0;
    }
    return w;
}

AngularOffset offset_between(const SatelliteState& a, const SatelliteState& b) {
    return AngularOffset{wrap_deg(b.raan_deg - a.raan_deg),
                         wrap_deg(b.anomaly_deg - a.anomaly_deg)};
}

Snapshot generate_synthetic_shell(const ShellConfig& config, std::string label) {
    config.validate();
    Snapshot snapshot;
    snapshot.config = config;
    snapshot.label = std::move(label);
    snapshot.satellites.reserve(static_cast<std::size_t>(config.num_planes) *
                                config.sats_per_plane);
    const double raan_step = 360.0 / config.num_planes;
    const double anomaly_step = 360.0 / config.sats_per_plane;
    for (int p = 0; p < config.num_planes; ++p) {
        for (int k = 0; k < config.sats_per_plane; ++k) {
            SatelliteState sat;
            sat.id = static_cast<SatelliteId>(p) * config.sats_per_plane + k;
            sat.plane_index = p;
            sat.raan_deg = wrap_deg(p * raan_step);
            sat.anomaly_deg = wrap_deg(k * anomaly_step + p * config.phasing_offset_deg);
            snapshot.satellites.push_back(sat);
        }
    }
    return snapshot;
}

Eigen::Vector3d position_at(const SatelliteState& sat, const ShellConfig& config,
                            double phase_deg) {
    const double radius = config.orbit_radius_km();
    const double incl = config.inclination_deg * kDegToRad;
    const double raan = sat.raan_deg * kDegToRad;
    const double arg = (sat.anomaly_deg + phase_deg) * kDegToRad;
    const double cos_raan = std::cos(raan);
    const double sin_raan = std::sin(raan);
    const double cos_arg = std::cos(arg);
    const double sin_arg = std::sin(arg);
    const double cos_incl = std::cos(incl);
    const double sin_incl = std::sin(incl);
    return radius * Eigen::Vector3d(cos_raan * cos_arg - sin_raan * sin_arg * cos_incl,
                                    sin_raan * cos_arg + cos_raan * sin_arg * cos_incl,
                                    sin_arg * sin_incl);
}

double instantaneous_distance(const SatelliteState& a, const SatelliteState& b,
                              const ShellConfig& config, double phase_deg) {
    return (position_at(a, config, phase_deg) - position_at(b, config, phase_deg)).norm();
}

double d_los(const ShellConfig& config) {
    if (config.atmosphere_km >= config.altitude_km) {
        throw ValidationError("d_los requires atmosphere_km < altitude_km");
    }
    const double outer = config.earth_radius_km + config.altitude_km;
    const double inner = config.earth_radius_km + config.atmosphere_km;
    return 2.0 * std::sqrt(outer * outer - inner * inner);
}

double d_stab(const ShellConfig& config) {
    return std::min(config.max_isl_range_km, d_los(config));
}

PhaseSweep::PhaseSweep(const ShellConfig& config, double resolution_deg) {
    if (!(resolution_deg > 0.0 && resolution_deg <= 360.0)) {
        throw ValidationError("phase sweep resolution must lie in (0, 360]");
    }
    radius_km_ = config.orbit_radius_km();
    const double incl = config.inclination_deg * kDegToRad;
    cos_incl_ = std::cos(incl);
    sin_incl_ = std::sin(incl);
    const int steps = static_cast<int>(std::lround(360.0 / resolution_deg));
    cos_.resize(steps);
    sin_.resize(steps);
    for (int k = 0; k < steps; ++k) {
        const double phase = k * (360.0 / steps) * kDegToRad;
        cos_[k] = std::cos(phase);
        sin_[k] = std::sin(phase);
    }
}

double PhaseSweep::max_separation(const AngularOffset& offset) const {
    const double d_raan = offset.d_raan_deg * kDegToRad;
    const double d_anom = offset.d_anomaly_deg * kDegToRad;
    const double cos_draan = std::cos(d_raan);
    const double sin_draan = std::sin(d_raan);
    const double cos_danom = std::cos(d_anom);
    const double sin_danom = std::sin(d_anom);
    const double ci = cos_incl_;
    const double si = sin_incl_;

    double worst_sq = 0.0;
    const std::size_t steps = cos_.size();
    for (std::size_t k = 0; k < steps; ++k) {
        const double cphi = cos_[k];
        const double sphi = sin_[k];
        // Satellite A at (RAAN 0, argument phi).
        const double ax = cphi;
        const double ay = sphi * ci;
        const double az = sphi * si;
        // Satellite B at (RAAN d_raan, argument phi + d_anom).
        const double cu = cphi * cos_danom - sphi * sin_danom;
        const double su = sphi * cos_danom + cphi * sin_danom;
        const double bx = cos_draan * cu - sin_draan * su * ci;
        const double by = sin_draan * cu + cos_draan * su * ci;
        const double bz = su * si;
        const double dx = ax - bx;
        const double dy = ay - by;
        const double dz = az - bz;
        const double dist_sq = dx * dx + dy * dy + dz * dz;
        if (dist_sq > worst_sq) {
            worst_sq = dist_sq;
        }
    }
    return radius_km_ * std::sqrt(worst_sq);
}

double max_separation(const AngularOffset& offset, const ShellConfig& config,
                      double resolution_deg) {
    return PhaseSweep(config, resolution_deg).max_separation(offset);
}

}  // namespace leotopo

#include "leotopo/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "leotopo/errors.hpp"
#include "leotopo/rng.hpp"

namespace leotopo {
namespace {

constexpr double kMuEarthKm3PerS2 = 398600.4418;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double_field(const std::string& text, const std::string& context, int line_no) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (trim(text.substr(used)).empty()) {
            return value;
        }
    } catch (const std::exception&) {
    }
    throw IoError("malformed " + context + " at line " + std::to_string(line_no) + ": '" +
                  text + "'");
}

}  // namespace

void save_snapshot(const Snapshot& snapshot, const std::string& path) {
    snapshot.validate();
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open snapshot for writing: " + path);
    }
    char buffer[192];
    const ShellConfig& config = snapshot.config;
    out << "# label=" << snapshot.label << "\n";
    out << "# num_planes=" << config.num_planes << "\n";
    out << "# sats_per_plane=" << config.sats_per_plane << "\n";
    std::snprintf(buffer, sizeof(buffer), "# altitude_km=%.6f\n", config.altitude_km);
    out << buffer;
    std::snprintf(buffer, sizeof(buffer), "# inclination_deg=%.6f\n", config.inclination_deg);
    out << buffer;
    std::snprintf(buffer, sizeof(buffer), "# earth_radius_km=%.6f\n", config.earth_radius_km);
    out << buffer;
    std::snprintf(buffer, sizeof(buffer), "# atmosphere_km=%.6f\n", config.atmosphere_km);
    out << buffer;
    std::snprintf(buffer, sizeof(buffer), "# max_isl_range_km=%.6f\n", config.max_isl_range_km);
    out << buffer;
    std::snprintf(buffer, sizeof(buffer), "# phasing_offset_deg=%.6f\n",
                  config.phasing_offset_deg);
    out << buffer;
    out << "sat_id,plane_id,raan_deg,anomaly_deg\n";
    for (const auto& sat : snapshot.satellites) {
        std::snprintf(buffer, sizeof(buffer), "%lld,%d,%.6f,%.6f\n",
                      static_cast<long long>(sat.id), sat.plane_index, sat.raan_deg,
                      sat.anomaly_deg);
        out << buffer;
    }
    if (!out) {
        throw IoError("failed writing snapshot: " + path);
    }
}

Snapshot load_snapshot(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open snapshot: " + path);
    }
    Snapshot snapshot;
    ShellConfig& config = snapshot.config;
    bool have_planes = false;
    bool have_altitude = false;
    bool have_inclination = false;
    bool header_seen = false;

    std::string line;
    int line_no = 0;
    std::unordered_set<SatelliteId> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                continue;
            }
            const std::string key = trim(line.substr(1, eq - 1));
            const std::string value = trim(line.substr(eq + 1));
            if (key == "label") {
                snapshot.label = value;
            } else if (key == "num_planes") {
                config.num_planes = static_cast<int>(
                    parse_double_field(value, "num_planes", line_no));
                have_planes = true;
            } else if (key == "sats_per_plane") {
                config.sats_per_plane =
                    static_cast<int>(parse_double_field(value, "sats_per_plane", line_no));
            } else if (key == "altitude_km") {
                config.altitude_km = parse_double_field(value, "altitude_km", line_no);
                have_altitude = true;
            } else if (key == "inclination_deg") {
                config.inclination_deg =
                    parse_double_field(value, "inclination_deg", line_no);
                have_inclination = true;
            } else if (key == "earth_radius_km") {
                config.earth_radius_km = parse_double_field(value, "earth_radius_km", line_no);
            } else if (key == "atmosphere_km") {
                config.atmosphere_km = parse_double_field(value, "atmosphere_km", line_no);
            } else if (key == "max_isl_range_km") {
                config.max_isl_range_km =
                    parse_double_field(value, "max_isl_range_km", line_no);
            } else if (key == "phasing_offset_deg") {
                config.phasing_offset_deg =
                    parse_double_field(value, "phasing_offset_deg", line_no);
            }
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        std::string field;
        SatelliteState sat;
        if (!std::getline(row, field, ',')) {
            throw IoError("malformed snapshot row at " + path + ":" + std::to_string(line_no));
        }
        try {
            sat.id = std::stoll(trim(field));
        } catch (const std::exception&) {
            throw IoError("malformed sat_id at " + path + ":" + std::to_string(line_no));
        }
        if (!std::getline(row, field, ',')) {
            throw IoError("malformed snapshot row at " + path + ":" + std::to_string(line_no));
        }
        sat.plane_index = static_cast<int>(parse_double_field(field, "plane_id", line_no));
        if (!std::getline(row, field, ',')) {
            throw IoError("malformed snapshot row at " + path + ":" + std::to_string(line_no));
        }
        sat.raan_deg = parse_double_field(field, "raan_deg", line_no);
        if (!std::getline(row, field, ',')) {
            throw IoError("malformed snapshot row at " + path + ":" + std::to_string(line_no));
        }
        sat.anomaly_deg = parse_double_field(field, "anomaly_deg", line_no);

        if (sat.raan_deg < 0.0 || sat.raan_deg >= 360.0) {
            if (warnings != nullptr) {
                warnings->push_back("normalized raan " + std::to_string(sat.raan_deg) +
                                    " for satellite " + std::to_string(sat.id));
            }
            sat.raan_deg = wrap_deg(sat.raan_deg);
        }
        if (sat.anomaly_deg < 0.0 || sat.anomaly_deg >= 360.0) {
            if (warnings != nullptr) {
                warnings->push_back("normalized anomaly " + std::to_string(sat.anomaly_deg) +
                                    " for satellite " + std::to_string(sat.id));
            }
            sat.anomaly_deg = wrap_deg(sat.anomaly_deg);
        }
        if (!seen.insert(sat.id).second) {
            throw IoError("duplicate sat_id " + std::to_string(sat.id) + " at " + path + ":" +
                          std::to_string(line_no));
        }
        snapshot.satellites.push_back(sat);
    }
    if (!have_planes || !have_altitude || !have_inclination) {
        throw IoError("snapshot " + path +
                      " is missing metadata (num_planes/altitude_km/inclination_deg)");
    }
    if (config.sats_per_plane == 0) {
        // Not every real snapshot is evenly provisioned; derive a bound.
        int max_per_plane = 1;
        std::vector<int> counts(config.num_planes, 0);
        for (const auto& sat : snapshot.satellites) {
            if (sat.plane_index >= 0 && sat.plane_index < config.num_planes) {
                max_per_plane = std::max(max_per_plane, ++counts[sat.plane_index]);
            }
        }
        config.sats_per_plane = max_per_plane;
    }
    snapshot.validate();
    return snapshot;
}

namespace {

int tle_checksum(const std::string& line) {
    int sum = 0;
    for (std::size_t i = 0; i + 1 < line.size() && i < 68; ++i) {
        const char c = line[i];
        if (c >= '0' && c <= '9') {
            sum += c - '0';
        } else if (c == '-') {
            sum += 1;
        }
    }
    return sum % 10;
}

double tle_field(const std::string& line, int start_col, int end_col,
                 const std::string& name) {
    // Columns are 1-based and inclusive, per the TLE format convention.
    const std::string text = trim(line.substr(start_col - 1, end_col - start_col + 1));
    try {
        return std::stod(text);
    } catch (const std::exception&) {
        throw IoError("malformed TLE field " + name + ": '" + text + "'");
    }
}

}  // namespace

TleElements parse_tle_elements(const std::string& line1, const std::string& line2,
                               double earth_radius_km) {
    if (line1.size() < 69 || line2.size() < 69) {
        throw IoError("TLE lines must be 69 characters");
    }
    if (line1[0] != '1' || line2[0] != '2') {
        throw IoError("TLE line numbers must be 1 and 2");
    }
    for (const std::string* line : {&line1, &line2}) {
        const int expected = (*line)[68] - '0';
        if (tle_checksum(*line) != expected) {
            throw IoError("TLE checksum failure on line starting '" + line->substr(0, 8) + "'");
        }
    }
    TleElements elements;
    elements.catalog_number =
        static_cast<long>(tle_field(line2, 3, 7, "catalog number"));
    elements.inclination_deg = tle_field(line2, 9, 16, "inclination");
    elements.raan_deg = tle_field(line2, 18, 25, "raan");
    const double arg_perigee = tle_field(line2, 35, 42, "argument of perigee");
    const double mean_anomaly = tle_field(line2, 44, 51, "mean anomaly");
    elements.anomaly_deg = wrap_deg(mean_anomaly + arg_perigee);
    elements.mean_motion_rev_per_day = tle_field(line2, 53, 63, "mean motion");
    if (elements.mean_motion_rev_per_day <= 0.0) {
        throw IoError("TLE mean motion must be positive");
    }
    const double period_s = 86400.0 / elements.mean_motion_rev_per_day;
    const double semi_major_km =
        std::cbrt(kMuEarthKm3PerS2 * std::pow(period_s / (2.0 * std::numbers::pi), 2.0));
    elements.altitude_km = semi_major_km - earth_radius_km;
    return elements;
}

Snapshot load_tle_snapshot(const std::string& path, const ShellConfig& base_config,
                           const std::string& label, double raan_gap_deg,
                           std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open TLE file: " + path);
    }
    std::vector<TleElements> elements;
    std::string line;
    std::string pending_line1;
    while (std::getline(in, line)) {
        const std::string trimmed = trim(line);
        if (trimmed.empty()) {
            continue;
        }
        if (trimmed[0] == '1' && trimmed.size() >= 69) {
            pending_line1 = trimmed;
        } else if (trimmed[0] == '2' && trimmed.size() >= 69) {
            if (pending_line1.empty()) {
                throw IoError("TLE line 2 without preceding line 1 in " + path);
            }
            elements.push_back(
                parse_tle_elements(pending_line1, trimmed, base_config.earth_radius_km));
            pending_line1.clear();
        }
        // Other lines are satellite names (3-line format).
    }
    if (elements.empty()) {
        throw IoError("no TLE element sets found in " + path);
    }

    // 1-D circular clustering of RAAN: sort, split at gaps above threshold.
    std::vector<std::size_t> order(elements.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return elements[x].raan_deg < elements[y].raan_deg;
    });
    std::vector<int> cluster_of(elements.size(), 0);
    int clusters = 1;
    for (std::size_t k = 1; k < order.size(); ++k) {
        const double gap = elements[order[k]].raan_deg - elements[order[k - 1]].raan_deg;
        if (gap > raan_gap_deg) {
            ++clusters;
        }
        cluster_of[order[k]] = clusters - 1;
    }
    // Wrap-around: merge the last cluster into the first when the circular gap
    // is small.
    if (clusters > 1) {
        const double wrap_gap =
            elements[order.front()].raan_deg + 360.0 - elements[order.back()].raan_deg;
        if (wrap_gap <= raan_gap_deg) {
            for (auto& c : cluster_of) {
                if (c == clusters - 1) {
                    c = 0;
                }
            }
            --clusters;
        }
    }

    // Centroids for the plane-stability rule.
    std::vector<double> centroid_x(clusters, 0.0);
    std::vector<double> centroid_y(clusters, 0.0);
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const double rad = elements[i].raan_deg * std::numbers::pi / 180.0;
        centroid_x[cluster_of[i]] += std::cos(rad);
        centroid_y[cluster_of[i]] += std::sin(rad);
    }
    std::vector<double> centroid_deg(clusters, 0.0);
    for (int c = 0; c < clusters; ++c) {
        centroid_deg[c] =
            wrap_deg(std::atan2(centroid_y[c], centroid_x[c]) * 180.0 / std::numbers::pi);
    }
    // Plane indices ordered by centroid RAAN.
    std::vector<int> plane_rank(clusters);
    std::vector<int> by_centroid(clusters);
    for (int c = 0; c < clusters; ++c) {
        by_centroid[c] = c;
    }
    std::sort(by_centroid.begin(), by_centroid.end(),
              [&](int x, int y) { return centroid_deg[x] < centroid_deg[y]; });
    for (int rank = 0; rank < clusters; ++rank) {
        plane_rank[by_centroid[rank]] = rank;
    }

    Snapshot snapshot;
    snapshot.config = base_config;
    snapshot.config.num_planes = std::max(base_config.num_planes, clusters);
    snapshot.label = label;
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const int cluster = cluster_of[i];
        double dist = std::abs(elements[i].raan_deg - centroid_deg[cluster]);
        dist = std::min(dist, 360.0 - dist);
        if (dist > 2.0 * raan_gap_deg) {
            if (warnings != nullptr) {
                warnings->push_back("excluded satellite " +
                                    std::to_string(elements[i].catalog_number) +
                                    ": raan far from any plane centroid");
            }
            continue;
        }
        SatelliteState sat;
        sat.id = elements[i].catalog_number;
        sat.plane_index = plane_rank[cluster];
        sat.raan_deg = wrap_deg(elements[i].raan_deg);
        sat.anomaly_deg = wrap_deg(elements[i].anomaly_deg);
        snapshot.satellites.push_back(sat);
    }
    snapshot.validate();
    return snapshot;
}

void TurnoverScenario::validate() const {
    if (!(start_fraction > 0.0 && start_fraction <= 1.0) ||
        !(end_fraction > 0.0 && end_fraction <= 1.0)) {
        throw ValidationError("turnover fractions must lie in (0, 1]");
    }
    if (mode == TurnoverMode::Growth && start_fraction >= end_fraction) {
        throw ValidationError("growth requires start_fraction < end_fraction");
    }
    if (mode == TurnoverMode::Shrinkage && start_fraction <= end_fraction) {
        throw ValidationError("shrinkage requires start_fraction > end_fraction");
    }
    if (daily_change_pct <= 0.0) {
        throw ValidationError("daily_change_pct must be > 0");
    }
}

std::vector<Snapshot> generate_turnover_series(const Snapshot& base,
                                               const TurnoverScenario& scenario, int days) {
    base.validate();
    scenario.validate();
    if (days < 0) {
        throw ValidationError("turnover days must be >= 0");
    }
    const std::size_t full = base.satellites.size();
    if (full == 0) {
        throw ValidationError("turnover base snapshot is empty");
    }

    // One seeded permutation drives both directions: the active set at any
    // fraction f is the first round(f*full) satellites, which makes growth
    // and shrinkage with the same seed exact inverses.
    std::vector<std::size_t> permutation(full);
    for (std::size_t i = 0; i < full; ++i) {
        permutation[i] = i;
    }
    Rng rng(scenario.rng_seed);
    for (std::size_t i = full; i > 1; --i) {
        std::swap(permutation[i - 1], permutation[rng.uniform_below(i)]);
    }

    const double step = scenario.daily_change_pct / 100.0;
    std::vector<Snapshot> series;
    series.reserve(days + 1);
    for (int day = 0; day <= days; ++day) {
        double fraction = scenario.start_fraction;
        if (scenario.mode == TurnoverMode::Growth) {
            fraction = std::min(scenario.end_fraction, scenario.start_fraction + day * step);
        } else {
            fraction = std::max(scenario.end_fraction, scenario.start_fraction - day * step);
        }
        const auto count = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(full)));
        std::vector<std::size_t> chosen(permutation.begin(),
                                        permutation.begin() + std::min(count, full));
        std::sort(chosen.begin(), chosen.end());
        Snapshot snapshot;
        snapshot.config = base.config;
        snapshot.label = base.label + "+d" + std::to_string(day);
        snapshot.satellites.reserve(chosen.size());
        for (const std::size_t idx : chosen) {
            snapshot.satellites.push_back(base.satellites[idx]);
        }
        series.push_back(std::move(snapshot));
    }
    return series;
}

}  // namespace leotopo

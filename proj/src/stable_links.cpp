#include "leotopo/stable_links.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "leotopo/errors.hpp"
#include "leotopo/parallel.hpp"

namespace leotopo {
namespace {

// Keys fractional offsets at micro-degree resolution so equal offsets share
// one exact sweep.
std::uint64_t offset_key(const AngularOffset& offset) {
    const auto qr = static_cast<std::uint64_t>(std::llround(offset.d_raan_deg * 1e6)) % 360000000ULL;
    const auto qa = static_cast<std::uint64_t>(std::llround(offset.d_anomaly_deg * 1e6)) % 360000000ULL;
    return qr * 360000000ULL + qa;
}

}  // namespace

int plane_span(int i, int j, int n) {
    if (n < 1 || i < 0 || j < 0 || i >= n || j >= n) {
        throw ValidationError("plane_span: indices must lie in [0, n)");
    }
    const int diff = std::abs(i - j);
    return std::min(diff, n - diff);
}

std::size_t StableRegion::admissible_count() const {
    std::size_t count = 0;
    for (const auto cell : admissible) {
        count += cell;
    }
    return count;
}

StableRegion compute_stable_region(const ShellConfig& config, double resolution_deg) {
    config.validate();
    StableRegion region;
    region.resolution_deg = resolution_deg;
    region.d_stab_km = d_stab(config);
    region.cells = static_cast<int>(std::lround(360.0 / resolution_deg));
    if (region.cells < 1) {
        throw ValidationError("stable region resolution too coarse");
    }
    const std::size_t total = static_cast<std::size_t>(region.cells) * region.cells;
    region.worst_case_km.assign(total, 0.0);
    region.admissible.assign(total, 0);

    const PhaseSweep sweep(config, resolution_deg);
    const double step = 360.0 / region.cells;
    const int cells = region.cells;
    parallel_for(static_cast<std::size_t>(cells), [&](std::size_t begin, std::size_t end) {
        for (std::size_t ir = begin; ir < end; ++ir) {
            for (int iu = 0; iu < cells; ++iu) {
                const AngularOffset offset{ir * step, iu * step};
                const double worst = sweep.max_separation(offset);
                const std::size_t idx = ir * cells + iu;
                region.worst_case_km[idx] = worst;
                region.admissible[idx] = worst <= region.d_stab_km ? 1 : 0;
            }
        }
    });
    return region;
}

std::vector<CandidateEdge> build_stable_link_set(const Snapshot& snapshot,
                                                 const StableRegion& region) {
    snapshot.validate();
    const ShellConfig& config = snapshot.config;
    const double threshold = region.d_stab_km;
    const int cells = region.cells;
    const double step = 360.0 / cells;

    std::vector<const SatelliteState*> sats;
    sats.reserve(snapshot.satellites.size());
    for (const auto& sat : snapshot.satellites) {
        sats.push_back(&sat);
    }
    std::sort(sats.begin(), sats.end(),
              [](const SatelliteState* x, const SatelliteState* y) { return x->id < y->id; });

    // A cell is worth an exact sweep when it or any neighbor is admissible;
    // cells deep inside the inadmissible zone are pruned outright.
    auto cell_of = [&](double deg) {
        int c = static_cast<int>(std::floor(deg / step));
        if (c >= cells) {
            c = cells - 1;
        }
        return c;
    };
    auto near_region = [&](int ir, int iu) {
        for (int dr = -1; dr <= 1; ++dr) {
            for (int du = -1; du <= 1; ++du) {
                const int r = (ir + dr + cells) % cells;
                const int u = (iu + du + cells) % cells;
                if (region.cell_admissible(r, u)) {
                    return true;
                }
            }
        }
        return false;
    };

    const PhaseSweep sweep(config, region.resolution_deg);
    const std::size_t n = sats.size();

    std::vector<std::vector<CandidateEdge>> rows(n);
    std::mutex cache_mutex;
    std::unordered_map<std::uint64_t, double> worst_cache;

    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::unordered_map<std::uint64_t, double> local_cache;
        for (std::size_t i = begin; i < end; ++i) {
            const SatelliteState& a = *sats[i];
            auto& row = rows[i];
            for (std::size_t j = i + 1; j < n; ++j) {
                const SatelliteState& b = *sats[j];
                const AngularOffset offset = offset_between(a, b);
                const int ir = cell_of(offset.d_raan_deg);
                const int iu = cell_of(offset.d_anomaly_deg);
                if (!region.cell_admissible(ir, iu) && !near_region(ir, iu)) {
                    continue;
                }
                const std::uint64_t key = offset_key(offset);
                double worst;
                if (auto it = local_cache.find(key); it != local_cache.end()) {
                    worst = it->second;
                } else {
                    bool found = false;
                    {
                        std::lock_guard<std::mutex> lock(cache_mutex);
                        if (auto git = worst_cache.find(key); git != worst_cache.end()) {
                            worst = git->second;
                            found = true;
                        }
                    }
                    if (!found) {
                        worst = sweep.max_separation(offset);
                        std::lock_guard<std::mutex> lock(cache_mutex);
                        worst_cache.emplace(key, worst);
                    }
                    local_cache.emplace(key, worst);
                }
                if (worst > threshold) {
                    continue;
                }
                CandidateEdge edge;
                edge.a = a.id;
                edge.b = b.id;
                edge.worst_case_km = worst;
                edge.instantaneous_km = instantaneous_distance(a, b, config, 0.0);
                edge.plane_span = plane_span(a.plane_index, b.plane_index, config.num_planes);
                row.push_back(edge);
            }
        }
    });

    std::vector<CandidateEdge> result;
    std::size_t total = 0;
    for (const auto& row : rows) {
        total += row.size();
    }
    result.reserve(total);
    for (auto& row : rows) {
        result.insert(result.end(), row.begin(), row.end());
    }
    return result;
}

std::vector<CandidateEdge> build_snapshot_link_set(const Snapshot& snapshot,
                                                   double range_limit_km) {
    snapshot.validate();
    const ShellConfig& config = snapshot.config;
    const double limit = range_limit_km;
    std::vector<const SatelliteState*> sats;
    sats.reserve(snapshot.satellites.size());
    for (const auto& sat : snapshot.satellites) {
        sats.push_back(&sat);
    }
    std::sort(sats.begin(), sats.end(),
              [](const SatelliteState* x, const SatelliteState* y) { return x->id < y->id; });
    std::vector<CandidateEdge> result;
    for (std::size_t i = 0; i < sats.size(); ++i) {
        for (std::size_t j = i + 1; j < sats.size(); ++j) {
            const double dist = instantaneous_distance(*sats[i], *sats[j], config, 0.0);
            if (dist > limit) {
                continue;
            }
            CandidateEdge edge;
            edge.a = sats[i]->id;
            edge.b = sats[j]->id;
            edge.worst_case_km = dist;
            edge.instantaneous_km = dist;
            edge.plane_span =
                plane_span(sats[i]->plane_index, sats[j]->plane_index, config.num_planes);
            result.push_back(edge);
        }
    }
    return result;
}

void write_region_csv(const StableRegion& region, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open region csv for writing: " + path);
    }
    out << "d_raan_deg,d_anomaly_deg,worst_case_km,admissible\n";
    const double step = 360.0 / region.cells;
    char buffer[128];
    for (int ir = 0; ir < region.cells; ++ir) {
        for (int iu = 0; iu < region.cells; ++iu) {
            std::snprintf(buffer, sizeof(buffer), "%.6f,%.6f,%.6f,%d\n", ir * step, iu * step,
                          region.worst_at(ir, iu), region.cell_admissible(ir, iu) ? 1 : 0);
            out << buffer;
        }
    }
    if (!out) {
        throw IoError("failed writing region csv: " + path);
    }
}

const StableRegion& StableRegionCache::get(const ShellConfig& config, double resolution_deg) {
    std::ostringstream key;
    key << config.altitude_km << '|' << config.inclination_deg << '|' << config.earth_radius_km
        << '|' << config.atmosphere_km << '|' << config.max_isl_range_km << '|' << resolution_deg;
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = regions_.find(key.str());
    if (it == regions_.end()) {
        it = regions_.emplace(key.str(), compute_stable_region(config, resolution_deg)).first;
    }
    return it->second;
}

}  // namespace leotopo

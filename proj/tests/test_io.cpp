#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "leotopo/errors.hpp"
#include "leotopo/io.hpp"
#include "leotopo/shell.hpp"

using namespace leotopo;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / name;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

// Builds a standards-shaped TLE line pair with valid checksums.
std::string with_checksum(std::string line) {
    line.resize(68, ' ');
    int sum = 0;
    for (char c : line) {
        if (c >= '0' && c <= '9') {
            sum += c - '0';
        } else if (c == '-') {
            sum += 1;
        }
    }
    line.push_back(static_cast<char>('0' + sum % 10));
    return line;
}

std::string tle_line1(int catalog) {
    char buffer[80];
    std::snprintf(buffer, sizeof(buffer), "1 %05dU 19029A   24275.50000000  .00000000  00000-0  00000-0 0  999",
                  catalog);
    return with_checksum(buffer);
}

std::string tle_line2(int catalog, double incl, double raan, double argp, double mean_anomaly,
                      double mean_motion) {
    char buffer[80];
    std::snprintf(buffer, sizeof(buffer),
                  "2 %05d %8.4f %8.4f 0001000 %8.4f %8.4f %11.8f    1", catalog, incl, raan,
                  argp, mean_anomaly, mean_motion);
    return with_checksum(buffer);
}

}  // namespace

TEST_CASE("snapshot round trip is an identity") {
    const ShellConfig config = make_shell_config(12, 12, 550.0, 53.0);
    const Snapshot original = generate_synthetic_shell(config, "round-trip");
    const auto path = temp_file("leotopo_snapshot_rt.csv");
    save_snapshot(original, path.string());
    const Snapshot loaded = load_snapshot(path.string());
    CHECK(loaded.label == original.label);
    CHECK(loaded.config.num_planes == config.num_planes);
    CHECK(loaded.config.sats_per_plane == config.sats_per_plane);
    CHECK(loaded.config.altitude_km == doctest::Approx(config.altitude_km));
    CHECK(loaded.config.inclination_deg == doctest::Approx(config.inclination_deg));
    CHECK(loaded.config.phasing_offset_deg ==
          doctest::Approx(config.phasing_offset_deg).epsilon(1e-6));
    REQUIRE(loaded.satellites.size() == original.satellites.size());
    for (std::size_t i = 0; i < loaded.satellites.size(); ++i) {
        CHECK(loaded.satellites[i].id == original.satellites[i].id);
        CHECK(loaded.satellites[i].plane_index == original.satellites[i].plane_index);
        CHECK(loaded.satellites[i].raan_deg ==
              doctest::Approx(original.satellites[i].raan_deg).epsilon(1e-6));
        CHECK(loaded.satellites[i].anomaly_deg ==
              doctest::Approx(original.satellites[i].anomaly_deg).epsilon(1e-6));
    }

    // A second save of the loaded snapshot is byte-identical.
    const auto path2 = temp_file("leotopo_snapshot_rt2.csv");
    save_snapshot(loaded, path2.string());
    std::ifstream f1(path), f2(path2);
    const std::string c1((std::istreambuf_iterator<char>(f1)), {});
    const std::string c2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(c1 == c2);
    fs::remove(path);
    fs::remove(path2);
}

TEST_CASE("out-of-range angles are normalized with a warning") {
    const auto path = temp_file("leotopo_snapshot_wrap.csv");
    write_text(path,
               "# label=wrap\n# num_planes=2\n# sats_per_plane=1\n# altitude_km=550\n"
               "# inclination_deg=53\nsat_id,plane_id,raan_deg,anomaly_deg\n"
               "7,0,400.000000,10.000000\n8,1,10.000000,-30.000000\n");
    std::vector<std::string> warnings;
    const Snapshot snapshot = load_snapshot(path.string(), &warnings);
    CHECK(warnings.size() == 2);
    CHECK(snapshot.satellites[0].raan_deg == doctest::Approx(40.0));
    CHECK(snapshot.satellites[1].anomaly_deg == doctest::Approx(330.0));
    fs::remove(path);
}

TEST_CASE("duplicate ids and malformed rows are hard errors") {
    const auto dup = temp_file("leotopo_snapshot_dup.csv");
    write_text(dup,
               "# num_planes=1\n# altitude_km=550\n# inclination_deg=53\n"
               "sat_id,plane_id,raan_deg,anomaly_deg\n1,0,0,0\n1,0,0,10\n");
    CHECK_THROWS_AS(load_snapshot(dup.string()), IoError);
    fs::remove(dup);

    const auto bad = temp_file("leotopo_snapshot_bad.csv");
    write_text(bad,
               "# num_planes=1\n# altitude_km=550\n# inclination_deg=53\n"
               "sat_id,plane_id,raan_deg,anomaly_deg\n1,0,zero,0\n");
    try {
        load_snapshot(bad.string());
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find(":5") != std::string::npos);  // line number
    }
    fs::remove(bad);

    const auto missing = temp_file("leotopo_snapshot_missing.csv");
    write_text(missing, "sat_id,plane_id,raan_deg,anomaly_deg\n1,0,0,0\n");
    CHECK_THROWS_AS(load_snapshot(missing.string()), IoError);
    fs::remove(missing);
}

TEST_CASE("tle parsing recovers elements and altitude") {
    const std::string l1 = tle_line1(44713);
    const std::string l2 = tle_line2(44713, 53.0, 123.4567, 30.0, 40.0, 15.05);
    const TleElements elements = parse_tle_elements(l1, l2);
    CHECK(elements.catalog_number == 44713);
    CHECK(elements.inclination_deg == doctest::Approx(53.0));
    CHECK(elements.raan_deg == doctest::Approx(123.4567));
    CHECK(elements.anomaly_deg == doctest::Approx(70.0));
    CHECK(elements.mean_motion_rev_per_day == doctest::Approx(15.05));

    // Independent circular-orbit relation: a = cbrt(mu (T / 2 pi)^2) - r.
    const double period_s = 86400.0 / 15.05;
    const double semi_major =
        std::cbrt(398600.4418 * std::pow(period_s / (2.0 * std::numbers::pi), 2.0));
    const double expected_altitude = semi_major - 6371.0;
    CHECK(expected_altitude == doctest::Approx(558.6).epsilon(2e-3));
    CHECK(elements.altitude_km == doctest::Approx(expected_altitude).epsilon(1e-12));
}

TEST_CASE("corrupted tle checksums are rejected") {
    const std::string l1 = tle_line1(44713);
    std::string l2 = tle_line2(44713, 53.0, 123.4567, 30.0, 40.0, 15.05);
    l2[68] = l2[68] == '9' ? '0' : l2[68] + 1;
    CHECK_THROWS_AS(parse_tle_elements(l1, l2), IoError);
    CHECK_THROWS_AS(parse_tle_elements("1 short", "2 short"), IoError);
}

TEST_CASE("tle snapshots cluster planes by raan") {
    const auto path = temp_file("leotopo_tles.txt");
    std::string text;
    int catalog = 50000;
    for (const double raan : {10.0, 10.4, 9.7}) {
        text += tle_line1(catalog) + "\n" + tle_line2(catalog, 53.0, raan, 0.0, 45.0, 15.05) +
                "\n";
        ++catalog;
    }
    for (const double raan : {95.0, 95.5}) {
        text += tle_line1(catalog) + "\n" + tle_line2(catalog, 53.0, raan, 0.0, 45.0, 15.05) +
                "\n";
        ++catalog;
    }
    write_text(path, text);
    ShellConfig base = make_shell_config(2, 3, 550.0, 53.0);
    std::vector<std::string> warnings;
    const Snapshot snapshot = load_tle_snapshot(path.string(), base, "tles", 2.5, &warnings);
    REQUIRE(snapshot.satellites.size() == 5);
    for (const auto& sat : snapshot.satellites) {
        if (sat.raan_deg < 50.0) {
            CHECK(sat.plane_index == 0);
        } else {
            CHECK(sat.plane_index == 1);
        }
    }
    fs::remove(path);
}

TEST_CASE("turnover series tracks the target fractions") {
    const ShellConfig config = make_shell_config(12, 12, 550.0, 53.0);
    const Snapshot base = generate_synthetic_shell(config);
    TurnoverScenario scenario;
    scenario.mode = TurnoverMode::Shrinkage;
    scenario.start_fraction = 1.0;
    scenario.end_fraction = 0.8;
    scenario.daily_change_pct = 1.0;
    scenario.rng_seed = 5;
    const auto series = generate_turnover_series(base, scenario, 20);
    REQUIRE(series.size() == 21);
    CHECK(series[0].satellites.size() == 144);
    for (int day = 0; day <= 20; ++day) {
        const auto expected = static_cast<std::size_t>(
            std::llround(144.0 * std::max(0.8, 1.0 - 0.01 * day)));
        CHECK(series[day].satellites.size() == expected);
    }
    CHECK(series[20].satellites.size() == 115);  // round(144 * 0.8)

    // Ids persist: every day's set is a subset of the previous day's.
    for (int day = 1; day <= 20; ++day) {
        std::set<SatelliteId> prev;
        for (const auto& sat : series[day - 1].satellites) {
            prev.insert(sat.id);
        }
        for (const auto& sat : series[day].satellites) {
            CHECK(prev.count(sat.id) == 1);
        }
    }
}

TEST_CASE("growth and shrinkage with one seed are inverses") {
    const ShellConfig config = make_shell_config(12, 12, 550.0, 53.0);
    const Snapshot base = generate_synthetic_shell(config);
    TurnoverScenario grow;
    grow.mode = TurnoverMode::Growth;
    grow.start_fraction = 0.8;
    grow.end_fraction = 1.0;
    grow.rng_seed = 17;
    TurnoverScenario shrink;
    shrink.mode = TurnoverMode::Shrinkage;
    shrink.start_fraction = 1.0;
    shrink.end_fraction = 0.8;
    shrink.rng_seed = 17;

    const auto grown = generate_turnover_series(base, grow, 20);
    const auto shrunk = generate_turnover_series(base, shrink, 20);
    REQUIRE(grown.front().satellites.size() == shrunk.back().satellites.size());
    for (std::size_t i = 0; i < grown.front().satellites.size(); ++i) {
        CHECK(grown.front().satellites[i].id == shrunk.back().satellites[i].id);
    }

    // Determinism and the zero-day case.
    const auto again = generate_turnover_series(base, grow, 20);
    for (std::size_t d = 0; d < grown.size(); ++d) {
        REQUIRE(grown[d].satellites.size() == again[d].satellites.size());
    }
    const auto none = generate_turnover_series(base, shrink, 0);
    REQUIRE(none.size() == 1);
    CHECK(none[0].satellites.size() == base.satellites.size());
}

TEST_CASE("turnover scenarios validate their fractions") {
    TurnoverScenario bad;
    bad.mode = TurnoverMode::Growth;
    bad.start_fraction = 0.9;
    bad.end_fraction = 0.8;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad.mode = TurnoverMode::Shrinkage;
    CHECK_NOTHROW(bad.validate());
    bad.end_fraction = 1.5;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "leotopo/errors.hpp"
#include "leotopo/rng.hpp"
#include "leotopo/shell.hpp"

using namespace leotopo;

namespace {

ShellConfig shell1() {
    return make_shell_config(72, 22, 550.0, 53.0);
}

// Same-plane separation is a plain chord; serves as the independent check for
// the sweep-based distances.
double chord_km(double radius_km, double angle_deg) {
    return 2.0 * radius_km * std::sin(angle_deg * std::numbers::pi / 360.0);
}

}  // namespace

TEST_CASE("d_los closed form and midpoint-altitude oracle") {
    const ShellConfig config = shell1();
    const double bound = d_los(config);
    // Direct evaluation: 2*sqrt((6371+550)^2 - (6371+80)^2) = 5013.921...
    const double direct = 2.0 * std::sqrt(6921.0 * 6921.0 - 6451.0 * 6451.0);
    CHECK(bound == doctest::Approx(direct).epsilon(1e-12));
    CHECK(bound == doctest::Approx(5013.9).epsilon(1e-4));

    // Geometric check: the chord midpoint at separation D_LoS sits exactly at
    // the atmosphere altitude.
    const double radius = config.orbit_radius_km();
    const double midpoint_radius = std::sqrt(radius * radius - bound * bound / 4.0);
    CHECK(std::abs(midpoint_radius - (config.earth_radius_km + config.atmosphere_km)) < 1e-3);
}

TEST_CASE("d_los rejects grazing and inverted altitudes, grows with h") {
    ShellConfig config = shell1();
    config.altitude_km = 80.0;  // a == h
    CHECK_THROWS_AS(d_los(config), ValidationError);

    const double base = d_los(shell1());
    ShellConfig higher = shell1();
    higher.altitude_km = 600.0;
    CHECK(d_los(higher) > base);
}

TEST_CASE("d_stab picks the binding constraint") {
    ShellConfig config = shell1();
    CHECK(d_stab(config) == doctest::Approx(d_los(config)));  // LoS-limited at 8000 km hw

    config.max_isl_range_km = 1000.0;
    CHECK(d_stab(config) == doctest::Approx(1000.0));

    config.max_isl_range_km = d_los(shell1());
    CHECK(d_stab(config) == doctest::Approx(d_los(shell1())));
}

TEST_CASE("generate_synthetic_shell populates the lattice") {
    const Snapshot full = generate_synthetic_shell(shell1());
    CHECK(full.satellites.size() == 1584);

    ShellConfig single = make_shell_config(1, 1, 550.0, 53.0);
    const Snapshot one = generate_synthetic_shell(single);
    REQUIRE(one.satellites.size() == 1);
    CHECK(one.satellites[0].raan_deg == doctest::Approx(0.0));
    CHECK(one.satellites[0].anomaly_deg == doctest::Approx(0.0));

    ShellConfig toy = make_shell_config(12, 12, 550.0, 53.0);
    toy.phasing_offset_deg = 0.0;
    const Snapshot snapshot = generate_synthetic_shell(toy);
    const auto& sat = snapshot.satellites[3 * 12 + 0];  // plane 3, slot 0
    CHECK(sat.plane_index == 3);
    CHECK(sat.raan_deg == doctest::Approx(90.0));
    CHECK(sat.anomaly_deg == doctest::Approx(0.0));
}

TEST_CASE("position_at geometry") {
    const ShellConfig config = shell1();
    SatelliteState node;
    node.raan_deg = 0.0;
    node.anomaly_deg = 0.0;
    const Eigen::Vector3d at_node = position_at(node, config, 0.0);
    CHECK(at_node.x() == doctest::Approx(config.orbit_radius_km()));
    CHECK(at_node.y() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(at_node.z() == doctest::Approx(0.0).epsilon(1e-12));

    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        SatelliteState sat;
        sat.raan_deg = rng.uniform01() * 360.0;
        sat.anomaly_deg = rng.uniform01() * 360.0;
        const double phase = rng.uniform01() * 360.0;
        CHECK(position_at(sat, config, phase).norm() ==
              doctest::Approx(config.orbit_radius_km()).epsilon(1e-9));

        SatelliteState twin = sat;
        twin.id = sat.id + 1;
        CHECK((position_at(sat, config, phase) - position_at(twin, config, phase)).norm() <
              1e-9);
    }
}

TEST_CASE("instantaneous_distance basics") {
    const ShellConfig config = shell1();
    SatelliteState a;
    SatelliteState b;
    CHECK(instantaneous_distance(a, b, config, 12.0) == doctest::Approx(0.0));

    // Adjacent slots in one plane: constant chord across phases, within 3% of
    // the figure quoted for Shell-1 spacing (~1,950 km).
    b.anomaly_deg = 360.0 / 22.0;
    const double expected = chord_km(config.orbit_radius_km(), 360.0 / 22.0);
    for (const double phase : {0.0, 45.0, 123.0, 301.0}) {
        CHECK(instantaneous_distance(a, b, config, phase) ==
              doctest::Approx(expected).epsilon(1e-9));
    }
    CHECK(std::abs(expected - 1950.0) / 1950.0 < 0.03);

    SatelliteState antipodal;
    antipodal.anomaly_deg = 180.0;
    CHECK(instantaneous_distance(a, antipodal, config, 0.0) ==
          doctest::Approx(2.0 * config.orbit_radius_km()).epsilon(1e-9));
}

TEST_CASE("instantaneous_distance symmetry and bound") {
    const ShellConfig config = shell1();
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        SatelliteState a;
        SatelliteState b;
        a.raan_deg = rng.uniform01() * 360.0;
        a.anomaly_deg = rng.uniform01() * 360.0;
        b.raan_deg = rng.uniform01() * 360.0;
        b.anomaly_deg = rng.uniform01() * 360.0;
        const double phase = rng.uniform01() * 360.0;
        const double ab = instantaneous_distance(a, b, config, phase);
        const double ba = instantaneous_distance(b, a, config, phase);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ab <= 2.0 * config.orbit_radius_km() + 1e-9);
    }
}

TEST_CASE("max_separation on canonical offsets") {
    const ShellConfig config = shell1();
    CHECK(max_separation({0.0, 0.0}, config) == doctest::Approx(0.0));

    const double slot = 360.0 / 22.0;
    CHECK(max_separation({0.0, slot}, config) ==
          doctest::Approx(chord_km(config.orbit_radius_km(), slot)).epsilon(1e-9));
}

TEST_CASE("max_separation pair symmetry") {
    const ShellConfig config = shell1();
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
        const double dr = rng.uniform01() * 360.0;
        const double du = rng.uniform01() * 360.0;
        const double fwd = max_separation({dr, du}, config);
        const double rev = max_separation({wrap_deg(360.0 - dr), wrap_deg(360.0 - du)}, config);
        CHECK(fwd == doctest::Approx(rev).epsilon(1e-9));
    }
}

TEST_CASE("max_separation is offset-intrinsic and bounds snapshots") {
    const ShellConfig config = shell1();
    const PhaseSweep sweep(config);
    Rng rng(17);
    for (int i = 0; i < 40; ++i) {
        const AngularOffset offset{rng.uniform01() * 360.0, rng.uniform01() * 360.0};
        const double canonical = sweep.max_separation(offset);

        // Any concrete pair realizing the offset stays within the sweep value
        // up to the 1-degree sampling error, and never exceeds it by more.
        SatelliteState a;
        a.raan_deg = rng.uniform01() * 360.0;
        a.anomaly_deg = rng.uniform01() * 360.0;
        SatelliteState b;
        b.raan_deg = wrap_deg(a.raan_deg + offset.d_raan_deg);
        b.anomaly_deg = wrap_deg(a.anomaly_deg + offset.d_anomaly_deg);

        double pair_max = 0.0;
        for (int k = 0; k < 360; ++k) {
            pair_max = std::max(pair_max,
                                instantaneous_distance(a, b, config, static_cast<double>(k)));
        }
        CHECK(pair_max <= canonical + 5.0);
        CHECK(pair_max >= canonical - 5.0);

        const double at_phase =
            instantaneous_distance(a, b, config, rng.uniform01() * 360.0);
        CHECK(at_phase <= canonical + 5.0);
    }
}

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "leotopo/errors.hpp"
#include "leotopo/evaluation.hpp"
#include "leotopo/incremental.hpp"
#include "leotopo/io.hpp"
#include "leotopo/lsl.hpp"
#include "leotopo/sa.hpp"
#include "leotopo/stable_links.hpp"
#include "leotopo/topology.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace leotopo;

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (const unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buffer;
}

// Every run drops one manifest: next to single-file outputs, inside output
// directories otherwise.
void write_manifest(const fs::path& where, const std::string& command_line,
                    const std::vector<std::uint64_t>& seeds) {
    json manifest;
    manifest["command_line"] = command_line;
    manifest["config_hash"] = fnv1a(command_line);
    manifest["rng_seeds"] = seeds;
    manifest["version"] = kVersion;
    manifest["timestamp"] = timestamp_utc();
    std::ofstream out(where);
    if (!out) {
        throw IoError("cannot write manifest: " + where.string());
    }
    out << manifest.dump(2) << "\n";
}

fs::path manifest_path_for_file(const fs::path& output_file) {
    fs::path p = output_file;
    p += ".manifest.json";
    return p;
}

std::string join_args(int argc, char** argv) {
    std::string joined;
    for (int i = 0; i < argc; ++i) {
        if (i > 0) {
            joined += ' ';
        }
        joined += argv[i];
    }
    return joined;
}

SurrogateWeights parse_weights(const std::string& text) {
    // Flag order follows the paper-style tuple (alpha_L, alpha_U, alpha_M).
    std::vector<double> parts;
    std::string token;
    std::istringstream stream(text);
    while (std::getline(stream, token, ',')) {
        parts.push_back(std::stod(token));
    }
    if (parts.size() != 3) {
        throw ValidationError("--weights expects three comma-separated values (aL,aU,aM)");
    }
    SurrogateWeights weights;
    weights.alpha_l = parts[0];
    weights.alpha_u = parts[1];
    weights.alpha_m = parts[2];
    weights.validate();
    return weights;
}

std::vector<int> parse_pairs_spec(const std::string& text) {
    // "100", "10..100" (step 10), or "10..100:5".
    std::vector<int> counts;
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        counts.push_back(std::stoi(text));
        return counts;
    }
    const int lo = std::stoi(text.substr(0, dots));
    std::string rest = text.substr(dots + 2);
    int step = 10;
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
        step = std::stoi(rest.substr(colon + 1));
        rest = rest.substr(0, colon);
    }
    const int hi = std::stoi(rest);
    if (lo <= 0 || hi < lo || step <= 0) {
        throw ValidationError("bad --pairs range: " + text);
    }
    for (int v = lo; v <= hi; v += step) {
        counts.push_back(v);
    }
    return counts;
}

struct BuildSpec {
    std::string method;
    int isl_limit = 4;
    int lsl_d = 9;
    std::string weights = "4,1,1";
    long iters = 200000;
    std::uint64_t seed = 1;
};

Topology build_by_method(const BuildSpec& spec, const Snapshot& snapshot,
                         const std::vector<CandidateEdge>& candidates,
                         const Topology* warm_start, const std::string& run_log) {
    if (spec.method == "plus-grid") {
        if (spec.isl_limit != 4) {
            throw ValidationError("plus-grid requires --isl-limit 4");
        }
        return build_plus_grid(snapshot, candidates);
    }
    if (spec.method == "three-isl-grid") {
        if (spec.isl_limit != 3) {
            throw ValidationError("three-isl-grid requires --isl-limit 3");
        }
        return build_three_isl_grid(snapshot, candidates);
    }
    if (spec.method == "lsl") {
        LslParams params;
        params.max_plane_span = spec.lsl_d;
        params.degree_budget = spec.isl_limit;
        return build_lsl(snapshot, candidates, params);
    }
    if (spec.method == "sa") {
        AnnealSchedule sched;
        sched.iterations = spec.iters;
        sched.rng_seed = spec.seed;
        AnnealOptions options;
        std::ofstream log;
        if (!run_log.empty()) {
            log.open(run_log);
            if (!log) {
                throw IoError("cannot open run log: " + run_log);
            }
            log << "iteration,temperature,L,M,U,accepted\n";
            options.observer_stride = std::max<long>(1, spec.iters / 2000);
            options.observer = [&log](const AnnealSample& sample, const Topology&) {
                log << sample.iteration << ',' << sample.temperature << ',' << sample.l << ','
                    << sample.m << ',' << sample.u << ',' << (sample.accepted ? 1 : 0) << "\n";
            };
        }
        return anneal(snapshot, candidates, spec.isl_limit, parse_weights(spec.weights), sched,
                      warm_start, options);
    }
    if (spec.method == "floor") {
        return build_theoretical_floor(snapshot);
    }
    if (spec.method == "floor-stable") {
        return build_theoretical_floor(snapshot, candidates);
    }
    throw ValidationError("unknown method: " + spec.method);
}

int run(int argc, char** argv) {
    CLI::App app{"LEO ISL topology design and evaluation toolkit"};
    app.require_subcommand(1);
    const std::string command_line = join_args(argc, argv);

    auto* gen = app.add_subcommand("gen-shell", "Write a synthetic shell snapshot CSV");
    int gen_planes = 72;
    int gen_per_plane = 22;
    double gen_altitude = 550.0;
    double gen_inclination = 53.0;
    double gen_phasing = std::numeric_limits<double>::quiet_NaN();
    std::string gen_label = "synthetic";
    std::string gen_out;
    gen->add_option("--planes", gen_planes, "Orbital plane count")->required();
    gen->add_option("--per-plane", gen_per_plane, "Satellites per plane")->required();
    gen->add_option("--altitude-km", gen_altitude, "Shell altitude in km");
    gen->add_option("--inclination-deg", gen_inclination, "Inclination in degrees");
    gen->add_option("--phasing-deg", gen_phasing,
                    "Inter-plane anomaly offset (default 360/(planes*per_plane))");
    gen->add_option("--label", gen_label, "Snapshot label");
    gen->add_option("--out", gen_out, "Output snapshot CSV")->required();

    auto* region_cmd = app.add_subcommand("region", "Export the stable-link region as CSV");
    std::string region_snapshot;
    std::string region_out;
    double region_resolution = 1.0;
    region_cmd->add_option("--snapshot", region_snapshot, "Snapshot CSV")->required();
    region_cmd->add_option("--resolution-deg", region_resolution, "Sweep resolution");
    region_cmd->add_option("--out", region_out, "Output CSV")->required();

    auto* build_cmd = app.add_subcommand("build", "Construct a topology for one snapshot");
    BuildSpec bspec;
    std::string build_snapshot;
    std::string build_out;
    std::string build_warm;
    std::string build_run_log;
    build_cmd->add_option("--method", bspec.method,
                          "plus-grid|three-isl-grid|lsl|sa|floor|floor-stable")
        ->required();
    build_cmd->add_option("--snapshot", build_snapshot, "Snapshot CSV")->required();
    build_cmd->add_option("--isl-limit", bspec.isl_limit, "Per-satellite ISL budget");
    build_cmd->add_option("--lsl-d", bspec.lsl_d, "LSL max plane span D");
    build_cmd->add_option("--weights", bspec.weights, "SA weights aL,aU,aM");
    build_cmd->add_option("--iters", bspec.iters, "SA iterations");
    build_cmd->add_option("--seed", bspec.seed, "SA rng seed");
    build_cmd->add_option("--warm-start", build_warm, "Topology CSV to warm-start SA");
    build_cmd->add_option("--run-log", build_run_log, "SA per-iteration log CSV");
    build_cmd->add_option("--out", build_out, "Output topology CSV")->required();

    auto* eval_cmd = app.add_subcommand("evaluate", "Path-quality metrics for a topology");
    std::string eval_topology;
    std::string eval_snapshot;
    std::string eval_out_dir;
    bool eval_with_floor = false;
    bool eval_worst_case = false;
    eval_cmd->add_option("--topology", eval_topology, "Topology CSV")->required();
    eval_cmd->add_option("--snapshot", eval_snapshot, "Snapshot CSV")->required();
    eval_cmd->add_option("--out-dir", eval_out_dir, "Output directory")->required();
    eval_cmd->add_flag("--with-floor", eval_with_floor,
                       "Also compute the theoretical floor for delay stretch");
    eval_cmd->add_flag("--worst-case-delay", eval_worst_case,
                       "Weight delay by worst-case instead of instantaneous distance");

    auto* tp_cmd = app.add_subcommand("throughput", "Max-min fair throughput sweep");
    std::string tp_topology;
    std::string tp_snapshot;
    std::string tp_out_dir;
    std::string tp_pairs = "10..100";
    int tp_trials = 10;
    double tp_capacity = 100.0;
    std::uint64_t tp_seed = 1;
    bool tp_cap_at_demand = false;
    tp_cmd->add_option("--topology", tp_topology, "Topology CSV")->required();
    tp_cmd->add_option("--snapshot", tp_snapshot, "Snapshot CSV")->required();
    tp_cmd->add_option("--pairs", tp_pairs, "Pair counts: N | lo..hi | lo..hi:step");
    tp_cmd->add_option("--trials", tp_trials, "Trials per pair count");
    tp_cmd->add_option("--capacity-gbps", tp_capacity, "Per-direction link capacity");
    tp_cmd->add_option("--seed", tp_seed, "Traffic sampling seed");
    tp_cmd->add_flag("--cap-at-demand", tp_cap_at_demand, "Cap flow rates at their demand");
    tp_cmd->add_option("--out-dir", tp_out_dir, "Output directory")->required();

    auto* turn_cmd =
        app.add_subcommand("gen-turnover", "Write a synthetic daily turnover series");
    std::string turn_snapshot;
    std::string turn_out_dir;
    std::string turn_mode = "shrinkage";
    double turn_start = 1.0;
    double turn_end = 0.8;
    double turn_daily = 1.0;
    int turn_days = 20;
    std::uint64_t turn_seed = 1;
    std::string turn_start_date = "2024-10-01";
    turn_cmd->add_option("--snapshot", turn_snapshot, "Base snapshot CSV")->required();
    turn_cmd->add_option("--mode", turn_mode, "growth|shrinkage");
    turn_cmd->add_option("--start-fraction", turn_start, "Active fraction on day 0");
    turn_cmd->add_option("--end-fraction", turn_end, "Active fraction at the end");
    turn_cmd->add_option("--daily-pct", turn_daily, "Percent of full shell changed per day");
    turn_cmd->add_option("--days", turn_days, "Number of transitions");
    turn_cmd->add_option("--seed", turn_seed, "Sampling seed");
    turn_cmd->add_option("--start-date", turn_start_date, "Date label of day 0 (YYYY-MM-DD)");
    turn_cmd->add_option("--out-dir", turn_out_dir, "Series directory")->required();

    auto* sim_cmd =
        app.add_subcommand("simulate", "Day-by-day topology maintenance over a series");
    std::string sim_series_dir;
    std::string sim_out_dir;
    BuildSpec sim_spec;
    long sim_incr_iters = 100000;
    bool sim_incremental = false;
    int sim_realign_every = 0;
    sim_cmd->add_option("--series-dir", sim_series_dir, "Directory of daily snapshot CSVs")
        ->required();
    sim_cmd->add_option("--method", sim_spec.method, "plus-grid|lsl|sa")->required();
    sim_cmd->add_option("--isl-limit", sim_spec.isl_limit, "Per-satellite ISL budget");
    sim_cmd->add_option("--lsl-d", sim_spec.lsl_d, "LSL max plane span D");
    sim_cmd->add_option("--weights", sim_spec.weights, "SA weights aL,aU,aM");
    sim_cmd->add_option("--iters", sim_spec.iters, "SA iterations for day-1 / recompute");
    sim_cmd->add_option("--incr-iters", sim_incr_iters, "SA iterations for incremental days");
    sim_cmd->add_option("--seed", sim_spec.seed, "SA rng seed");
    sim_cmd->add_flag("--incremental", sim_incremental,
                      "Update the previous day instead of rebuilding from scratch");
    sim_cmd->add_option("--realign-every", sim_realign_every,
                        "Recompute from scratch every k days (0 = never)");
    sim_cmd->add_option("--out-dir", sim_out_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        ShellConfig config =
            make_shell_config(gen_planes, gen_per_plane, gen_altitude, gen_inclination);
        if (!std::isnan(gen_phasing)) {
            config.phasing_offset_deg = gen_phasing;
            config.validate();
        }
        const Snapshot snapshot = generate_synthetic_shell(config, gen_label);
        save_snapshot(snapshot, gen_out);
        write_manifest(manifest_path_for_file(gen_out), command_line, {});
        std::cout << "wrote " << gen_out << " (" << snapshot.satellites.size()
                  << " satellites)\n";
        return 0;
    }

    if (region_cmd->parsed()) {
        const Snapshot snapshot = load_snapshot(region_snapshot);
        const StableRegion region = compute_stable_region(snapshot.config, region_resolution);
        write_region_csv(region, region_out);
        write_manifest(manifest_path_for_file(region_out), command_line, {});
        std::cout << "wrote " << region_out << " (" << region.admissible_count()
                  << " admissible cells, d_stab " << region.d_stab_km << " km)\n";
        return 0;
    }

    if (build_cmd->parsed()) {
        std::vector<std::string> warnings;
        const Snapshot snapshot = load_snapshot(build_snapshot, &warnings);
        for (const auto& warning : warnings) {
            std::cerr << "warning: " << warning << "\n";
        }
        StableRegionCache cache;
        const std::vector<CandidateEdge> candidates =
            bspec.method == "floor"
                ? std::vector<CandidateEdge>{}
                : build_stable_link_set(snapshot, cache.get(snapshot.config));
        std::optional<Topology> warm;
        if (!build_warm.empty()) {
            warm = load_topology_csv(build_warm, snapshot);
        }
        const Topology topology = build_by_method(bspec, snapshot, candidates,
                                                  warm ? &*warm : nullptr, build_run_log);
        write_topology_csv(topology, build_out, snapshot.label);
        write_manifest(manifest_path_for_file(build_out), command_line, {bspec.seed});
        std::cout << "wrote " << build_out << " (" << topology.edge_count() << " edges, "
                  << provenance_name(topology.provenance()) << ")\n";
        if (!topology.is_connected()) {
            std::cerr << "warning: topology is disconnected ("
                      << topology.connected_components().size() << " components)\n";
        }
        return 0;
    }

    if (eval_cmd->parsed()) {
        const Snapshot snapshot = load_snapshot(eval_snapshot);
        const Topology topology = load_topology_csv(eval_topology, snapshot);
        fs::create_directories(eval_out_dir);
        EvalOptions options;
        options.use_worst_case_for_delay = eval_worst_case;
        if (eval_with_floor) {
            const Topology floor = build_theoretical_floor(snapshot);
            options.floor_delay_ms = shortest_path_metrics(floor, snapshot).avg_delay_ms;
        }
        const EvalReport report = shortest_path_metrics(topology, snapshot, options);
        const fs::path dir(eval_out_dir);
        MetricsRow row{provenance_name(topology.provenance()),
                       topology.budget_enforced() ? topology.degree_budget() : -1, report};
        write_metrics_csv({&row, 1}, (dir / "metrics.csv").string());
        write_delay_histogram_csv(report, (dir / "delay_hist.csv").string());
        write_hop_histogram_csv(report, (dir / "hop_hist.csv").string());
        write_manifest(dir / "manifest.json", command_line, {});
        std::cout << "avg_delay_ms=" << report.avg_delay_ms << " avg_hops=" << report.avg_hops
                  << " worst_hops=" << report.worst_hops
                  << " disconnected_pairs=" << report.disconnected_pairs << "\n";
        return 0;
    }

    if (tp_cmd->parsed()) {
        const Snapshot snapshot = load_snapshot(tp_snapshot);
        const Topology topology = load_topology_csv(tp_topology, snapshot);
        const std::vector<int> counts = parse_pairs_spec(tp_pairs);
        MaxMinOptions options;
        options.link_capacity_gbps = tp_capacity;
        options.cap_at_demand = tp_cap_at_demand;
        const auto series = throughput_sweep(topology, counts, tp_trials, tp_seed, options);
        fs::create_directories(tp_out_dir);
        const fs::path dir(tp_out_dir);
        write_throughput_csv(series, (dir / "throughput.csv").string());
        const TrafficMatrix matrix = sample_traffic_matrix(topology, counts.back(), tp_seed);
        write_flows_per_link_csv(flows_per_link(topology, matrix),
                                 (dir / "flows_per_link.csv").string());
        write_manifest(dir / "manifest.json", command_line, {tp_seed});
        for (const auto& point : series) {
            std::cout << point.pairs << " pairs: " << point.mean_aggregate_tbps
                      << " Tbps mean aggregate\n";
        }
        return 0;
    }

    if (turn_cmd->parsed()) {
        const Snapshot base = load_snapshot(turn_snapshot);
        TurnoverScenario scenario;
        scenario.mode = turn_mode == "growth" ? TurnoverMode::Growth : TurnoverMode::Shrinkage;
        scenario.start_fraction = turn_start;
        scenario.end_fraction = turn_end;
        scenario.daily_change_pct = turn_daily;
        scenario.rng_seed = turn_seed;
        auto series = generate_turnover_series(base, scenario, turn_days);
        fs::create_directories(turn_out_dir);
        int year = 0, month = 0, day = 0;
        if (std::sscanf(turn_start_date.c_str(), "%d-%d-%d", &year, &month, &day) != 3) {
            throw ValidationError("--start-date must be YYYY-MM-DD");
        }
        std::tm tm{};
        tm.tm_year = year - 1900;
        tm.tm_mon = month - 1;
        tm.tm_mday = day;
        tm.tm_hour = 12;
        std::time_t t0 = timegm(&tm);
        for (std::size_t i = 0; i < series.size(); ++i) {
            const std::time_t t = t0 + static_cast<std::time_t>(i) * 86400;
            char name[32];
            std::strftime(name, sizeof(name), "%Y-%m-%d", std::gmtime(&t));
            series[i].label = name;
            save_snapshot(series[i],
                          (fs::path(turn_out_dir) / (std::string(name) + ".csv")).string());
        }
        write_manifest(fs::path(turn_out_dir) / "manifest.json", command_line, {turn_seed});
        std::cout << "wrote " << series.size() << " snapshots to " << turn_out_dir << "\n";
        return 0;
    }

    if (sim_cmd->parsed()) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(sim_series_dir)) {
            if (entry.path().extension() == ".csv") {
                files.push_back(entry.path());
            }
        }
        if (files.empty()) {
            throw IoError("no snapshot CSVs in " + sim_series_dir);
        }
        std::sort(files.begin(), files.end());
        fs::create_directories(sim_out_dir);
        const fs::path dir(sim_out_dir);

        std::ofstream breakage(dir / "breakage.csv");
        breakage << "date,method,isl_limit,selected,broken,rate_pct\n";
        std::ofstream metrics(dir / "metrics_series.csv");
        metrics << "date,method,isl_limit,avg_delay_ms,avg_hops,worst_hops,"
                   "disconnected_pairs,churn\n";

        StableRegionCache cache;
        std::optional<Snapshot> prev_snapshot;
        std::optional<Topology> prev_topology;
        int day_index = 0;
        for (const auto& file : files) {
            Snapshot snapshot = load_snapshot(file.string());
            const std::vector<CandidateEdge> candidates =
                build_stable_link_set(snapshot, cache.get(snapshot.config));
            Topology topology = [&]() {
                const bool realign = sim_realign_every > 0 && day_index > 0 &&
                                     day_index % sim_realign_every == 0;
                if (!sim_incremental || !prev_topology || realign ||
                    sim_spec.method == "plus-grid") {
                    return build_by_method(sim_spec, snapshot, candidates, nullptr, "");
                }
                DayTransition transition{*prev_snapshot, *prev_topology, snapshot, candidates};
                if (sim_spec.method == "lsl") {
                    LslParams params;
                    params.max_plane_span = sim_spec.lsl_d;
                    params.degree_budget = sim_spec.isl_limit;
                    return update_lsl(transition, params);
                }
                AnnealSchedule sched;
                sched.iterations = sim_incr_iters;
                sched.rng_seed = sim_spec.seed;
                return update_sa(transition, parse_weights(sim_spec.weights), sched);
            }();

            if (prev_topology) {
                DayTransition transition{*prev_snapshot, *prev_topology, snapshot, candidates};
                const BreakageReport report = measure_breakage(transition);
                breakage << snapshot.label << ',' << sim_spec.method << ',' << sim_spec.isl_limit
                         << ',' << report.selected_prev << ',' << report.broken << ','
                         << report.breakage_rate_pct << "\n";
            }
            const EvalReport report = shortest_path_metrics(topology, snapshot);
            const int churn = prev_topology ? edge_churn(*prev_topology, topology) : 0;
            metrics << snapshot.label << ',' << sim_spec.method << ',' << sim_spec.isl_limit
                    << ',' << report.avg_delay_ms << ',' << report.avg_hops << ','
                    << report.worst_hops << ',' << report.disconnected_pairs << ',' << churn
                    << "\n";
            write_topology_csv(topology,
                               (dir / ("topology_" + snapshot.label + ".csv")).string(),
                               snapshot.label);
            prev_snapshot = std::move(snapshot);
            prev_topology = std::move(topology);
            ++day_index;
        }
        write_manifest(dir / "manifest.json", command_line, {sim_spec.seed});
        std::cout << "simulated " << files.size() << " days into " << sim_out_dir << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const InfeasibleDeploymentError& e) {
        std::cerr << "infeasible deployment: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

#include "fvd/clusters.hpp"
#include "fvd/errors.hpp"
#include "fvd/mps.hpp"
#include "fvd/runner.hpp"
#include "fvd/snapshot.hpp"
#include "fvd/state_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kConfigError = 1, kConvergenceFailure = 2, kNumericalFault = 3 };

// Flags that override keys of the JSON run config.
struct ConfigFlags {
    std::string config_path;
    std::optional<int> rows, cols, chi_q, chi_dmrg, stride, threads, shots;
    std::optional<double> J, g, h0, t_max, dt, svd_min;
    std::vector<double> hq, sample_times;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir, initial_state, state_file;

    void attach(CLI::App *app) {
        app->add_option("-c,--config", config_path, "JSON run config")->check(CLI::ExistingFile);
        app->add_option("--rows", rows);
        app->add_option("--cols", cols);
        app->add_option("--J", J);
        app->add_option("--g", g);
        app->add_option("--h0", h0);
        app->add_option("--hq", hq, "post-quench field(s)");
        app->add_option("--initial-state", initial_state, "product_down|product_up|fv_ground|excited|random_entropy|file");
        app->add_option("--t-max", t_max);
        app->add_option("--dt", dt);
        app->add_option("--chi-q", chi_q);
        app->add_option("--chi-dmrg", chi_dmrg);
        app->add_option("--svd-min", svd_min);
        app->add_option("--observable-stride", stride);
        app->add_option("--sample-times", sample_times);
        app->add_option("--shots", shots);
        app->add_option("--seed", seed, "sampling seed");
        app->add_option("--output-dir", output_dir);
        app->add_option("--state-file", state_file);
        app->add_option("--threads", threads);
    }

    [[nodiscard]] fvd::RunConfig resolve() const {
        json j = json::object();
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            try {
                j = json::parse(f);
            } catch (const json::exception &e) {
                throw fvd::ConfigError(fmt::format("{}: {}", config_path, e.what()));
            }
        }
        const auto set = [&](const char *key, const auto &v) {
            if (v) j[key] = *v;
        };
        set("rows", rows);
        set("cols", cols);
        set("J", J);
        set("g", g);
        set("h0", h0);
        set("t_max", t_max);
        set("dt", dt);
        set("chi_q", chi_q);
        set("chi_dmrg", chi_dmrg);
        set("svd_min", svd_min);
        set("observable_stride", stride);
        set("output_dir", output_dir);
        set("state_file", state_file);
        set("threads", threads);
        if (!hq.empty()) j["hq"] = hq;
        if (initial_state) {
            if (j.contains("initial_state") && j["initial_state"].is_object()) j["initial_state"]["type"] = *initial_state;
            else j["initial_state"] = *initial_state;
        }
        if (!sample_times.empty() || shots || seed) {
            json &s = j["sampling"];
            if (!s.is_object()) s = json::object();
            if (!sample_times.empty()) s["times"] = sample_times;
            if (shots) s["n_shots"] = *shots;
            if (seed) s["seed"] = *seed;
        }
        return fvd::RunConfig::from_json(j);
    }
};

int cmd_prepare(const ConfigFlags &flags) {
    const fvd::RunConfig cfg = flags.resolve();
    const std::string out = cfg.state_file.empty() ? (fs::path(cfg.output_dir) / "initial_state.mps").string() : cfg.state_file;
    if (const auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
    const fvd::PreparedState p = fvd::prepare_initial_state(cfg, cfg.initial_state, cfg.geometry());
    fvd::write_state_file(out, fvd::StateFile{cfg.geometry(), cfg.pre_params(), p.state, p.energy});
    fmt::print("{} {} energy={:.12f} entropy={:.6f} max_bond={}{}\n", out, p.label, p.energy, p.entropy,
               p.state.max_bond(), p.flipped ? " (flipped)" : "");
    return kOk;
}

int cmd_evolve(const ConfigFlags &flags) {
    const fvd::RunConfig cfg = flags.resolve();
    const json m = fvd::run_experiment(cfg);
    fmt::print("{} outputs written to {} (config {})\n", m["outputs"].size(), cfg.output_dir,
               m["config_hash"].get<std::string>().substr(0, 12));
    return kOk;
}

int cmd_sweep(const ConfigFlags &flags) {
    const fvd::RunConfig cfg = flags.resolve();
    const auto rows = fvd::sweep_fpt(cfg);
    const auto failed = std::count_if(rows.begin(), rows.end(), [](const auto &r) { return r.error.has_value(); });
    fmt::print("{} points, {} failed, table in {}\n", rows.size(), failed, (fs::path(cfg.output_dir) / "fpt.csv").string());
    return kOk;
}

int cmd_sample(const std::string &state_path, int n_shots, std::uint64_t seed, double time, const std::string &out) {
    const fvd::StateFile f = fvd::read_state_file(state_path);
    const fvd::CounterRng base(seed);
    auto shots = fvd::draw_shots(f.state, f.geom, n_shots, base, 0);
    fvd::write_snapshot_file(out, fvd::SnapshotFile{f.geom.rows(), f.geom.cols(), time, seed, std::move(shots)});
    fmt::print("{} shots written to {}\n", n_shots, out);
    return kOk;
}

int cmd_analyze(std::vector<std::string> files, const std::string &out_dir, const std::string &reference) {
    const fvd::ClusterReference ref = fvd::parse_cluster_reference(reference);
    fs::create_directories(out_dir);
    std::vector<fvd::TimedShots> slices;
    std::optional<fvd::LatticeGeometry> geom;
    for (const auto &path : files) {
        fvd::SnapshotFile f = fvd::read_snapshot_file(path);
        const fvd::LatticeGeometry g(f.rows, f.cols);
        if (geom && !(*geom == g)) throw fvd::ConfigError(fmt::format("{} has a different geometry", path));
        geom = g;
        slices.push_back({f.time, std::move(f.shots)});
    }
    std::stable_sort(slices.begin(), slices.end(), [](const auto &a, const auto &b) { return a.time < b.time; });
    for (const auto &s : slices) {
        const auto stats = fvd::accumulate_stats(s.shots, *geom, ref, s.time);
        const std::string tag = fmt::format("{:.6g}", s.time);
        const fs::path dir(out_dir);
        fvd::write_n_of_s_csv((dir / fmt::format("n_of_s_t{}.csv", tag)).string(), stats);
        fvd::write_p_smax_csv((dir / fmt::format("p_smax_t{}.csv", tag)).string(), stats);
        fvd::write_hamming_csv((dir / fmt::format("hamming_t{}.csv", tag)).string(), stats);
    }
    fvd::write_pmax_heatmap_csv((fs::path(out_dir) / "pmax_heatmap.csv").string(), fvd::pmax_heatmap(slices, *geom, ref));
    fmt::print("analyzed {} snapshot file(s) into {}\n", slices.size(), out_dir);
    return kOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"False-vacuum-decay quench simulator for the 2D transverse-field longitudinal Ising model"};
    app.require_subcommand(1);

    ConfigFlags prepare_flags, evolve_flags, sweep_flags;
    auto *prepare = app.add_subcommand("prepare", "prepare the initial state and write a state file");
    prepare_flags.attach(prepare);
    auto *evolve = app.add_subcommand("evolve", "prepare, evolve, sample and analyze one quench");
    evolve_flags.attach(evolve);
    auto *sweep = app.add_subcommand("sweep-fpt", "first-passage times over hq, geometries and initial states");
    sweep_flags.attach(sweep);

    std::string state_path, shots_out = "shots.txt";
    int n_shots = 800;
    std::uint64_t sample_seed = 0;
    double sample_time = 0.0;
    auto *sample = app.add_subcommand("sample", "draw projective Z snapshots from a state file");
    sample->add_option("--state", state_path, "state file")->required()->check(CLI::ExistingFile);
    sample->add_option("--shots", n_shots);
    sample->add_option("--seed", sample_seed);
    sample->add_option("--time", sample_time, "time label written to the header");
    sample->add_option("-o,--out", shots_out);

    std::vector<std::string> shot_files;
    std::string analyze_dir = "clusters", reference = "down";
    auto *analyze = app.add_subcommand("analyze", "cluster statistics from snapshot files");
    analyze->add_option("files", shot_files, "snapshot files")->required()->check(CLI::ExistingFile);
    analyze->add_option("--output-dir", analyze_dir);
    analyze->add_option("--reference", reference, "down|up");

    std::string figure, repro_dir;
    int scale = 3, repro_threads = 1;
    auto *repro = app.add_subcommand("reproduce", "desk-scale analogue of a figure pipeline");
    repro->add_option("figure", figure, "fig2|fig3|fig4|fig7")->required();
    repro->add_option("--scale", scale, "linear lattice size");
    repro->add_option("--output-dir", repro_dir);
    repro->add_option("--threads", repro_threads);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*prepare) return cmd_prepare(prepare_flags);
        if (*evolve) return cmd_evolve(evolve_flags);
        if (*sweep) return cmd_sweep(sweep_flags);
        if (*sample) return cmd_sample(state_path, n_shots, sample_seed, sample_time, shots_out);
        if (*analyze) return cmd_analyze(shot_files, analyze_dir, reference);
        if (*repro) {
            const std::string dir = repro_dir.empty() ? fmt::format("reproduce_{}", figure) : repro_dir;
            fvd::reproduce(figure, scale, dir, repro_threads);
            fmt::print("{} written to {}\n", figure, dir);
            return kOk;
        }
    } catch (const fvd::ConvergenceError &e) {
        fmt::print(stderr, "convergence failure: {}\n", e.what());
        return kConvergenceFailure;
    } catch (const fvd::NumericalFault &e) {
        fmt::print(stderr, "numerical fault: {}\n", e.what());
        return kNumericalFault;
    } catch (const std::exception &e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kConfigError;
    }
    return kConfigError;
}

#include "fvd/runner.hpp"

#include "fvd/errors.hpp"
#include "fvd/mpo.hpp"
#include "fvd/snapshot.hpp"
#include "fvd/state_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace fvd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char *kVersion = "0.1.0";

void reject_unknown(const json &j, const std::set<std::string> &allowed, const std::string &where) {
    if (!j.is_object()) throw ConfigError(fmt::format("{} must be an object", where));
    for (const auto &[key, _] : j.items())
        if (!allowed.contains(key)) throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
}

template <class T> void read(const json &j, const char *key, T &out) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(fmt::format("bad value for '{}': {}", key, e.what()));
    }
}

const char *kind_name(InitialKind k) {
    switch (k) {
    case InitialKind::ProductDown: return "product_down";
    case InitialKind::ProductUp: return "product_up";
    case InitialKind::FvGround: return "fv_ground";
    case InitialKind::Excited: return "excited";
    case InitialKind::RandomEntropy: return "random_entropy";
    case InitialKind::File: return "file";
    }
    return "?";
}

InitialKind parse_kind(const std::string &s) {
    for (auto k : {InitialKind::ProductDown, InitialKind::ProductUp, InitialKind::FvGround, InitialKind::Excited,
                   InitialKind::RandomEntropy, InitialKind::File})
        if (s == kind_name(k)) return k;
    throw ConfigError(fmt::format("unknown initial_state type '{}'", s));
}

const char *reference_name(FvReference r) {
    switch (r) {
    case FvReference::None: return "none";
    case FvReference::Down: return "down";
    case FvReference::Up: return "up";
    }
    return "?";
}

FvReference parse_reference(const std::string &s) {
    if (s == "none") return FvReference::None;
    if (s == "down") return FvReference::Down;
    if (s == "up") return FvReference::Up;
    throw ConfigError(fmt::format("unknown fv_reference '{}'", s));
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)> &fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    const auto workers = std::min<std::size_t>(n, static_cast<std::size_t>(threads));
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
}

std::string time_tag(double t) { return fmt::format("{:.6g}", t); }

json output_entry(const fs::path &root, const fs::path &file) {
    return {{"path", fs::relative(file, root).generic_string()},
            {"sha256", sha256_file(file.string())},
            {"bytes", fs::file_size(file)}};
}

void write_json(const fs::path &path, const json &j) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
    f << j.dump(2) << '\n';
}

double central_entropy(const MpsState &psi) {
    return psi.size() > 1 ? half_chain_entropy(psi, central_cut(psi.size())) : 0.0;
}

} // namespace

std::string sha256_hex(const std::string &bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    std::string out;
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
}

std::string sha256_file(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot read {}", path));
    std::ostringstream ss;
    ss << f.rdbuf();
    return sha256_hex(ss.str());
}

// ---------------------------------------------------------------- config

std::string InitialStateSpec::label() const {
    if (kind == InitialKind::Excited) return fmt::format("excited_{}", k);
    return kind_name(kind);
}

json InitialStateSpec::to_json() const {
    json j{{"type", kind_name(kind)}};
    switch (kind) {
    case InitialKind::Excited: j["k"] = k; break;
    case InitialKind::RandomEntropy:
        j["chi"] = chi;
        j["tol"] = tol;
        j["seed"] = seed;
        if (target) j["target"] = *target;
        break;
    case InitialKind::File: j["path"] = path; break;
    default: break;
    }
    if (fv_reference != FvReference::None) j["fv_reference"] = reference_name(fv_reference);
    return j;
}

InitialStateSpec InitialStateSpec::from_json(const json &j) {
    InitialStateSpec s;
    if (j.is_string()) {
        s.kind = parse_kind(j.get<std::string>());
        return s;
    }
    reject_unknown(j, {"type", "k", "target", "chi", "tol", "seed", "fv_reference", "path"}, "initial_state");
    std::string type = "product_down";
    read(j, "type", type);
    s.kind = parse_kind(type);
    read(j, "k", s.k);
    if (j.contains("target")) s.target = j["target"].get<double>();
    read(j, "chi", s.chi);
    read(j, "tol", s.tol);
    read(j, "seed", s.seed);
    read(j, "path", s.path);
    std::string ref = "none";
    read(j, "fv_reference", ref);
    s.fv_reference = parse_reference(ref);
    return s;
}

QuenchProtocol RunConfig::protocol(double h_q) const {
    return QuenchProtocol::make(J, g, h0, h_q, t_max, dt, observable_stride);
}

void RunConfig::validate() const {
    try {
        (void)geometry();
        for (const auto &[r, c] : geometries) (void)LatticeGeometry(r, c);
        if (hq.empty()) throw ConfigError("hq must not be empty");
        for (double h : hq) protocol(h).validate();
        dmrg.validate();
        evolution.validate();
        const auto check = [](const InitialStateSpec &s) {
            if (s.kind == InitialKind::Excited && s.k < 1) throw ConfigError("excited state index k must be >= 1");
            if (s.kind == InitialKind::RandomEntropy && (s.chi < 1 || !(s.tol > 0.0)))
                throw ConfigError("random_entropy needs chi >= 1 and tol > 0");
            if (s.kind == InitialKind::File && !fs::exists(s.path))
                throw ConfigError(fmt::format("state file '{}' does not exist", s.path));
        };
        check(initial_state);
        for (const auto &s : initial_states) check(s);
        if (sampling) {
            if (sampling->n_shots < 1) throw ConfigError("sampling.n_shots must be >= 1");
            for (double t : sampling->times)
                if (!(t >= 0.0 && t <= t_max + 1e-12)) throw ConfigError(fmt::format("sampling time {} outside [0, t_max]", t));
        }
        if (threads < 1) throw ConfigError("threads must be >= 1");
        if (!(fpt_threshold > 0.0 && fpt_threshold < 1.0)) throw ConfigError("fpt_threshold must lie in (0, 1)");
    } catch (const InputDomainError &e) {
        throw ConfigError(e.what());
    }
}

RunConfig RunConfig::from_json(const json &j) {
    reject_unknown(j,
                   {"rows", "cols", "J", "g", "h0", "hq", "initial_state", "chi_dmrg", "dmrg", "t_max", "dt", "chi_q",
                    "svd_min", "krylov_tol", "observable_stride", "sampling", "cluster_reference", "output_dir",
                    "state_file", "threads", "geometries", "initial_states", "fpt_threshold"},
                   "config");
    RunConfig c;
    read(j, "rows", c.rows);
    read(j, "cols", c.cols);
    read(j, "J", c.J);
    read(j, "g", c.g);
    read(j, "h0", c.h0);
    if (const auto it = j.find("hq"); it != j.end()) {
        if (it->is_number()) c.hq = {it->get<double>()};
        else read(j, "hq", c.hq);
    }
    if (j.contains("initial_state")) c.initial_state = InitialStateSpec::from_json(j["initial_state"]);
    read(j, "chi_dmrg", c.dmrg.chi_dmrg);
    if (const auto it = j.find("dmrg"); it != j.end()) {
        reject_unknown(*it, {"n_sweeps_max", "n_sweeps_min", "energy_tol", "penalty_weight", "seed"}, "dmrg");
        read(*it, "n_sweeps_max", c.dmrg.n_sweeps_max);
        read(*it, "n_sweeps_min", c.dmrg.n_sweeps_min);
        read(*it, "energy_tol", c.dmrg.energy_tol);
        read(*it, "penalty_weight", c.dmrg.penalty_weight);
        read(*it, "seed", c.dmrg.seed);
    }
    read(j, "t_max", c.t_max);
    read(j, "dt", c.dt);
    read(j, "chi_q", c.evolution.chi_q);
    read(j, "svd_min", c.evolution.svd_min);
    c.dmrg.svd_min = c.evolution.svd_min;
    read(j, "krylov_tol", c.evolution.krylov.tol);
    read(j, "observable_stride", c.observable_stride);
    if (const auto it = j.find("sampling"); it != j.end()) {
        reject_unknown(*it, {"times", "n_shots", "seed"}, "sampling");
        SamplingSpec s;
        read(*it, "times", s.times);
        read(*it, "n_shots", s.n_shots);
        read(*it, "seed", s.seed);
        c.sampling = s;
    }
    std::string ref = "down";
    read(j, "cluster_reference", ref);
    try {
        c.cluster_reference = parse_cluster_reference(ref);
    } catch (const InputDomainError &e) {
        throw ConfigError(e.what());
    }
    read(j, "output_dir", c.output_dir);
    read(j, "state_file", c.state_file);
    read(j, "threads", c.threads);
    if (const auto it = j.find("geometries"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("geometries must be a list of [rows, cols]");
        for (const auto &g : *it) {
            if (!g.is_array() || g.size() != 2) throw ConfigError("geometries must be a list of [rows, cols]");
            c.geometries.emplace_back(g[0].get<int>(), g[1].get<int>());
        }
    }
    if (const auto it = j.find("initial_states"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("initial_states must be a list");
        for (const auto &s : *it) c.initial_states.push_back(InitialStateSpec::from_json(s));
    }
    read(j, "fpt_threshold", c.fpt_threshold);
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(fmt::format("cannot open config file {}", path));
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception &e) {
        throw ConfigError(fmt::format("{}: {}", path, e.what()));
    }
    return from_json(j);
}

json RunConfig::to_json() const {
    json j{{"rows", rows},
           {"cols", cols},
           {"J", J},
           {"g", g},
           {"h0", h0},
           {"hq", hq},
           {"initial_state", initial_state.to_json()},
           {"chi_dmrg", dmrg.chi_dmrg},
           {"dmrg",
            {{"n_sweeps_max", dmrg.n_sweeps_max},
             {"n_sweeps_min", dmrg.n_sweeps_min},
             {"energy_tol", dmrg.energy_tol},
             {"penalty_weight", dmrg.penalty_weight},
             {"seed", dmrg.seed}}},
           {"t_max", t_max},
           {"dt", dt},
           {"chi_q", evolution.chi_q},
           {"svd_min", evolution.svd_min},
           {"krylov_tol", evolution.krylov.tol},
           {"observable_stride", observable_stride},
           {"cluster_reference", cluster_reference == ClusterReference::Down ? "down" : "up"},
           {"output_dir", output_dir},
           {"threads", threads},
           {"fpt_threshold", fpt_threshold}};
    if (sampling) j["sampling"] = {{"times", sampling->times}, {"n_shots", sampling->n_shots}, {"seed", sampling->seed}};
    if (!state_file.empty()) j["state_file"] = state_file;
    if (!geometries.empty()) {
        json g = json::array();
        for (const auto &[r, c] : geometries) g.push_back({r, c});
        j["geometries"] = g;
    }
    if (!initial_states.empty()) {
        json s = json::array();
        for (const auto &spec : initial_states) s.push_back(spec.to_json());
        j["initial_states"] = s;
    }
    return j;
}

std::string RunConfig::hash() const {
    json j = to_json();
    j.erase("output_dir");
    j.erase("threads");
    return sha256_hex(j.dump());
}

// ---------------------------------------------------------------- prepare

namespace {

InitialStateSpec spec_of(InitialKind kind, int k = 1) {
    InitialStateSpec s;
    s.kind = kind;
    s.k = k;
    return s;
}

} // namespace

PreparedState prepare_initial_state(const RunConfig &cfg, const InitialStateSpec &spec, const LatticeGeometry &geom) {
    const ModelParams pre = cfg.pre_params();
    const Mpo h0 = hamiltonian_mpo(geom, pre);
    PreparedState out;
    out.label = spec.label();

    const auto fv_ground = [&]() {
        DmrgResult r = ground_state(geom, pre, cfg.dmrg);
        MpsState psi = std::move(r.state);
        bool flipped = false;
        if (spec.fv_reference != FvReference::None) {
            const bool want_up = spec.fv_reference == FvReference::Up;
            if ((magnetization(psi) > 0.0) != want_up) {
                psi = flip_all_spins(psi);
                flipped = true;
            }
        }
        return std::pair{std::move(psi), flipped};
    };

    switch (spec.kind) {
    case InitialKind::ProductDown: out.state = product_state(geom, false); break;
    case InitialKind::ProductUp: out.state = product_state(geom, true); break;
    case InitialKind::FvGround: std::tie(out.state, out.flipped) = fv_ground(); break;
    case InitialKind::Excited: {
        auto states = excited_states(geom, pre, cfg.dmrg, spec.k);
        out.state = std::move(states.at(static_cast<size_t>(spec.k)).state);
        break;
    }
    case InitialKind::RandomEntropy: {
        double target = 0.0;
        if (spec.target) {
            target = *spec.target;
        } else {
            target = central_entropy(fv_ground().first);
        }
        CounterRng rng(spec.seed);
        out.state = random_mps_with_entropy(geom.size(), spec.chi, target, spec.tol, rng);
        break;
    }
    case InitialKind::File: {
        StateFile f = read_state_file(spec.path);
        if (!(f.geom == geom)) throw ConfigError(fmt::format("state file {} is for a {} lattice", spec.path, f.geom.label()));
        out.state = std::move(f.state);
        break;
    }
    }
    out.state.normalize();
    out.energy = expect_mpo(out.state, h0).real();
    out.entropy = central_entropy(out.state);
    return out;
}

// ---------------------------------------------------------------- run

json run_experiment(const RunConfig &cfg) {
    cfg.validate();
    const auto started = std::chrono::steady_clock::now();
    const fs::path root(cfg.output_dir);
    fs::create_directories(root);
    const LatticeGeometry geom = cfg.geometry();

    json manifest{{"program", "fvdsim"},
                  {"version", kVersion},
                  {"config", cfg.to_json()},
                  {"config_hash", cfg.hash()},
                  {"seeds",
                   {{"sampling", cfg.sampling ? cfg.sampling->seed : 0},
                    {"dmrg", cfg.dmrg.seed},
                    {"initial_state", cfg.initial_state.seed}}},
                  {"outputs", json::array()},
                  {"runs", json::array()}};

    std::string stage = "prepare";
    const auto finish = [&](const char *status) {
        manifest["status"] = status;
        manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        write_json(root / "manifest.json", manifest);
    };

    PreparedState init;
    try {
        if (!cfg.state_file.empty() && fs::exists(cfg.state_file)) {
            InitialStateSpec from_file = spec_of(InitialKind::File);
            from_file.path = cfg.state_file;
            init = prepare_initial_state(cfg, from_file, geom);
        } else {
            init = prepare_initial_state(cfg, cfg.initial_state, geom);
        }
        const fs::path state_path = root / "initial_state.mps";
        write_state_file(state_path.string(), StateFile{geom, cfg.pre_params(), init.state, init.energy});
        manifest["outputs"].push_back(output_entry(root, state_path));
        manifest["initial_state"] = {{"label", init.label},
                                     {"energy", init.energy},
                                     {"entropy", init.entropy},
                                     {"flipped", init.flipped},
                                     {"max_bond", init.state.max_bond()}};
    } catch (const std::exception &e) {
        manifest["failed_stage"] = stage;
        manifest["error"] = e.what();
        finish("failed");
        throw;
    }

    const std::size_t n_runs = cfg.hq.size();
    std::vector<json> runs(n_runs);
    std::vector<std::exception_ptr> errors(n_runs);
    std::vector<std::string> failed_stage(n_runs);

    parallel_for(n_runs, cfg.threads, [&](std::size_t i) {
        const double h_q = cfg.hq[i];
        const fs::path dir = n_runs == 1 ? root : root / fmt::format("hq_{}", i);
        json run{{"hq", h_q}, {"dir", fs::relative(dir, root).generic_string()}, {"outputs", json::array()}};
        std::string st = "evolve";
        try {
            fs::create_directories(dir);
            std::optional<ShotSchedule> schedule;
            if (cfg.sampling) schedule = ShotSchedule{cfg.sampling->times, cfg.sampling->n_shots, cfg.sampling->seed};
            const TrajectoryRecord rec = evolve_quench(init.state, geom, cfg.protocol(h_q), cfg.evolution, schedule);
            const fs::path traj = dir / "trajectory.csv";
            rec.write_csv(traj.string());
            run["outputs"].push_back(output_entry(root, traj));

            double norm_drift = 0.0, energy_drift = 0.0;
            for (size_t k = 0; k < rec.times.size(); ++k) {
                norm_drift = std::max(norm_drift, std::abs(rec.norm[k] - 1.0));
                energy_drift = std::max(energy_drift, std::abs(rec.energy[k] - rec.energy[0]));
            }
            run["diagnostics"] = {{"max_bond", *std::max_element(rec.max_bond.begin(), rec.max_bond.end())},
                                  {"discarded_weight", rec.discarded_weight.back()},
                                  {"norm_drift", norm_drift},
                                  {"energy_drift", energy_drift},
                                  {"p_ret_final", rec.p_ret.back()}};

            st = "sample";
            std::vector<TimedShots> slices;
            for (const ShotSet &set : rec.snapshots) {
                const fs::path file = dir / fmt::format("snapshots_t{}.txt", time_tag(set.time));
                write_snapshot_file(file.string(), SnapshotFile{geom.rows(), geom.cols(), set.time, cfg.sampling->seed, set.shots});
                run["outputs"].push_back(output_entry(root, file));
                slices.push_back({set.time, set.shots});
            }

            st = "analyze";
            for (const TimedShots &s : slices) {
                const ClusterStats stats = accumulate_stats(s.shots, geom, cfg.cluster_reference, s.time);
                const std::string tag = time_tag(s.time);
                const fs::path a = dir / fmt::format("n_of_s_t{}.csv", tag);
                const fs::path b = dir / fmt::format("p_smax_t{}.csv", tag);
                const fs::path c = dir / fmt::format("hamming_t{}.csv", tag);
                write_n_of_s_csv(a.string(), stats);
                write_p_smax_csv(b.string(), stats);
                write_hamming_csv(c.string(), stats);
                for (const auto &p : {a, b, c}) run["outputs"].push_back(output_entry(root, p));
            }
            if (!slices.empty()) {
                const fs::path hm = dir / "pmax_heatmap.csv";
                write_pmax_heatmap_csv(hm.string(), pmax_heatmap(slices, geom, cfg.cluster_reference));
                run["outputs"].push_back(output_entry(root, hm));
            }
            run["status"] = "ok";
        } catch (...) {
            errors[i] = std::current_exception();
            failed_stage[i] = st;
            run["status"] = "failed";
            run["failed_stage"] = st;
            try {
                std::rethrow_exception(errors[i]);
            } catch (const std::exception &e) {
                run["error"] = e.what();
            } catch (...) {
                run["error"] = "unknown error";
            }
        }
        runs[i] = std::move(run);
    });

    for (auto &r : runs) {
        for (const auto &o : r["outputs"]) manifest["outputs"].push_back(o);
        manifest["runs"].push_back(std::move(r));
    }
    for (std::size_t i = 0; i < n_runs; ++i) {
        if (!errors[i]) continue;
        manifest["failed_stage"] = failed_stage[i];
        manifest["error"] = manifest["runs"][i]["error"];
        finish("failed");
        std::rethrow_exception(errors[i]);
    }
    finish("ok");
    return manifest;
}

// ---------------------------------------------------------------- fpt sweep

FptResult fpt_for_state(const MpsState &psi0, const LatticeGeometry &geom, const QuenchProtocol &q,
                        const EvolutionConfig &evo, double threshold) {
    q.validate();
    MpsState start = psi0;
    start.normalize();
    const Mpo h = hamiltonian_mpo(geom, q.post);
    TdvpEngine engine(start, h, evo);
    std::vector<double> t{0.0}, p{1.0};
    const auto n_steps = static_cast<std::int64_t>(std::llround(q.t_max / q.dt));
    for (std::int64_t s = 1; s <= n_steps; ++s) {
        engine.step(q.dt);
        const double pr = return_probability(start, engine.state());
        if (!std::isfinite(pr)) throw NumericalFault("non-finite return probability");
        t.push_back(static_cast<double>(s) * q.dt);
        p.push_back(pr);
        if (pr <= threshold) break;
    }
    FptResult r = first_passage_time(t, p, threshold);
    r.h_q = q.post.h;
    r.geometry = geom.label();
    return r;
}

std::vector<FptRow> sweep_fpt(const RunConfig &cfg) {
    cfg.validate();
    const fs::path root(cfg.output_dir);
    fs::create_directories(root);

    std::vector<LatticeGeometry> geoms;
    if (cfg.geometries.empty()) geoms.push_back(cfg.geometry());
    for (const auto &[r, c] : cfg.geometries) geoms.emplace_back(r, c);
    std::vector<InitialStateSpec> specs = cfg.initial_states;
    if (specs.empty()) specs.push_back(cfg.initial_state);
    std::vector<double> hqs = cfg.hq;
    std::stable_sort(hqs.begin(), hqs.end());

    // Preparation does not depend on hq.
    const std::size_t n_prep = geoms.size() * specs.size();
    std::vector<std::optional<PreparedState>> prepared(n_prep);
    std::vector<std::string> prep_error(n_prep);
    parallel_for(n_prep, cfg.threads, [&](std::size_t i) {
        try {
            prepared[i] = prepare_initial_state(cfg, specs[i % specs.size()], geoms[i / specs.size()]);
        } catch (const std::exception &e) {
            prep_error[i] = fmt::format("prepare: {}", e.what());
        }
    });

    const std::size_t n_points = hqs.size() * n_prep;
    std::vector<FptRow> rows(n_points);
    std::vector<bool> done(n_points, false);
    std::size_t next_to_write = 0;
    std::mutex mu;

    const fs::path csv_path = root / "fpt.csv";
    std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
    if (!csv) throw std::runtime_error(fmt::format("cannot open {} for writing", csv_path.string()));
    csv << "hq,geometry,initial_state,t_fpt,threshold,reached\n" << std::flush;

    const auto format_row = [](const FptRow &r) {
        std::string t = r.error ? "failed" : r.result.t_fpt ? fmt::format("{:.10g}", *r.result.t_fpt) : "not_reached";
        std::string reached = r.error ? "failed" : r.result.reached() ? "true" : "false";
        return fmt::format("{:.10g},{},{},{},{:.17g},{}\n", r.hq, r.geometry, r.initial_state, t, r.result.threshold, reached);
    };

    parallel_for(n_points, cfg.threads, [&](std::size_t i) {
        const std::size_t prep = i % n_prep;
        FptRow row;
        row.hq = hqs[i / n_prep];
        row.geometry = geoms[prep / specs.size()].label();
        row.initial_state = specs[prep % specs.size()].label();
        row.result.threshold = cfg.fpt_threshold;
        row.result.h_q = row.hq;
        row.result.geometry = row.geometry;
        if (!prepared[prep]) {
            row.error = prep_error[prep];
        } else {
            try {
                row.result = fpt_for_state(prepared[prep]->state, geoms[prep / specs.size()], cfg.protocol(row.hq),
                                           cfg.evolution, cfg.fpt_threshold);
            } catch (const std::exception &e) {
                row.error = e.what();
            }
        }
        const std::scoped_lock lock(mu);
        rows[i] = std::move(row);
        done[i] = true;
        while (next_to_write < n_points && done[next_to_write]) csv << format_row(rows[next_to_write++]) << std::flush;
    });
    return rows;
}

// ---------------------------------------------------------------- figures

std::vector<std::string> figure_ids() { return {"fig2", "fig3", "fig4", "fig7"}; }

json reproduce(const std::string &figure_id, int scale, const std::string &output_dir, int threads) {
    if (scale < 1 || scale > 7) throw ConfigError("scale must be in 1..7");
    const auto ids = figure_ids();
    if (std::find(ids.begin(), ids.end(), figure_id) == ids.end())
        throw ConfigError(fmt::format("unknown figure id '{}' (expected one of {})", figure_id, fmt::join(ids, ", ")));

    RunConfig base;
    base.rows = base.cols = scale;
    base.J = 1.0;
    base.g = 1.0;
    base.h0 = 0.1;
    base.hq = {-0.2};
    base.dt = 0.05;
    base.t_max = 5.0;
    base.evolution.chi_q = 64;
    base.dmrg.chi_dmrg = 64;
    base.threads = threads;

    const fs::path root(output_dir);
    fs::create_directories(root);
    json summary{{"figure", figure_id}, {"scale", scale}, {"runs", json::array()}};

    const auto run_states = [&](const RunConfig &cfg, const std::vector<InitialStateSpec> &specs) {
        for (const auto &spec : specs) {
            RunConfig c = cfg;
            c.initial_state = spec;
            c.output_dir = (root / spec.label()).string();
            const json m = run_experiment(c);
            summary["runs"].push_back({{"initial_state", spec.label()}, {"dir", spec.label()}, {"config_hash", m["config_hash"]}});
        }
    };

    const InitialStateSpec psi0 = spec_of(InitialKind::ProductDown);
    const InitialStateSpec fv = spec_of(InitialKind::FvGround);

    if (figure_id == "fig2") {
        run_states(base, {psi0, fv});
    } else if (figure_id == "fig3") {
        RunConfig c = base;
        c.t_max = 10.0;
        c.hq.clear();
        for (int i = 0; i <= 8; ++i) c.hq.push_back(-2.5 + 0.25 * i);
        c.geometries = {{scale, scale}, {scale * scale, 1}};
        c.initial_states = {psi0, fv};
        c.output_dir = root.string();
        const auto rows = sweep_fpt(c);
        summary["points"] = rows.size();
        summary["config_hash"] = c.hash();
    } else if (figure_id == "fig4") {
        RunConfig c = base;
        c.hq = {-0.2, -1.6};
        SamplingSpec s;
        for (int i = 0; i <= static_cast<int>(std::lround(c.t_max / 0.5)); ++i) s.times.push_back(0.5 * i);
        s.n_shots = 800;
        s.seed = 2024;
        c.sampling = s;
        const InitialStateSpec excited = spec_of(InitialKind::Excited, 1);
        InitialStateSpec random = spec_of(InitialKind::RandomEntropy);
        random.chi = 16;
        random.tol = 0.1;
        random.seed = 7;
        run_states(c, {fv, psi0, excited, random});
    } else if (figure_id == "fig7") {
        run_states(base, {fv, spec_of(InitialKind::Excited, 1), spec_of(InitialKind::Excited, 2)});
    }
    write_json(root / "reproduce.json", summary);
    return summary;
}

} // namespace fvd

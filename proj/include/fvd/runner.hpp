#pragma once

#include "fvd/clusters.hpp"
#include "fvd/evolve.hpp"
#include "fvd/groundstate.hpp"
#include "fvd/lattice.hpp"
#include "fvd/model.hpp"
#include "fvd/mps.hpp"
#include "fvd/observables.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fvd {

enum class InitialKind { ProductDown, ProductUp, FvGround, Excited, RandomEntropy, File };

/// Optional polarization the FV state must have; a mismatching DMRG ground
/// state is replaced by its global spin flip (the ground state of H(-h0)).
enum class FvReference { None, Down, Up };

struct InitialStateSpec {
    InitialKind kind = InitialKind::ProductDown;
    int k = 1;                    // excited: index of the state above the ground state
    std::optional<double> target; // random_entropy: empty means match the FV ground state
    int chi = 16;                 // random_entropy bond dimension
    double tol = 0.1;             // random_entropy matching tolerance (nats)
    std::uint64_t seed = 1;       // random_entropy
    FvReference fv_reference = FvReference::None;
    std::string path;             // file: state file to load

    [[nodiscard]] std::string label() const;
    [[nodiscard]] nlohmann::json to_json() const;
    static InitialStateSpec from_json(const nlohmann::json &j);
};

struct SamplingSpec {
    std::vector<double> times;
    int n_shots = 800;
    std::uint64_t seed = 0;
};

struct RunConfig {
    int rows = 3;
    int cols = 3;
    double J = 1.0;
    double g = 1.0;
    double h0 = 0.1;
    std::vector<double> hq{-0.2};
    InitialStateSpec initial_state;
    DmrgConfig dmrg;
    double t_max = 1.0;
    double dt = 0.05;
    int observable_stride = 1;
    EvolutionConfig evolution;
    std::optional<SamplingSpec> sampling;
    ClusterReference cluster_reference = ClusterReference::Down;
    std::string output_dir = "fvd_out";
    std::string state_file; // write the prepared state here (prepare) or reuse it (evolve)
    int threads = 1;

    // sweep-fpt only
    std::vector<std::pair<int, int>> geometries;
    std::vector<InitialStateSpec> initial_states;
    double fpt_threshold = kFptThreshold;

    [[nodiscard]] LatticeGeometry geometry() const { return {rows, cols}; }
    [[nodiscard]] ModelParams pre_params() const { return {J, g, h0}; }
    [[nodiscard]] QuenchProtocol protocol(double h_q) const;
    void validate() const;

    /// Unknown keys are rejected.
    static RunConfig from_json(const nlohmann::json &j);
    static RunConfig load(const std::string &path);
    [[nodiscard]] nlohmann::json to_json() const;
    /// SHA-256 of the canonical JSON without output_dir and threads.
    [[nodiscard]] std::string hash() const;
};

struct PreparedState {
    MpsState state;
    std::string label;
    double energy = 0.0;  // <H(pre)>
    double entropy = 0.0; // central cut
    bool flipped = false;
};

[[nodiscard]] PreparedState prepare_initial_state(const RunConfig &cfg, const InitialStateSpec &spec,
                                                  const LatticeGeometry &geom);

/// prepare -> evolve -> sample -> analyze for every hq, writing outputs and
/// manifest.json under cfg.output_dir. On a stage failure the manifest is
/// still written, naming the stage, and the exception is rethrown.
nlohmann::json run_experiment(const RunConfig &cfg);

struct FptRow {
    double hq = 0.0;
    std::string geometry;
    std::string initial_state;
    FptResult result;
    std::optional<std::string> error;
};

/// One row per (hq, geometry, initial state), sorted by hq, written to
/// output_dir/fpt.csv with each row flushed as soon as all rows before it
/// are done. Failed points are recorded and the sweep continues.
std::vector<FptRow> sweep_fpt(const RunConfig &cfg);

/// P_ret(t) for one quench, stopping once the threshold is crossed.
[[nodiscard]] FptResult fpt_for_state(const MpsState &psi0, const LatticeGeometry &geom, const QuenchProtocol &q,
                                      const EvolutionConfig &evo, double threshold);

[[nodiscard]] std::vector<std::string> figure_ids();
/// Desk-scale analogue of a figure pipeline on a scale x scale lattice.
nlohmann::json reproduce(const std::string &figure_id, int scale, const std::string &output_dir, int threads = 1);

[[nodiscard]] std::string sha256_hex(const std::string &bytes);
[[nodiscard]] std::string sha256_file(const std::string &path);

} // namespace fvd

#pragma once

#include "fvd/krylov.hpp"
#include "fvd/lattice.hpp"
#include "fvd/model.hpp"
#include "fvd/mpo.hpp"
#include "fvd/mps.hpp"
#include "fvd/snapshot.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fvd {

/// Truncation and integrator knobs for real-time evolution. The time grid
/// (dt, t_max, observable stride) comes from the QuenchProtocol.
struct EvolutionConfig {
    int chi_q = 64;
    double svd_min = kDefaultSvdMin;
    ExpmOptions krylov{.max_krylov = 30, .tol = 1e-12};

    void validate() const;
};

struct ShotSchedule {
    std::vector<double> times;
    int n_shots = 800;
    std::uint64_t seed = 0;
};

struct ShotSet {
    double time = 0.0;
    std::int64_t step = 0;
    std::vector<Snapshot> shots;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<double> mz;
    std::vector<double> ztot_var;
    std::vector<double> p_ret;
    std::vector<double> energy;
    std::vector<double> norm;
    std::vector<int> max_bond;
    std::vector<double> discarded_weight; // cumulative
    std::vector<ShotSet> snapshots;

    /// Columns: time, mz, ztot_var, p_ret, energy, max_bond, discarded_weight.
    void write_csv(const std::string &path) const;
    [[nodiscard]] std::string csv() const;
};

/// Two-site TDVP integrator with a symmetric left-right / right-left sweep per
/// step (second order in dt). Each local update is a Krylov exponential
/// through the MPO environments, followed by an SVD truncation to
/// (chi_q, svd_min). Truncation keeps the pre-truncation norm so that norm
/// drift measures only integrator error.
class TdvpEngine {
  public:
    TdvpEngine(MpsState psi, const Mpo &h, EvolutionConfig cfg);

    void step(double dt);
    [[nodiscard]] const MpsState &state() const noexcept { return psi_; }
    [[nodiscard]] double discarded_weight() const noexcept { return discarded_; }

  private:
    void sweep_right(double tau);
    void sweep_left(double tau);
    [[nodiscard]] Tensor3 evolve_local(int k, int span, const MpoSite &w, const Tensor3 &x, double tau) const;
    void split(int k, const Tensor3 &theta, bool center_right);

    const Mpo &h_;
    MpsState psi_;
    EvolutionConfig cfg_;
    std::vector<MpoSite> merged_;
    std::vector<Env> left_, right_;
    double discarded_ = 0.0;
};

/// Evolve psi0 under protocol.post, recording observables every
/// observable_stride steps and drawing shots at the scheduled times.
/// Sampling reads a copy of the state, so the trajectory is unaffected.
[[nodiscard]] TrajectoryRecord evolve_quench(const MpsState &psi0, const LatticeGeometry &geom,
                                             const QuenchProtocol &protocol, const EvolutionConfig &cfg,
                                             const std::optional<ShotSchedule> &shots = std::nullopt);

/// |<psi0|psit>|^2 for normalized states.
[[nodiscard]] double return_probability(const MpsState &psi0, const MpsState &psit);

/// Draw n shots from psi using per-shot substreams (time_index, shot).
[[nodiscard]] std::vector<Snapshot> draw_shots(const MpsState &psi, const LatticeGeometry &geom, int n_shots,
                                               const CounterRng &base, std::uint64_t time_index);

} // namespace fvd

#pragma once

#include "fvd/krylov.hpp"
#include "fvd/lattice.hpp"
#include "fvd/model.hpp"
#include "fvd/mpo.hpp"
#include "fvd/mps.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fvd {

struct DmrgConfig {
    int chi_dmrg = 64;
    int n_sweeps_max = 50;
    int n_sweeps_min = 2;
    double energy_tol = 1e-10;
    /// Weight of |<lower|psi>|^2 penalties for excited states; <= 0 means 10 |E0|.
    double penalty_weight = 0.0;
    double svd_min = kDefaultSvdMin;
    /// Seed for the random starting states of excited-state solves.
    std::uint64_t seed = 0x5eed;
    LanczosOptions lanczos{.max_krylov = 32, .max_restarts = 20, .tol = 1e-11};

    void validate() const;
};

struct DmrgResult {
    MpsState state;
    double energy = 0.0;   // <psi|H|psi>
    double variance = 0.0; // <H^2> - <H>^2
    std::vector<double> half_sweep_energies;
    double max_discarded = 0.0;
    int sweeps = 0;
};

/// Two-site DMRG for the lowest state of `h`, optionally orthogonal (by
/// penalty) to `lower`. Penalized objective: <H> + w sum_i |<lower_i|psi>|^2.
[[nodiscard]] DmrgResult run_dmrg(const Mpo &h, MpsState init, const DmrgConfig &cfg,
                                  const std::vector<MpsState> &lower = {}, double penalty_weight = 0.0);

/// Ground state of the lattice Hamiltonian. The default start is the product
/// state polarized along sign(h) (all down for h <= 0), which selects the
/// Z2-broken branch favoured by the field.
[[nodiscard]] DmrgResult ground_state(const LatticeGeometry &geom, const ModelParams &p, const DmrgConfig &cfg,
                                      std::optional<MpsState> init = std::nullopt);

/// Ground state followed by the next `k` states, each penalized against all
/// lower ones. Returns k+1 results with non-decreasing energies.
[[nodiscard]] std::vector<DmrgResult> excited_states(const LatticeGeometry &geom, const ModelParams &p,
                                                     const DmrgConfig &cfg, int k);

} // namespace fvd

#pragma once

#include "fvd/lattice.hpp"
#include "fvd/model.hpp"
#include "fvd/tensor.hpp"

#include <vector>

namespace fvd {

/// Matrix-product operator over a chain. Boundary channel dimensions are 1.
class Mpo {
  public:
    Mpo() = default;
    explicit Mpo(std::vector<MpoSite> sites);

    [[nodiscard]] int size() const noexcept { return static_cast<int>(sites_.size()); }
    [[nodiscard]] const MpoSite &operator[](int k) const { return sites_[static_cast<size_t>(k)]; }
    [[nodiscard]] int max_bond() const noexcept;

    /// Dense 2^N x 2^N matrix with basis index sum_k s_k 2^k. Small N only.
    [[nodiscard]] Matrix to_dense() const;

  private:
    std::vector<MpoSite> sites_;
};

/// Exact MPO of a coupling list via a finite-state machine: one channel per
/// open Z string, so snake-induced long-range vertical bonds are encoded
/// without approximation. Channel count at a bond is the number of sites to
/// its left that still have a partner to its right (at most 2*cols - 1 for a
/// snake-ordered lattice).
[[nodiscard]] Mpo mpo_from_couplings(const CouplingList &terms);

[[nodiscard]] Mpo hamiltonian_mpo(const LatticeGeometry &geom, const ModelParams &p);

/// sum_i Z_i
[[nodiscard]] Mpo ztot_mpo(int n_sites);
/// (sum_i Z_i)^2 as a bond-dimension-3 MPO.
[[nodiscard]] Mpo ztot_squared_mpo(int n_sites);

} // namespace fvd

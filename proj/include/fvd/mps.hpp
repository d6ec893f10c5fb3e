#pragma once

#include "fvd/lattice.hpp"
#include "fvd/mpo.hpp"
#include "fvd/rng.hpp"
#include "fvd/snapshot.hpp"
#include "fvd/tensor.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace fvd {

inline constexpr double kDefaultSvdMin = 1e-10;

/// Finite matrix-product state with open boundaries. Site tensors are
/// (left bond) x 2 x (right bond); boundary bonds have dimension 1.
///
/// When `center()` is set to k, tensors left of k are left isometries and
/// tensors right of k are right isometries. Operations that mutate tensors
/// directly must keep that metadata honest (or reset it).
class MpsState {
  public:
    MpsState() = default;
    explicit MpsState(std::vector<Tensor3> tensors, std::optional<int> center = std::nullopt, int chi_max = 256,
                      double svd_min = kDefaultSvdMin);

    [[nodiscard]] int size() const noexcept { return static_cast<int>(tensors_.size()); }
    [[nodiscard]] const Tensor3 &tensor(int k) const { return tensors_.at(static_cast<size_t>(k)); }
    [[nodiscard]] Tensor3 &tensor(int k) { return tensors_.at(static_cast<size_t>(k)); }
    [[nodiscard]] const std::vector<Tensor3> &tensors() const noexcept { return tensors_; }

    [[nodiscard]] std::optional<int> center() const noexcept { return center_; }
    void set_center(std::optional<int> c) noexcept { center_ = c; }

    [[nodiscard]] int chi_max() const noexcept { return chi_max_; }
    [[nodiscard]] double svd_min() const noexcept { return svd_min_; }
    void set_truncation(int chi_max, double svd_min);

    /// Bond dimensions between site k and k+1, k = 0..N-2.
    [[nodiscard]] std::vector<int> bond_dims() const;
    [[nodiscard]] int max_bond() const;

    /// Move the orthogonality center to site k with exact QR steps.
    void move_center(int k);
    [[nodiscard]] double norm() const;
    void normalize();

    /// Largest deviation from the isometry conditions implied by center().
    [[nodiscard]] double isometry_error() const;

  private:
    void left_orthonormalize(int k);
    void right_orthonormalize(int k);

    std::vector<Tensor3> tensors_;
    std::optional<int> center_;
    int chi_max_ = 256;
    double svd_min_ = kDefaultSvdMin;
};

/// Product state; `up[k]` gives the spin at chain site k.
[[nodiscard]] MpsState product_state(const std::vector<std::uint8_t> &up);
[[nodiscard]] MpsState product_state(const LatticeGeometry &geom, bool all_up);

/// <a|b>
[[nodiscard]] cplx overlap(const MpsState &a, const MpsState &b);

/// <psi|O_site|psi> / <psi|psi> for a Pauli operator.
[[nodiscard]] double expect_local(const MpsState &psi, Pauli op, int site);
/// <psi| prod_k O_k |psi> / <psi|psi> for a string of one-site operators on distinct sites.
[[nodiscard]] cplx expect_string(const MpsState &psi, const std::vector<std::pair<int, Pauli>> &ops);
/// <psi|W|psi> / <psi|psi>
[[nodiscard]] cplx expect_mpo(const MpsState &psi, const Mpo &w);

struct ZtotMoments {
    double first;  // <S^z_tot>
    double second; // <(S^z_tot)^2>
    [[nodiscard]] double variance() const noexcept { return second - first * first; }
};
[[nodiscard]] ZtotMoments expect_ztot_moments(const MpsState &psi);

/// Schmidt values across the cut that leaves `cut` sites on the left (1 <= cut < N).
[[nodiscard]] RealVector schmidt_values(const MpsState &psi, int cut);
/// Von Neumann entropy (natural log) across that cut.
[[nodiscard]] double half_chain_entropy(const MpsState &psi, int cut);
[[nodiscard]] inline int central_cut(int n_sites) noexcept { return n_sites / 2; }

struct TruncationReport {
    std::vector<double> discarded; // per bond, k = 0..N-2
    double total_discarded = 0.0;
};

/// Compress to (chi_max, svd_min) with one canonical sweep; result has center 0 and unit norm.
[[nodiscard]] std::pair<MpsState, TruncationReport> truncate(const MpsState &psi, int chi_max, double svd_min);

/// Random MPS built from Gaussian tensors, bond dims min(chi, 2^k, 2^(N-k)), normalized, center 0.
[[nodiscard]] MpsState random_mps(int n_sites, int chi, CounterRng &rng);

/// Random MPS whose central-cut entropy is within `tol` of the target. The
/// Schmidt spectrum at the central cut is moved along a path from the flat
/// spectrum through the random one to a single value until the entropy matches.
[[nodiscard]] MpsState random_mps_with_entropy(int n_sites, int chi, double target_entropy, double tol,
                                               CounterRng &rng);

/// Exact sequential sampler for the Born distribution |<s|psi>|^2. Holds a
/// right-canonical copy, so it is read-only and can be shared across threads
/// as long as each thread owns its rng.
class MpsSampler {
  public:
    explicit MpsSampler(const MpsState &psi);
    [[nodiscard]] std::vector<std::uint8_t> sample(CounterRng &rng) const;
    [[nodiscard]] int size() const noexcept { return state_.size(); }

  private:
    MpsState state_;
};

[[nodiscard]] Snapshot sample_snapshot(const MpsState &psi, const LatticeGeometry &geom, CounterRng &rng);

} // namespace fvd

namespace fvd {

/// Exact MPO-MPS product; bond dimensions multiply.
[[nodiscard]] MpsState apply_mpo(const Mpo &w, const MpsState &psi);
/// <W^2> - <W>^2 for a Hermitian MPO.
[[nodiscard]] double mpo_variance(const MpsState &psi, const Mpo &w);
/// <O_k> for every site in one pass.
[[nodiscard]] std::vector<double> local_expectations(const MpsState &psi, Pauli op);
/// prod_k X_k |psi>, which maps the ground state of H(h) to that of H(-h).
[[nodiscard]] MpsState flip_all_spins(const MpsState &psi);

} // namespace fvd

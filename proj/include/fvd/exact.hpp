#pragma once

#include "fvd/krylov.hpp"
#include "fvd/lattice.hpp"
#include "fvd/model.hpp"
#include "fvd/mps.hpp"
#include "fvd/tensor.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fvd {

inline constexpr int kDenseMaxSites = 20;
inline constexpr int kDenseFullSolveMaxSites = 9;

/// State vector over 2^N basis states. Bit k of the basis index is the spin
/// at chain site k, 0 = down.
struct DenseState {
    int n_sites = 0;
    Vector amp;

    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(amp.size()); }
};

[[nodiscard]] DenseState dense_product_state(const std::vector<std::uint8_t> &up);
[[nodiscard]] DenseState dense_state_from_mps(const MpsState &psi);

/// Sparse Hamiltonian acting by bit manipulation: a diagonal part plus X flips.
class DenseHamiltonian {
  public:
    explicit DenseHamiltonian(const CouplingList &terms);

    [[nodiscard]] int n_sites() const noexcept { return n_; }
    [[nodiscard]] std::size_t dim() const noexcept { return std::size_t{1} << n_; }
    [[nodiscard]] const Eigen::VectorXd &diagonal() const noexcept { return diag_; }

    [[nodiscard]] Vector apply(const Vector &v) const;
    [[nodiscard]] LinearOp as_operator() const;
    /// Explicit real-symmetric matrix, N <= 12.
    [[nodiscard]] Eigen::MatrixXd to_matrix() const;

  private:
    int n_;
    Eigen::VectorXd diag_;
    std::vector<FieldTerm> x_;
};

[[nodiscard]] DenseHamiltonian dense_hamiltonian(const LatticeGeometry &geom, const ModelParams &p);

/// exp(-i H t) by full eigendecomposition for small N, Krylov otherwise.
class DenseEvolver {
  public:
    explicit DenseEvolver(const DenseHamiltonian &h, ExpmOptions krylov = {.max_krylov = 40, .tol = 1e-13});

    [[nodiscard]] DenseState evolve(const DenseState &psi, double t) const;

  private:
    const DenseHamiltonian &h_;
    ExpmOptions krylov_;
    std::optional<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>> eig_;
};

/// States at each time of the grid, all evolved from psi at t = 0.
[[nodiscard]] std::vector<DenseState> dense_evolve(const DenseState &psi, const DenseHamiltonian &h,
                                                   const std::vector<double> &t_grid);

struct DenseEigenpair {
    double energy;
    DenseState state;
    double residual;
};

/// Lowest k eigenpairs in ascending order, residual <= 1e-10 each.
[[nodiscard]] std::vector<DenseEigenpair> dense_eigs(const DenseHamiltonian &h, int k);

[[nodiscard]] std::vector<double> born_probabilities(const DenseState &psi);

[[nodiscard]] cplx dense_overlap(const DenseState &a, const DenseState &b);
[[nodiscard]] double dense_expect_local(const DenseState &psi, Pauli op, int site);
[[nodiscard]] double dense_energy(const DenseState &psi, const DenseHamiltonian &h);
[[nodiscard]] ZtotMoments dense_ztot_moments(const DenseState &psi);
[[nodiscard]] double dense_entropy(const DenseState &psi, int cut);
[[nodiscard]] double dense_return_probability(const DenseState &psi0, const DenseState &psit);

} // namespace fvd

#pragma once

#include "fvd/lattice.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fvd {

/// H = -J sum_<ij> Z_i Z_j - g sum_i X_i - h sum_i Z_i, with Pauli operators
/// (eigenvalues +-1). J > 0 is ferromagnetic.
struct ModelParams {
    double J = 1.0;
    double g = 1.0;
    double h = 0.0;

    void validate() const;
    bool operator==(const ModelParams &) const = default;
};

/// Sudden quench of the longitudinal field h0 -> hq at fixed J, g.
struct QuenchProtocol {
    ModelParams pre;
    ModelParams post;
    double t_max = 1.0;
    double dt = 0.05;
    int observable_stride = 1;

    static QuenchProtocol make(double J, double g, double h0, double hq, double t_max, double dt,
                               int observable_stride = 1);
    void validate() const;
};

struct ZZTerm {
    int i;
    int j;
    double weight;
};

struct FieldTerm {
    int site;
    double weight;
};

/// Explicit term list of the Hamiltonian on a lattice. ZZ weights are -J,
/// X weights -g, Z weights -h.
struct CouplingList {
    int n_sites = 0;
    std::vector<ZZTerm> zz;
    std::vector<FieldTerm> x;
    std::vector<FieldTerm> z;

    [[nodiscard]] std::size_t size() const noexcept { return zz.size() + x.size() + z.size(); }

    /// Diagonal matrix element on a computational basis state, `up[k]` = spin at chain site k.
    [[nodiscard]] double classical_energy(std::span<const std::uint8_t> up) const;
};

[[nodiscard]] CouplingList hamiltonian_terms(const LatticeGeometry &geom, const ModelParams &p);

// Bubble energetics. sigma is the domain-wall tension, delta_eps the energy
// density gained per unit area (2D) or length (1D) of true vacuum.
struct BubbleParams {
    double sigma = 1.0;
    double delta_eps = 1.0;

    void validate() const;
};

/// 2 pi R sigma - pi R^2 delta_eps.
[[nodiscard]] double bubble_energy_2d(const BubbleParams &b, double radius);
[[nodiscard]] double bubble_energy_2d_derivative(const BubbleParams &b, double radius);
/// Stationary point of the 2D functional: sigma / delta_eps.
[[nodiscard]] double critical_radius(const BubbleParams &b);
/// Barrier height E(R_c) = pi sigma^2 / delta_eps.
[[nodiscard]] double nucleation_barrier(const BubbleParams &b);

/// 2 sigma - L delta_eps; monotonically decreasing, no barrier.
[[nodiscard]] double bubble_energy_1d(const BubbleParams &b, double length);
[[nodiscard]] double bubble_energy_1d_derivative(const BubbleParams &b, double length);

} // namespace fvd

#pragma once

#include "fvd/tensor.hpp"

#include <functional>

namespace fvd {

/// Hermitian linear map y = A x on flat complex vectors.
using LinearOp = std::function<Vector(const Vector &)>;

struct EigenPair {
    double value = 0.0;
    Vector vector;
    double residual = 0.0;
    int matvecs = 0;
};

struct LanczosOptions {
    int max_krylov = 40; // Krylov dimension per restart
    int max_restarts = 50;
    double tol = 1e-12;  // residual norm ||A v - lambda v||
};

/// Lowest eigenpair of a Hermitian operator by restarted Lanczos with full
/// reorthogonalization, started from `start`. Vectors in `deflate` (assumed
/// orthonormal) are projected out of the search space.
[[nodiscard]] EigenPair lanczos_lowest(const LinearOp &op, const Vector &start, const LanczosOptions &opt,
                                       const std::vector<Vector> &deflate = {});

struct ExpmOptions {
    int max_krylov = 40;
    double tol = 1e-12;
};

/// exp(-i t A) v for Hermitian A, by Lanczos projection. The step is split
/// internally until the Krylov error estimate falls below tol.
[[nodiscard]] Vector expm_krylov(const LinearOp &op, const Vector &v, double t, const ExpmOptions &opt = {});

} // namespace fvd

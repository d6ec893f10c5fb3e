#pragma once

#include "fvd/exact.hpp"
#include "fvd/lattice.hpp"
#include "fvd/mps.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace fvd {

/// Site-averaged <Z>, normalized by the site count.
[[nodiscard]] double magnetization(const MpsState &psi);
[[nodiscard]] double magnetization(const DenseState &psi);

struct ZtotFluctuation {
    double variance;  // <Z_tot^2> - <Z_tot>^2
    double qfi_proxy; // 4 * variance
};

[[nodiscard]] ZtotFluctuation ztot_fluctuation(const MpsState &psi);
[[nodiscard]] ZtotFluctuation ztot_fluctuation(const DenseState &psi);

inline const double kFptThreshold = std::exp(-4.0);

struct FptResult {
    double h_q = 0.0;
    std::optional<double> t_fpt; // empty when the threshold is never reached
    double threshold = kFptThreshold;
    std::string geometry;

    [[nodiscard]] bool reached() const noexcept { return t_fpt.has_value(); }
};

/// First time p_ret <= threshold, interpolated linearly in (t, ln p_ret)
/// between the bracketing samples.
[[nodiscard]] FptResult first_passage_time(const std::vector<double> &t, const std::vector<double> &p_ret,
                                           double threshold = kFptThreshold);

} // namespace fvd

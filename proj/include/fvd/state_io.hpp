#pragma once

#include "fvd/lattice.hpp"
#include "fvd/model.hpp"
#include "fvd/mps.hpp"

#include <string>

namespace fvd {

/// A prepared state with the parameters it was prepared for.
struct StateFile {
    LatticeGeometry geom{1, 1};
    ModelParams params;
    MpsState state;
    double energy = 0.0;
};

/// Binary format, little-endian: magic "FVDMPS01", header (rows, cols, J, g,
/// h, chi_max, svd_min, center or -1, energy, n_sites), then per site
/// (dl, d, dr) and dl*d*dr complex doubles in tensor storage order.
void write_state_file(const std::string &path, const StateFile &file);
[[nodiscard]] StateFile read_state_file(const std::string &path);

} // namespace fvd

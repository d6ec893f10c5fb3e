#pragma once

#include "fvd/lattice.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fvd {

/// One projective S^z measurement outcome. `up` is indexed by chain site.
struct Snapshot {
    int rows = 1;
    int cols = 1;
    std::vector<std::uint8_t> up;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(up.size()); }
    [[nodiscard]] int up_count() const noexcept;
    [[nodiscard]] bool matches(const LatticeGeometry &geom) const noexcept;

    /// Row-major lattice bit string: character r*cols + c is site (r, c), '1' = up.
    [[nodiscard]] std::string to_bitstring(const LatticeGeometry &geom) const;
    static Snapshot from_bitstring(const LatticeGeometry &geom, const std::string &bits);

    bool operator==(const Snapshot &) const = default;
};

/// Snapshot file: '#'-prefixed header lines (geometry, time, seed, shots)
/// followed by one row-major bit string per shot.
struct SnapshotFile {
    int rows = 1;
    int cols = 1;
    double time = 0.0;
    std::uint64_t seed = 0;
    std::vector<Snapshot> shots;
};

void write_snapshot_file(const std::string &path, const SnapshotFile &file);
[[nodiscard]] SnapshotFile read_snapshot_file(const std::string &path);

} // namespace fvd

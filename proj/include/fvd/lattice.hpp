#pragma once

#include <string>
#include <vector>

namespace fvd {

struct Coord {
    int row = 0;
    int col = 0;
    bool operator==(const Coord &) const = default;
};

// Nearest-neighbour pair in chain indices, stored with i < j.
struct Bond {
    int i = 0;
    int j = 0;
    auto operator<=>(const Bond &) const = default;
};

/// Open rectangular lattice with a boustrophedon ("snake") chain ordering.
///
/// Even rows run left to right and odd rows right to left, starting at (0,0),
/// so consecutive chain indices are always lattice neighbours. The chain index
/// is the site identity used everywhere downstream; (row, col) is a view.
class LatticeGeometry {
  public:
    LatticeGeometry(int rows, int cols);

    [[nodiscard]] int rows() const noexcept { return rows_; }
    [[nodiscard]] int cols() const noexcept { return cols_; }
    [[nodiscard]] int size() const noexcept { return rows_ * cols_; }
    [[nodiscard]] std::string label() const;

    [[nodiscard]] int snake_index(int row, int col) const;
    [[nodiscard]] Coord coord(int site) const;

    /// All nearest-neighbour pairs, each unordered pair once, sorted.
    [[nodiscard]] const std::vector<Bond> &bonds() const noexcept { return bonds_; }
    [[nodiscard]] std::vector<int> neighbors(int site) const;

    bool operator==(const LatticeGeometry &o) const noexcept {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }

  private:
    int rows_;
    int cols_;
    std::vector<Bond> bonds_;
};

} // namespace fvd

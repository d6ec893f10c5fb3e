#include "fvd/lattice.hpp"

#include "fvd/errors.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace fvd {

LatticeGeometry::LatticeGeometry(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1)
        throw InputDomainError(fmt::format("lattice dimensions must be positive, got {}x{}", rows, cols));
    bonds_.reserve(static_cast<size_t>(rows * (cols - 1) + cols * (rows - 1)));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int s = snake_index(r, c);
            if (c + 1 < cols) {
                const int t = snake_index(r, c + 1);
                bonds_.push_back({std::min(s, t), std::max(s, t)});
            }
            if (r + 1 < rows) {
                const int t = snake_index(r + 1, c);
                bonds_.push_back({std::min(s, t), std::max(s, t)});
            }
        }
    }
    std::sort(bonds_.begin(), bonds_.end());
}

std::string LatticeGeometry::label() const { return fmt::format("{}x{}", rows_, cols_); }

int LatticeGeometry::snake_index(int row, int col) const {
    if (row < 0 || row >= rows_ || col < 0 || col >= cols_)
        throw InputDomainError(fmt::format("coordinate ({}, {}) outside {}x{} lattice", row, col, rows_, cols_));
    return row * cols_ + ((row % 2 == 0) ? col : cols_ - 1 - col);
}

Coord LatticeGeometry::coord(int site) const {
    if (site < 0 || site >= size())
        throw InputDomainError(fmt::format("site {} outside [0, {})", site, size()));
    const int row = site / cols_;
    const int offset = site % cols_;
    return {row, (row % 2 == 0) ? offset : cols_ - 1 - offset};
}

std::vector<int> LatticeGeometry::neighbors(int site) const {
    const auto [r, c] = coord(site);
    std::vector<int> out;
    out.reserve(4);
    if (r > 0) out.push_back(snake_index(r - 1, c));
    if (r + 1 < rows_) out.push_back(snake_index(r + 1, c));
    if (c > 0) out.push_back(snake_index(r, c - 1));
    if (c + 1 < cols_) out.push_back(snake_index(r, c + 1));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace fvd

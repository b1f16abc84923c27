#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "pbe/mesh.hpp"

namespace pbe {

/// Uniform bucket grid over the mesh bounding box; each bucket lists the cells
/// whose bounding box overlaps it.
class PointLocator {
public:
    PointLocator(std::span<const Point3> vertices, std::span<const Cell> cells);

    /// Returns the containing cell. Points within a relative tolerance of a
    /// cell are accepted; among candidates the one with the largest minimum
    /// barycentric coordinate wins, so the result is deterministic on faces.
    std::optional<CellLocation> locate(std::span<const Point3> vertices, std::span<const Cell> cells,
                                       const Point3& p) const;

private:
    std::size_t bucket_index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * dims_[1] + j) * dims_[0] + i;
    }
    std::array<int, 3> bucket_of(const Point3& p) const;

    Point3 lo_;
    Point3 hi_;
    std::array<int, 3> dims_{1, 1, 1};
    std::array<double, 3> inv_size_{};
    std::vector<std::size_t> offsets_;
    std::vector<Index> entries_;
};

}  // namespace pbe

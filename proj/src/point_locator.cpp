#include "pbe/point_locator.hpp"

#include <algorithm>
#include <cmath>

namespace pbe {

namespace {
constexpr double kBaryTolerance = 1e-10;
}

PointLocator::PointLocator(std::span<const Point3> vertices, std::span<const Cell> cells) {
    if (vertices.empty() || cells.empty()) {
        offsets_.assign(2, 0);
        return;
    }
    lo_ = hi_ = vertices.front();
    for (const auto& v : vertices) {
        lo_ = {std::min(lo_.x, v.x), std::min(lo_.y, v.y), std::min(lo_.z, v.z)};
        hi_ = {std::max(hi_.x, v.x), std::max(hi_.y, v.y), std::max(hi_.z, v.z)};
    }
    const Point3 extent = hi_ - lo_;
    const double volume = std::max(extent.x * extent.y * extent.z, 1e-300);
    const double target = std::max<double>(1.0, static_cast<double>(cells.size()));
    const double h = std::cbrt(volume / target);
    for (int d = 0; d < 3; ++d) {
        dims_[d] = std::clamp(static_cast<int>(std::ceil(extent[d] / h)), 1, 256);
        inv_size_[d] = extent[d] > 0.0 ? dims_[d] / extent[d] : 0.0;
    }

    const std::size_t nb = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    std::vector<std::array<int, 6>> ranges(cells.size());
    std::vector<std::size_t> counts(nb + 1, 0);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        Point3 clo = vertices[cells[c][0]];
        Point3 chi = clo;
        for (int k = 1; k < 4; ++k) {
            const auto& v = vertices[cells[c][k]];
            clo = {std::min(clo.x, v.x), std::min(clo.y, v.y), std::min(clo.z, v.z)};
            chi = {std::max(chi.x, v.x), std::max(chi.y, v.y), std::max(chi.z, v.z)};
        }
        const auto a = bucket_of(clo);
        const auto b = bucket_of(chi);
        ranges[c] = {a[0], a[1], a[2], b[0], b[1], b[2]};
        for (int k = a[2]; k <= b[2]; ++k)
            for (int j = a[1]; j <= b[1]; ++j)
                for (int i = a[0]; i <= b[0]; ++i) ++counts[bucket_index(i, j, k) + 1];
    }
    for (std::size_t b = 0; b < nb; ++b) counts[b + 1] += counts[b];
    offsets_ = counts;
    entries_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& r = ranges[c];
        for (int k = r[2]; k <= r[5]; ++k)
            for (int j = r[1]; j <= r[4]; ++j)
                for (int i = r[0]; i <= r[3]; ++i) entries_[fill[bucket_index(i, j, k)]++] = static_cast<Index>(c);
    }
}

std::array<int, 3> PointLocator::bucket_of(const Point3& p) const {
    std::array<int, 3> b{};
    for (int d = 0; d < 3; ++d) {
        const int i = static_cast<int>(std::floor((p[d] - lo_[d]) * inv_size_[d]));
        b[d] = std::clamp(i, 0, dims_[d] - 1);
    }
    return b;
}

std::optional<CellLocation> PointLocator::locate(std::span<const Point3> vertices, std::span<const Cell> cells,
                                                 const Point3& p) const {
    if (entries_.empty()) return std::nullopt;
    const double slack = 1e-9 * std::max({hi_.x - lo_.x, hi_.y - lo_.y, hi_.z - lo_.z});
    for (int d = 0; d < 3; ++d) {
        if (p[d] < lo_[d] - slack || p[d] > hi_[d] + slack) return std::nullopt;
    }
    const auto b = bucket_of(p);
    const std::size_t bucket = bucket_index(b[0], b[1], b[2]);
    CellLocation best;
    double best_min = -std::numeric_limits<double>::infinity();
    for (std::size_t e = offsets_[bucket]; e < offsets_[bucket + 1]; ++e) {
        const Index c = entries_[e];
        const auto& cell = cells[c];
        const std::array<Point3, 4> v{vertices[cell[0]], vertices[cell[1]], vertices[cell[2]], vertices[cell[3]]};
        const auto bary = barycentric(v, p);
        const double m = *std::min_element(bary.begin(), bary.end());
        if (m > best_min) {
            best_min = m;
            best.cell = c;
            best.bary = bary;
            if (m >= 0.0 && m > 1e-3) break;
        }
    }
    if (best.cell == kNoIndex || best_min < -kBaryTolerance) return std::nullopt;
    return best;
}

}  // namespace pbe

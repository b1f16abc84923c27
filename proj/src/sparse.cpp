#include "pbe/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "pbe/errors.hpp"

namespace pbe {

SparseMatrix::SparseMatrix(std::vector<std::vector<std::uint32_t>> rows) {
    offsets_.assign(rows.size() + 1, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& r = rows[i];
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        offsets_[i + 1] = offsets_[i] + r.size();
    }
    columns_.reserve(offsets_.back());
    for (auto& r : rows) {
        for (auto c : r) {
            if (c >= rows.size()) throw DomainError("sparse column index out of range");
            columns_.push_back(c);
        }
    }
    values_.assign(columns_.size(), 0.0);
}

std::size_t SparseMatrix::position(std::uint32_t i, std::uint32_t j) const {
    const auto begin = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    const auto end = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) throw DomainError("entry outside the sparsity pattern");
    return static_cast<std::size_t>(it - columns_.begin());
}

double SparseMatrix::at(std::uint32_t i, std::uint32_t j) const {
    const auto begin = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    const auto end = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - columns_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = rows();
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s += values_[k] * x[columns_[k]];
        y[i] = s;
    }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
    std::vector<double> y(rows());
    multiply(x, y);
    return y;
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(rows(), 0.0);
    for (std::size_t i = 0; i < rows(); ++i) d[i] = at(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i));
    return d;
}

double SparseMatrix::asymmetry() const {
    double largest = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < rows(); ++i) {
        for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
            largest = std::max(largest, std::abs(values_[k]));
            const double t = at(columns_[k], static_cast<std::uint32_t>(i));
            worst = std::max(worst, std::abs(values_[k] - t));
        }
    }
    return largest > 0.0 ? worst / largest : 0.0;
}

SparseMatrix& SparseMatrix::operator*=(double s) {
    for (auto& v : values_) v *= s;
    return *this;
}

void SparseMatrix::add_scaled(const SparseMatrix& other, double s) {
    if (other.offsets_ != offsets_ || other.columns_ != columns_) throw DomainError("sparsity patterns differ");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * other.values_[k];
}

void eliminate_fixed(SparseMatrix& A, std::vector<double>& b, const std::vector<bool>& fixed,
                     std::span<const double> values) {
    const auto& off = A.offsets();
    const auto& col = A.columns();
    auto& val = A.values();
    for (std::size_t i = 0; i < A.rows(); ++i) {
        if (fixed[i]) {
            for (std::size_t k = off[i]; k < off[i + 1]; ++k) val[k] = col[k] == i ? 1.0 : 0.0;
            b[i] = values[i];
        } else {
            for (std::size_t k = off[i]; k < off[i + 1]; ++k) {
                if (fixed[col[k]]) {
                    b[i] -= val[k] * values[col[k]];
                    val[k] = 0.0;
                }
            }
        }
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace pbe

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pbe {

/// Square matrix in compressed row storage. The pattern is fixed at
/// construction; values are accumulated with add().
class SparseMatrix {
public:
    SparseMatrix() = default;
    /// Builds the pattern from per-row column lists (sorted and deduplicated here).
    explicit SparseMatrix(std::vector<std::vector<std::uint32_t>> rows);

    std::size_t rows() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t nonzeros() const { return columns_.size(); }

    const std::vector<std::size_t>& offsets() const { return offsets_; }
    const std::vector<std::uint32_t>& columns() const { return columns_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    /// Position of (i, j) in the value array; throws if outside the pattern.
    std::size_t position(std::uint32_t i, std::uint32_t j) const;
    void add(std::uint32_t i, std::uint32_t j, double v) { values_[position(i, j)] += v; }
    /// Entry (i, j), zero when outside the pattern.
    double at(std::uint32_t i, std::uint32_t j) const;

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> operator*(std::span<const double> x) const;
    std::vector<double> diagonal() const;

    /// Largest |A_ij - A_ji| relative to the largest |A_ij|.
    double asymmetry() const;

    SparseMatrix& operator*=(double s);
    /// this += s * other; other must share the pattern.
    void add_scaled(const SparseMatrix& other, double s);

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> columns_;
    std::vector<double> values_;
};

/// Symmetric elimination of fixed unknowns: known columns move to the right
/// hand side, fixed rows and columns are zeroed, the diagonal is set to one
/// and b holds the fixed value.
void eliminate_fixed(SparseMatrix& A, std::vector<double>& b, const std::vector<bool>& fixed,
                     std::span<const double> values);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace pbe

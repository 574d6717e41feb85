#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cfx {

/// A single coordinate block x_j in R^{n_j}.
using Block = std::vector<double>;

/**
 * Shape of a product space H = H_1 x ... x H_n where every H_j is R^{n_j}
 * with the Euclidean inner product.
 *
 * Component indices are zero-based throughout the library.
 */
class BlockStructure {
public:
    /// Throws ShapeError when dims is empty or contains a zero.
    explicit BlockStructure(std::vector<std::size_t> dims);

    /// n blocks of dimension 1, the layout used for linear systems.
    static BlockStructure scalar(std::size_t n);
    /// A single block of dimension d (no componental structure).
    static BlockStructure single(std::size_t d);

    std::size_t size() const noexcept { return dims_.size(); }
    std::size_t dim(std::size_t j) const;
    std::size_t offset(std::size_t j) const;
    std::size_t total_dim() const noexcept { return offsets_.back(); }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }

    /// Throws IndexError when j >= size().
    void check_index(std::size_t j) const;

    friend bool operator==(const BlockStructure&, const BlockStructure&) = default;

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> offsets_;  // size()+1 entries, offsets_[0] == 0
};

/**
 * An element x = (x_1, ..., x_n) of the product space, stored contiguously
 * block by block.
 */
class ProductVector {
public:
    /// The zero vector.
    explicit ProductVector(BlockStructure structure);
    /// Throws ShapeError when the length disagrees. Finiteness is checked by the
    /// readers and by the solvers (divergence), not here.
    ProductVector(BlockStructure structure, std::vector<double> values);

    const BlockStructure& structure() const noexcept { return structure_; }
    std::size_t num_blocks() const noexcept { return structure_.size(); }

    std::span<const double> block(std::size_t j) const;
    std::span<double> block(std::size_t j);
    Block block_copy(std::size_t j) const;

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool all_finite() const noexcept;

    friend bool operator==(const ProductVector&, const ProductVector&) = default;

private:
    BlockStructure structure_;
    std::vector<double> values_;
};

/// <x, y> = sum_j <x_j, y_j>. Throws ShapeError on structure mismatch.
double inner(const ProductVector& x, const ProductVector& y);
double norm(const ProductVector& x);
/// ||x_j||_j. Throws IndexError for j out of range.
double component_norm(const ProductVector& x, std::size_t j);

/// x with block j replaced by x_j + scale * direction; other blocks are copied untouched.
ProductVector axpy_block(const ProductVector& x, std::size_t j, double scale,
                         std::span<const double> direction);

/// x - y, blockwise.
ProductVector difference(const ProductVector& x, const ProductVector& y);

// Plain dense helpers shared by the numeric modules.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b);

/// Line 1: dims; line 2: all coordinates block by block (17 significant digits).
void write_vector(std::ostream& out, const ProductVector& x);
/// Inverse of write_vector. Throws ParseError.
ProductVector read_vector(std::istream& in);

std::string format_double(double v);

}  // namespace cfx

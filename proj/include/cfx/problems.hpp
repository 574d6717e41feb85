#pragma once

#include "cfx/operators.hpp"
#include "cfx/product_space.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cfx {

/// A stored matrix entry, zero-based.
struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

struct RowEntry {
    std::size_t col;
    double value;
};

/**
 * Sparse linear system A x = b stored by rows (CSR).
 *
 * Duplicate entries are summed and exact zeros are dropped on construction, so
 * every stored entry is a structural nonzero.
 */
class LinearSystem {
public:
    /// Throws DegenerateConstraintError for a zero row, ShapeError/IndexError for bad input.
    LinearSystem(std::size_t rows, std::size_t cols, std::vector<Triplet> entries,
                 std::vector<double> rhs);
    static LinearSystem from_dense(const std::vector<std::vector<double>>& a, std::vector<double> rhs);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nonzeros() const noexcept { return entries_.size(); }
    std::span<const RowEntry> row(std::size_t i) const;
    /// Row i as a dense vector of length cols().
    std::vector<double> dense_row(std::size_t i) const;
    const std::vector<double>& rhs() const noexcept { return rhs_; }
    /// ||a^i||^2, precomputed.
    double row_norm_sq(std::size_t i) const { return row_norm_sq_.at(i); }

    /// <a^i, x>
    double row_dot(std::size_t i, std::span<const double> x) const;
    /// b - A x
    std::vector<double> residual(std::span<const double> x) const;
    double residual_norm(std::span<const double> x) const;
    /// ||A x - b|| / (1 + ||b||)
    double relative_residual(std::span<const double> x) const;

    std::vector<Triplet> triplets() const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::size_t> row_ptr_;
    std::vector<RowEntry> entries_;
    std::vector<double> rhs_;
    std::vector<double> row_norm_sq_;
};

/// Number of structural nonzeros s_j per column, all positive.
class SparsityProfile {
public:
    /// Throws DegenerateColumnError when some s_j is zero.
    explicit SparsityProfile(std::vector<std::size_t> counts);
    std::size_t size() const noexcept { return counts_.size(); }
    std::size_t operator[](std::size_t j) const { return counts_.at(j); }
    const std::vector<std::size_t>& counts() const noexcept { return counts_; }
    std::size_t max() const;

private:
    std::vector<std::size_t> counts_;
};

SparsityProfile column_sparsity(const LinearSystem& system);

/// w_ij = 1{a_j^i != 0} / s_j; every column sums to 1.
struct SupportNormalized {};
/// w_ij = w_i / s_j with w in the unit simplex; column sums are 1/s_j.
struct RowWeightsOverSparsity {
    std::vector<double> w;
};
using DropWeightScheme = std::variant<SupportNormalized, RowWeightsOverSparsity>;

WeightMatrix drop_weights(const LinearSystem& system, const SparsityProfile& s,
                          const DropWeightScheme& scheme = SupportNormalized{});

/// One hyperplane projection per row, acting on R^n with scalar blocks.
std::vector<Operator> hyperplane_operators(const LinearSystem& system);

struct PlantedSystem {
    LinearSystem system;
    std::vector<double> solution;
};

/// Seed used by the shipped fixtures and by `cfx compare` when none is given.
inline constexpr std::uint64_t kDefaultSeed = 20211120;

/**
 * Random sparse consistent system: each entry is a nonzero with probability
 * `density` (values uniform in [-1, 1] \ {0}); x* is uniform in [-10, 10]^n;
 * b = A x*. Redraws the pattern up to 100 times to avoid zero rows/columns.
 */
PlantedSystem plant_consistent_system(std::size_t rows, std::size_t cols, double density,
                                      std::uint64_t seed);

// Matrix Market coordinate format ("%%MatrixMarket matrix coordinate real general").
LinearSystem read_linear_system(std::istream& matrix, std::istream& rhs);
void write_matrix_market(std::ostream& out, const LinearSystem& system);
/// One decimal per line.
std::vector<double> read_dense_vector(std::istream& in);
void write_dense_vector(std::ostream& out, std::span<const double> v);

// Convex feasibility instances.
struct HyperplaneSet {
    std::vector<double> a;
    double b;
};
/// {x : <a,x> <= b}
struct HalfspaceSet {
    std::vector<double> a;
    double b;
};
struct BallSet {
    std::vector<double> center;
    double radius;
};
struct BoxSet {
    std::vector<double> lo;
    std::vector<double> hi;
};
using ConvexSet = std::variant<HyperplaneSet, HalfspaceSet, BallSet, BoxSet>;

/// Amount by which z violates membership in the set (0 inside).
double membership_violation(const ConvexSet& set, std::span<const double> z);

class CfpInstance {
public:
    /// Throws ParameterError when the planted point lies outside some set.
    CfpInstance(BlockStructure structure, std::vector<ConvexSet> sets,
                std::optional<ProductVector> planted = std::nullopt);

    const BlockStructure& structure() const noexcept { return structure_; }
    const std::vector<ConvexSet>& sets() const noexcept { return sets_; }
    const std::optional<ProductVector>& planted() const noexcept { return planted_; }

private:
    BlockStructure structure_;
    std::vector<ConvexSet> sets_;
    std::optional<ProductVector> planted_;
};

/// One metric projection per set.
std::vector<Operator> cfp_projection_operators(const CfpInstance& instance);

/// {"dims": [...], "sets": [{"kind": "hyperplane", ...}, ...], "planted": [...]}
CfpInstance cfp_from_json(const nlohmann::json& doc);
nlohmann::json cfp_to_json(const CfpInstance& instance);

}  // namespace cfx

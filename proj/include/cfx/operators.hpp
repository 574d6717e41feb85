#pragma once

#include "cfx/product_space.hpp"

#include <json.hpp>

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cfx {

/// How combinators validate relaxation parameters.
///
/// strict rejects values outside the intervals under which the convergence
/// and SQNE guarantees hold; permissive only requires nonnegativity, so
/// reflections (lambda = 2) and over-relaxations can be explored.
enum class Validation { strict, permissive };

/**
 * Nonnegative m x n weights w_ij, one row per operator T_i and one column per
 * component j. Every column sum w_.j must be positive.
 */
class WeightMatrix {
public:
    /// row_major holds rows*cols entries. Throws WeightError on negative,
    /// non-finite or zero-column weights.
    WeightMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
    static WeightMatrix from_rows(const std::vector<std::vector<double>>& rows);
    /// Every column equal to w (w_ij = w_i).
    static WeightMatrix broadcast(std::span<const double> w, std::size_t cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t i, std::size_t j) const { return w_[i * cols_ + j]; }
    double column_sum(std::size_t j) const { return column_sums_.at(j); }
    const std::vector<double>& column_sums() const noexcept { return column_sums_; }
    /// max_j w_.j
    double max_column_sum() const;
    /// Every column sums to 1 within 1e-12.
    bool normalized() const noexcept { return normalized_; }

    std::vector<std::vector<double>> to_rows() const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> w_;
    std::vector<double> column_sums_;
    bool normalized_ = false;
};

namespace detail {
class OperatorNode;
}

/**
 * An immutable operator T: H -> H built from atoms and combinators.
 *
 * Copies share the underlying tree; evaluation is pure and reentrant.
 */
class Operator {
public:
    explicit Operator(std::shared_ptr<const detail::OperatorNode> node);

    const BlockStructure& structure() const;
    std::string kind() const;

    /// T(x). Throws ShapeError when x lives in another space.
    ProductVector apply(const ProductVector& x) const;
    /// (T(x))_j, bit-identical to block j of apply(x).
    Block apply_component(const ProductVector& x, std::size_t j) const;

    /// Node description without the root "dims" key.
    nlohmann::json to_json() const;

private:
    std::shared_ptr<const detail::OperatorNode> node_;
};

/// z + ((b - <a,z>)/||a||^2) a. Throws DegenerateConstraintError when a = 0.
std::vector<double> project_hyperplane(std::span<const double> a, double b,
                                       std::span<const double> z);

// Atoms. Vectors a, center, lo, hi and offset have the structure's total dimension.
Operator identity(BlockStructure structure);
Operator hyperplane_projection(BlockStructure structure, std::vector<double> a, double b);
/// Projection onto {x : <a,x> <= b}.
Operator halfspace_projection(BlockStructure structure, std::vector<double> a, double b);
Operator ball_projection(BlockStructure structure, std::vector<double> center, double radius);
Operator box_projection(BlockStructure structure, std::vector<double> lo, std::vector<double> hi);
/// x -> M x + offset, M given as rows.
Operator affine_map(BlockStructure structure, const std::vector<std::vector<double>>& matrix,
                    std::vector<double> offset);
/// Exchanges blocks first and second (equal dimensions required).
Operator swap_blocks(BlockStructure structure, std::size_t first, std::size_t second);
/// (x1, x2) -> (x1/2 + 3, 8 x2) on R x R: a 1-contraction that is not a contraction.
Operator contraction_example();
/// (x1, x2) -> (x2/2, x1/2) on R x R: a 1/2-contraction that is not a 1-contraction.
Operator scaled_swap_example();

// Combinators.
/// T_lambda = Id + lambda (T - Id), lambda >= 0.
Operator relax(Operator op, double lambda);
/// (T_y(x))_j = x_j + lambda_j ((T(x))_j - x_j), all lambda_j >= 0.
Operator cw_relax(Operator op, std::vector<double> lambdas);
/// sum_i w_i T_i(x) with w in the unit simplex (sum checked to 1e-12).
Operator convex_combination(std::vector<Operator> ops, std::vector<double> weights);
/**
 * (T(x))_j = x_j + lambda_j sum_i w_ij ((T_i(x))_j - x_j).
 *
 * In strict mode every lambda_j must lie in (0, 2/w_.j].
 */
Operator componental_weighted(std::vector<Operator> ops, WeightMatrix weights,
                              std::vector<double> lambdas,
                              Validation mode = Validation::strict);
/// U(x) = (U^1(x_1), ..., U^n(x_n)); maps[j] acts on a space of total dimension n_j.
Operator block_diagonal(std::vector<Operator> maps);
/// S(x) = ((S_{a(1)}(x))_1, ..., (S_{a(n)}(x))_n) with assignment a.
Operator block_select(std::vector<Operator> ops, std::vector<std::size_t> assignment);
/// Id - T.
Operator complement(Operator op);

/// {"dims": [...], "operator": node}
nlohmann::json to_document(const Operator& op);
/// Throws ParseError on malformed documents, and the constructors' errors on bad parameters.
Operator from_document(const nlohmann::json& doc);
/// Parses a node given the structure of the space it acts on.
Operator from_json(const nlohmann::json& node, const BlockStructure& structure);

}  // namespace cfx

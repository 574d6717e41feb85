#include "cfx/operators.hpp"

#include "cfx/errors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace cfx {

namespace detail {

class OperatorNode {
public:
    explicit OperatorNode(BlockStructure structure) : structure_(std::move(structure)) {}
    virtual ~OperatorNode() = default;

    const BlockStructure& structure() const noexcept { return structure_; }

    virtual std::string kind() const = 0;
    virtual ProductVector apply(const ProductVector& x) const = 0;
    virtual Block apply_component(const ProductVector& x, std::size_t j) const {
        return apply(x).block_copy(j);
    }
    virtual nlohmann::json to_json() const = 0;

private:
    BlockStructure structure_;
};

}  // namespace detail

using detail::OperatorNode;
using nlohmann::json;

// ---------------------------------------------------------------------------
// WeightMatrix

WeightMatrix::WeightMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), w_(std::move(row_major)), column_sums_(cols, 0.0) {
    if (rows_ == 0 || cols_ == 0)
        throw WeightError("weight matrix must have at least one row and one column");
    if (w_.size() != rows_ * cols_)
        throw ShapeError("weight matrix data does not match its dimensions");
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) {
            double w = w_[i * cols_ + j];
            if (!std::isfinite(w) || w < 0.0)
                throw WeightError("weights must be finite and nonnegative");
            column_sums_[j] += w;
        }
    normalized_ = true;
    for (std::size_t j = 0; j < cols_; ++j) {
        if (!(column_sums_[j] > 0.0))
            throw WeightError("column " + std::to_string(j) + " of the weight matrix sums to 0");
        if (std::abs(column_sums_[j] - 1.0) > 1e-12)
            normalized_ = false;
    }
}

WeightMatrix WeightMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty())
        throw WeightError("weight matrix must have at least one row");
    std::size_t cols = rows.front().size();
    std::vector<double> data;
    data.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        if (r.size() != cols)
            throw ShapeError("ragged weight matrix");
        data.insert(data.end(), r.begin(), r.end());
    }
    return WeightMatrix(rows.size(), cols, std::move(data));
}

WeightMatrix WeightMatrix::broadcast(std::span<const double> w, std::size_t cols) {
    std::vector<double> data;
    data.reserve(w.size() * cols);
    for (double wi : w)
        data.insert(data.end(), cols, wi);
    return WeightMatrix(w.size(), cols, std::move(data));
}

double WeightMatrix::max_column_sum() const {
    return *std::max_element(column_sums_.begin(), column_sums_.end());
}

std::vector<std::vector<double>> WeightMatrix::to_rows() const {
    std::vector<std::vector<double>> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        out[i].assign(w_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                      w_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
    return out;
}

// ---------------------------------------------------------------------------
// Operator handle

Operator::Operator(std::shared_ptr<const OperatorNode> node) : node_(std::move(node)) {}

const BlockStructure& Operator::structure() const { return node_->structure(); }

std::string Operator::kind() const { return node_->kind(); }

ProductVector Operator::apply(const ProductVector& x) const {
    if (x.structure() != node_->structure())
        throw ShapeError("operator '" + node_->kind() + "' applied to a vector of another space");
    return node_->apply(x);
}

Block Operator::apply_component(const ProductVector& x, std::size_t j) const {
    if (x.structure() != node_->structure())
        throw ShapeError("operator '" + node_->kind() + "' applied to a vector of another space");
    node_->structure().check_index(j);
    return node_->apply_component(x, j);
}

json Operator::to_json() const { return node_->to_json(); }

// ---------------------------------------------------------------------------
// Atoms

std::vector<double> project_hyperplane(std::span<const double> a, double b,
                                       std::span<const double> z) {
    double aa = dot(a, a);
    if (aa == 0.0)
        throw DegenerateConstraintError("hyperplane normal vector is zero");
    double c = (b - dot(a, z)) / aa;
    std::vector<double> out(z.begin(), z.end());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += c * a[i];
    return out;
}

namespace {

template <class Node, class... Args>
Operator make(Args&&... args) {
    return Operator(std::make_shared<const Node>(std::forward<Args>(args)...));
}

void require_length(const std::vector<double>& v, const BlockStructure& s, const char* what) {
    if (v.size() != s.total_dim())
        throw ShapeError(std::string(what) + " has length " + std::to_string(v.size()) +
                         ", space dimension is " + std::to_string(s.total_dim()));
    for (double e : v)
        if (!std::isfinite(e))
            throw ParameterError(std::string(what) + " must be finite");
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw ParameterError(std::string(what) + " must be finite");
}

/// Builds the output vector for element-wise maps over the flattened coordinates.
template <class F>
ProductVector map_flat(const ProductVector& x, F&& f) {
    ProductVector out = x;
    auto v = out.values();
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = f(i, v[i]);
    return out;
}

json dims_json(const BlockStructure& s) { return s.dims(); }

class IdentityNode final : public OperatorNode {
public:
    using OperatorNode::OperatorNode;
    std::string kind() const override { return "identity"; }
    ProductVector apply(const ProductVector& x) const override { return x; }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        return x.block_copy(j);
    }
    json to_json() const override { return {{"kind", kind()}}; }
};

class HyperplaneNode final : public OperatorNode {
public:
    HyperplaneNode(BlockStructure s, std::vector<double> a, double b)
        : OperatorNode(std::move(s)), a_(std::move(a)), b_(b) {
        require_length(a_, structure(), "hyperplane normal");
        require_finite(b_, "hyperplane offset");
        aa_ = dot(a_, a_);
        if (aa_ == 0.0)
            throw DegenerateConstraintError("hyperplane normal vector is zero");
    }
    std::string kind() const override { return "hyperplane"; }

    double coefficient(const ProductVector& x) const { return (b_ - dot(a_, x.values())) / aa_; }

    ProductVector apply(const ProductVector& x) const override {
        double c = coefficient(x);
        return map_flat(x, [&](std::size_t i, double v) { return v + c * a_[i]; });
    }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        double c = coefficient(x);
        Block out = x.block_copy(j);
        std::size_t off = structure().offset(j);
        for (std::size_t e = 0; e < out.size(); ++e)
            out[e] += c * a_[off + e];
        return out;
    }
    json to_json() const override { return {{"kind", kind()}, {"a", a_}, {"b", b_}}; }

private:
    std::vector<double> a_;
    double b_;
    double aa_;
};

class HalfspaceNode final : public OperatorNode {
public:
    HalfspaceNode(BlockStructure s, std::vector<double> a, double b)
        : OperatorNode(std::move(s)), a_(std::move(a)), b_(b) {
        require_length(a_, structure(), "halfspace normal");
        require_finite(b_, "halfspace offset");
        aa_ = dot(a_, a_);
        if (aa_ == 0.0)
            throw DegenerateConstraintError("halfspace normal vector is zero");
    }
    std::string kind() const override { return "halfspace"; }

    double coefficient(const ProductVector& x) const {
        double ax = dot(a_, x.values());
        return ax <= b_ ? 0.0 : (b_ - ax) / aa_;
    }

    ProductVector apply(const ProductVector& x) const override {
        double c = coefficient(x);
        if (c == 0.0)
            return x;
        return map_flat(x, [&](std::size_t i, double v) { return v + c * a_[i]; });
    }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        double c = coefficient(x);
        Block out = x.block_copy(j);
        if (c == 0.0)
            return out;
        std::size_t off = structure().offset(j);
        for (std::size_t e = 0; e < out.size(); ++e)
            out[e] += c * a_[off + e];
        return out;
    }
    json to_json() const override { return {{"kind", kind()}, {"a", a_}, {"b", b_}}; }

private:
    std::vector<double> a_;
    double b_;
    double aa_;
};

class BallNode final : public OperatorNode {
public:
    BallNode(BlockStructure s, std::vector<double> center, double radius)
        : OperatorNode(std::move(s)), center_(std::move(center)), radius_(radius) {
        require_length(center_, structure(), "ball center");
        if (!std::isfinite(radius_) || radius_ <= 0.0)
            throw ParameterError("ball radius must be positive");
    }
    std::string kind() const override { return "ball"; }

    /// Scale applied to x - center; 1 inside the ball.
    double shrink(const ProductVector& x) const {
        double d = distance(x.values(), center_);
        return d <= radius_ ? 1.0 : radius_ / d;
    }

    ProductVector apply(const ProductVector& x) const override {
        double t = shrink(x);
        if (t == 1.0)
            return x;
        return map_flat(x, [&](std::size_t i, double v) { return center_[i] + t * (v - center_[i]); });
    }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        double t = shrink(x);
        Block out = x.block_copy(j);
        if (t == 1.0)
            return out;
        std::size_t off = structure().offset(j);
        for (std::size_t e = 0; e < out.size(); ++e)
            out[e] = center_[off + e] + t * (out[e] - center_[off + e]);
        return out;
    }
    json to_json() const override {
        return {{"kind", kind()}, {"center", center_}, {"radius", radius_}};
    }

private:
    std::vector<double> center_;
    double radius_;
};

class BoxNode final : public OperatorNode {
public:
    BoxNode(BlockStructure s, std::vector<double> lo, std::vector<double> hi)
        : OperatorNode(std::move(s)), lo_(std::move(lo)), hi_(std::move(hi)) {
        require_length(lo_, structure(), "box lower bound");
        require_length(hi_, structure(), "box upper bound");
        for (std::size_t i = 0; i < lo_.size(); ++i)
            if (lo_[i] > hi_[i])
                throw ParameterError("box lower bound exceeds upper bound");
    }
    std::string kind() const override { return "box"; }
    ProductVector apply(const ProductVector& x) const override {
        return map_flat(x, [&](std::size_t i, double v) { return std::clamp(v, lo_[i], hi_[i]); });
    }
    json to_json() const override { return {{"kind", kind()}, {"lo", lo_}, {"hi", hi_}}; }

private:
    std::vector<double> lo_;
    std::vector<double> hi_;
};

class AffineNode final : public OperatorNode {
public:
    AffineNode(BlockStructure s, const std::vector<std::vector<double>>& matrix,
               std::vector<double> offset)
        : OperatorNode(std::move(s)), offset_(std::move(offset)) {
        std::size_t d = structure().total_dim();
        require_length(offset_, structure(), "affine offset");
        if (matrix.size() != d)
            throw ShapeError("affine matrix must be square of the space dimension");
        matrix_.reserve(d * d);
        for (const auto& row : matrix) {
            if (row.size() != d)
                throw ShapeError("affine matrix must be square of the space dimension");
            for (double v : row) {
                require_finite(v, "affine matrix entry");
                matrix_.push_back(v);
            }
        }
    }
    std::string kind() const override { return "affine"; }

    double row(std::size_t r, const ProductVector& x) const {
        std::size_t d = structure().total_dim();
        auto v = x.values();
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c)
            s += matrix_[r * d + c] * v[c];
        return s + offset_[r];
    }

    ProductVector apply(const ProductVector& x) const override {
        ProductVector out(structure());
        auto o = out.values();
        for (std::size_t r = 0; r < o.size(); ++r)
            o[r] = row(r, x);
        return out;
    }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        Block out(structure().dim(j));
        std::size_t off = structure().offset(j);
        for (std::size_t e = 0; e < out.size(); ++e)
            out[e] = row(off + e, x);
        return out;
    }
    json to_json() const override {
        std::size_t d = structure().total_dim();
        json rows = json::array();
        for (std::size_t r = 0; r < d; ++r)
            rows.push_back(std::vector<double>(matrix_.begin() + static_cast<std::ptrdiff_t>(r * d),
                                               matrix_.begin() + static_cast<std::ptrdiff_t>((r + 1) * d)));
        return {{"kind", kind()}, {"matrix", rows}, {"offset", offset_}};
    }

private:
    std::vector<double> matrix_;
    std::vector<double> offset_;
};

class SwapNode final : public OperatorNode {
public:
    SwapNode(BlockStructure s, std::size_t first, std::size_t second)
        : OperatorNode(std::move(s)), first_(first), second_(second) {
        if (structure().dim(first_) != structure().dim(second_))
            throw ShapeError("swapped blocks must have equal dimensions");
    }
    std::string kind() const override { return "swap"; }
    std::size_t source(std::size_t j) const {
        return j == first_ ? second_ : j == second_ ? first_ : j;
    }
    ProductVector apply(const ProductVector& x) const override {
        ProductVector out = x;
        for (std::size_t j = 0; j < x.num_blocks(); ++j) {
            auto src = x.block(source(j));
            std::copy(src.begin(), src.end(), out.block(j).begin());
        }
        return out;
    }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        return x.block_copy(source(j));
    }
    json to_json() const override {
        return {{"kind", kind()}, {"first", first_}, {"second", second_}};
    }

private:
    std::size_t first_;
    std::size_t second_;
};

BlockStructure plane() { return BlockStructure({1, 1}); }

class ContractionExampleNode final : public OperatorNode {
public:
    ContractionExampleNode() : OperatorNode(plane()) {}
    std::string kind() const override { return "contraction_example"; }
    static double eval(std::size_t j, const ProductVector& x) {
        auto v = x.values();
        return j == 0 ? v[0] / 2.0 + 3.0 : 8.0 * v[1];
    }
    ProductVector apply(const ProductVector& x) const override {
        return ProductVector(structure(), {eval(0, x), eval(1, x)});
    }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        return {eval(j, x)};
    }
    json to_json() const override { return {{"kind", kind()}}; }
};

class ScaledSwapExampleNode final : public OperatorNode {
public:
    ScaledSwapExampleNode() : OperatorNode(plane()) {}
    std::string kind() const override { return "scaled_swap_example"; }
    static double eval(std::size_t j, const ProductVector& x) {
        auto v = x.values();
        return j == 0 ? v[1] / 2.0 : v[0] / 2.0;
    }
    ProductVector apply(const ProductVector& x) const override {
        return ProductVector(structure(), {eval(0, x), eval(1, x)});
    }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        return {eval(j, x)};
    }
    json to_json() const override { return {{"kind", kind()}}; }
};

// ---------------------------------------------------------------------------
// Combinators

void require_same_structure(const std::vector<Operator>& ops) {
    if (ops.empty())
        throw ParameterError("combinator needs at least one operator");
    for (const auto& op : ops)
        if (op.structure() != ops.front().structure())
            throw ShapeError("combined operators act on different spaces");
}

json children_json(const std::vector<Operator>& ops) {
    json c = json::array();
    for (const auto& op : ops)
        c.push_back(op.to_json());
    return c;
}

/// x_j + lambda (t_j - x_j), element by element.
void relax_block(std::span<double> t, std::span<const double> x, double lambda) {
    for (std::size_t e = 0; e < t.size(); ++e)
        t[e] = x[e] + lambda * (t[e] - x[e]);
}

class RelaxNode final : public OperatorNode {
public:
    RelaxNode(Operator op, double lambda)
        : OperatorNode(op.structure()), op_(std::move(op)), lambda_(lambda) {
        if (!std::isfinite(lambda_) || lambda_ < 0.0)
            throw ParameterError("relaxation parameter must be nonnegative");
    }
    std::string kind() const override { return "relax"; }
    ProductVector apply(const ProductVector& x) const override {
        ProductVector t = op_.apply(x);
        relax_block(t.values(), x.values(), lambda_);
        return t;
    }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        Block t = op_.apply_component(x, j);
        relax_block(t, x.block(j), lambda_);
        return t;
    }
    json to_json() const override {
        return {{"kind", kind()}, {"lambda", lambda_}, {"children", json::array({op_.to_json()})}};
    }

private:
    Operator op_;
    double lambda_;
};

class CwRelaxNode final : public OperatorNode {
public:
    CwRelaxNode(Operator op, std::vector<double> lambdas)
        : OperatorNode(op.structure()), op_(std::move(op)), lambdas_(std::move(lambdas)) {
        if (lambdas_.size() != structure().size())
            throw ShapeError("one relaxation parameter per component is required");
        for (double l : lambdas_)
            if (!std::isfinite(l) || l < 0.0)
                throw ParameterError("component relaxation parameters must be nonnegative");
    }
    std::string kind() const override { return "cw_relax"; }
    ProductVector apply(const ProductVector& x) const override {
        ProductVector t = op_.apply(x);
        for (std::size_t j = 0; j < x.num_blocks(); ++j)
            relax_block(t.block(j), x.block(j), lambdas_[j]);
        return t;
    }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        Block t = op_.apply_component(x, j);
        relax_block(t, x.block(j), lambdas_[j]);
        return t;
    }
    json to_json() const override {
        return {{"kind", kind()}, {"lambdas", lambdas_}, {"children", json::array({op_.to_json()})}};
    }

private:
    Operator op_;
    std::vector<double> lambdas_;
};

class ConvexNode final : public OperatorNode {
public:
    ConvexNode(std::vector<Operator> ops, std::vector<double> w)
        : OperatorNode((require_same_structure(ops), ops.front().structure())),
          ops_(std::move(ops)), w_(std::move(w)) {
        if (w_.size() != ops_.size())
            throw ShapeError("one weight per operator is required");
        double sum = 0.0;
        for (double wi : w_) {
            if (!std::isfinite(wi) || wi < 0.0)
                throw ParameterError("convex weights must be nonnegative");
            sum += wi;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw ParameterError("convex weights must sum to 1");
    }
    std::string kind() const override { return "convex_combination"; }
    ProductVector apply(const ProductVector& x) const override {
        ProductVector out(structure());
        auto o = out.values();
        for (std::size_t i = 0; i < ops_.size(); ++i) {
            ProductVector t = ops_[i].apply(x);
            auto v = t.values();
            for (std::size_t e = 0; e < o.size(); ++e)
                o[e] += w_[i] * v[e];
        }
        return out;
    }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        Block out(structure().dim(j), 0.0);
        for (std::size_t i = 0; i < ops_.size(); ++i) {
            Block t = ops_[i].apply_component(x, j);
            for (std::size_t e = 0; e < out.size(); ++e)
                out[e] += w_[i] * t[e];
        }
        return out;
    }
    json to_json() const override {
        return {{"kind", kind()}, {"weights", w_}, {"children", children_json(ops_)}};
    }

private:
    std::vector<Operator> ops_;
    std::vector<double> w_;
};

class ComponentalWeightedNode final : public OperatorNode {
public:
    ComponentalWeightedNode(std::vector<Operator> ops, WeightMatrix w, std::vector<double> lambdas,
                            Validation mode)
        : OperatorNode((require_same_structure(ops), ops.front().structure())),
          ops_(std::move(ops)), w_(std::move(w)), lambdas_(std::move(lambdas)), mode_(mode) {
        std::size_t n = structure().size();
        if (w_.rows() != ops_.size() || w_.cols() != n)
            throw ShapeError("weight matrix must be (#operators) x (#components)");
        if (lambdas_.size() != n)
            throw ShapeError("one relaxation parameter per component is required");
        for (std::size_t j = 0; j < n; ++j) {
            double l = lambdas_[j];
            if (!std::isfinite(l) || l < 0.0)
                throw ParameterError("component relaxation parameters must be nonnegative");
            if (mode_ == Validation::strict && (l <= 0.0 || l > 2.0 / w_.column_sum(j)))
                throw ParameterError("lambda_" + std::to_string(j) + " = " + format_double(l) +
                                     " outside (0, 2/w_.j] = (0, " +
                                     format_double(2.0 / w_.column_sum(j)) + "]");
        }
    }
    std::string kind() const override { return "componental_weighted"; }

    ProductVector apply(const ProductVector& x) const override {
        std::size_t n = structure().size();
        std::vector<Block> acc(n);
        for (std::size_t j = 0; j < n; ++j)
            acc[j].assign(structure().dim(j), 0.0);
        for (std::size_t i = 0; i < ops_.size(); ++i) {
            bool used = false;
            for (std::size_t j = 0; j < n && !used; ++j)
                used = w_(i, j) != 0.0;
            if (!used)
                continue;
            ProductVector t = ops_[i].apply(x);
            for (std::size_t j = 0; j < n; ++j)
                accumulate(acc[j], w_(i, j), t.block(j), x.block(j));
        }
        ProductVector out = x;
        for (std::size_t j = 0; j < n; ++j)
            finish(out.block(j), acc[j], lambdas_[j]);
        return out;
    }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        Block acc(structure().dim(j), 0.0);
        for (std::size_t i = 0; i < ops_.size(); ++i) {
            if (w_(i, j) == 0.0)
                continue;
            Block t = ops_[i].apply_component(x, j);
            accumulate(acc, w_(i, j), t, x.block(j));
        }
        Block out = x.block_copy(j);
        finish(out, acc, lambdas_[j]);
        return out;
    }
    json to_json() const override {
        return {{"kind", kind()},
                {"weights", w_.to_rows()},
                {"lambdas", lambdas_},
                {"strict", mode_ == Validation::strict},
                {"children", children_json(ops_)}};
    }

private:
    static void accumulate(Block& acc, double w, std::span<const double> t,
                           std::span<const double> x) {
        if (w == 0.0)
            return;
        for (std::size_t e = 0; e < acc.size(); ++e)
            acc[e] += w * (t[e] - x[e]);
    }
    static void finish(std::span<double> out, const Block& acc, double lambda) {
        for (std::size_t e = 0; e < out.size(); ++e)
            out[e] += lambda * acc[e];
    }

    std::vector<Operator> ops_;
    WeightMatrix w_;
    std::vector<double> lambdas_;
    Validation mode_;
};

BlockStructure diagonal_structure(const std::vector<Operator>& maps) {
    if (maps.empty())
        throw ParameterError("block_diagonal needs one map per component");
    std::vector<std::size_t> dims;
    for (const auto& m : maps)
        dims.push_back(m.structure().total_dim());
    return BlockStructure(std::move(dims));
}

class BlockDiagonalNode final : public OperatorNode {
public:
    explicit BlockDiagonalNode(std::vector<Operator> maps)
        : OperatorNode(diagonal_structure(maps)), maps_(std::move(maps)) {}
    std::string kind() const override { return "block_diagonal"; }

    Block image(const ProductVector& x, std::size_t j) const {
        const Operator& u = maps_[j];
        ProductVector local(u.structure(), x.block_copy(j));
        ProductVector t = u.apply(local);
        return Block(t.values().begin(), t.values().end());
    }
    ProductVector apply(const ProductVector& x) const override {
        ProductVector out = x;
        for (std::size_t j = 0; j < maps_.size(); ++j) {
            Block t = image(x, j);
            std::copy(t.begin(), t.end(), out.block(j).begin());
        }
        return out;
    }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        return image(x, j);
    }
    json to_json() const override {
        json children = json::array();
        for (const auto& m : maps_) {
            json c = m.to_json();
            if (m.structure().size() > 1)
                c["dims"] = dims_json(m.structure());
            children.push_back(std::move(c));
        }
        return {{"kind", kind()}, {"children", children}};
    }

private:
    std::vector<Operator> maps_;
};

class BlockSelectNode final : public OperatorNode {
public:
    BlockSelectNode(std::vector<Operator> ops, std::vector<std::size_t> assignment)
        : OperatorNode((require_same_structure(ops), ops.front().structure())),
          ops_(std::move(ops)), assignment_(std::move(assignment)) {
        if (assignment_.size() != structure().size())
            throw ParameterError("block_select needs one source operator per component");
        for (auto a : assignment_)
            if (a >= ops_.size())
                throw ParameterError("block_select assignment refers to a missing operator");
    }
    std::string kind() const override { return "block_select"; }
    ProductVector apply(const ProductVector& x) const override {
        ProductVector out = x;
        for (std::size_t j = 0; j < assignment_.size(); ++j) {
            Block t = ops_[assignment_[j]].apply_component(x, j);
            std::copy(t.begin(), t.end(), out.block(j).begin());
        }
        return out;
    }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        return ops_[assignment_[j]].apply_component(x, j);
    }
    json to_json() const override {
        return {{"kind", kind()}, {"assignment", assignment_}, {"children", children_json(ops_)}};
    }

private:
    std::vector<Operator> ops_;
    std::vector<std::size_t> assignment_;
};

class ComplementNode final : public OperatorNode {
public:
    explicit ComplementNode(Operator op) : OperatorNode(op.structure()), op_(std::move(op)) {}
    std::string kind() const override { return "complement"; }
    ProductVector apply(const ProductVector& x) const override {
        ProductVector t = op_.apply(x);
        auto o = t.values();
        auto v = x.values();
        for (std::size_t e = 0; e < o.size(); ++e)
            o[e] = v[e] - o[e];
        return t;
    }
    Block apply_component(const ProductVector& x, std::size_t j) const override {
        Block t = op_.apply_component(x, j);
        auto v = x.block(j);
        for (std::size_t e = 0; e < t.size(); ++e)
            t[e] = v[e] - t[e];
        return t;
    }
    json to_json() const override {
        return {{"kind", kind()}, {"children", json::array({op_.to_json()})}};
    }

private:
    Operator op_;
};

}  // namespace

Operator identity(BlockStructure structure) { return make<IdentityNode>(std::move(structure)); }

Operator hyperplane_projection(BlockStructure structure, std::vector<double> a, double b) {
    return make<HyperplaneNode>(std::move(structure), std::move(a), b);
}

Operator halfspace_projection(BlockStructure structure, std::vector<double> a, double b) {
    return make<HalfspaceNode>(std::move(structure), std::move(a), b);
}

Operator ball_projection(BlockStructure structure, std::vector<double> center, double radius) {
    return make<BallNode>(std::move(structure), std::move(center), radius);
}

Operator box_projection(BlockStructure structure, std::vector<double> lo, std::vector<double> hi) {
    return make<BoxNode>(std::move(structure), std::move(lo), std::move(hi));
}

Operator affine_map(BlockStructure structure, const std::vector<std::vector<double>>& matrix,
                    std::vector<double> offset) {
    return make<AffineNode>(std::move(structure), matrix, std::move(offset));
}

Operator swap_blocks(BlockStructure structure, std::size_t first, std::size_t second) {
    return make<SwapNode>(std::move(structure), first, second);
}

Operator contraction_example() { return make<ContractionExampleNode>(); }

Operator scaled_swap_example() { return make<ScaledSwapExampleNode>(); }

Operator relax(Operator op, double lambda) { return make<RelaxNode>(std::move(op), lambda); }

Operator cw_relax(Operator op, std::vector<double> lambdas) {
    return make<CwRelaxNode>(std::move(op), std::move(lambdas));
}

Operator convex_combination(std::vector<Operator> ops, std::vector<double> weights) {
    return make<ConvexNode>(std::move(ops), std::move(weights));
}

Operator componental_weighted(std::vector<Operator> ops, WeightMatrix weights,
                              std::vector<double> lambdas, Validation mode) {
    return make<ComponentalWeightedNode>(std::move(ops), std::move(weights), std::move(lambdas),
                                         mode);
}

Operator block_diagonal(std::vector<Operator> maps) {
    return make<BlockDiagonalNode>(std::move(maps));
}

Operator block_select(std::vector<Operator> ops, std::vector<std::size_t> assignment) {
    return make<BlockSelectNode>(std::move(ops), std::move(assignment));
}

Operator complement(Operator op) { return make<ComplementNode>(std::move(op)); }

// ---------------------------------------------------------------------------
// JSON

json to_document(const Operator& op) {
    return {{"dims", op.structure().dims()}, {"operator", op.to_json()}};
}

namespace {

template <class T>
T field(const json& node, const char* key) {
    if (!node.is_object() || !node.contains(key))
        throw ParseError(std::string("operator node is missing '") + key + "'");
    try {
        return node.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("operator node field '") + key + "': " + e.what());
    }
}

std::vector<Operator> parse_children(const json& node, const BlockStructure& s) {
    auto children = field<json>(node, "children");
    if (!children.is_array() || children.empty())
        throw ParseError("'children' must be a nonempty array");
    std::vector<Operator> out;
    for (const auto& c : children)
        out.push_back(from_json(c, s));
    return out;
}

Operator single_child(const json& node, const BlockStructure& s) {
    auto children = parse_children(node, s);
    if (children.size() != 1)
        throw ParseError("'" + field<std::string>(node, "kind") + "' takes exactly one child");
    return children.front();
}

}  // namespace

Operator from_json(const json& node, const BlockStructure& structure) {
    if (!node.is_object())
        throw ParseError("operator node must be a JSON object");
    BlockStructure s = structure;
    if (node.contains("dims")) {
        BlockStructure own(field<std::vector<std::size_t>>(node, "dims"));
        if (own.total_dim() != structure.total_dim())
            throw ShapeError("node 'dims' disagree with the enclosing space");
        s = own;
    }
    auto kind = field<std::string>(node, "kind");

    if (kind == "identity")
        return identity(s);
    if (kind == "hyperplane")
        return hyperplane_projection(s, field<std::vector<double>>(node, "a"), field<double>(node, "b"));
    if (kind == "halfspace")
        return halfspace_projection(s, field<std::vector<double>>(node, "a"), field<double>(node, "b"));
    if (kind == "ball")
        return ball_projection(s, field<std::vector<double>>(node, "center"),
                               field<double>(node, "radius"));
    if (kind == "box")
        return box_projection(s, field<std::vector<double>>(node, "lo"),
                              field<std::vector<double>>(node, "hi"));
    if (kind == "affine")
        return affine_map(s, field<std::vector<std::vector<double>>>(node, "matrix"),
                          field<std::vector<double>>(node, "offset"));
    if (kind == "swap")
        return swap_blocks(s, field<std::size_t>(node, "first"), field<std::size_t>(node, "second"));
    if (kind == "contraction_example" || kind == "scaled_swap_example") {
        Operator op = kind == "contraction_example" ? contraction_example() : scaled_swap_example();
        if (op.structure() != s)
            throw ShapeError("'" + kind + "' acts on R x R (dims [1, 1])");
        return op;
    }
    if (kind == "relax")
        return relax(single_child(node, s), field<double>(node, "lambda"));
    if (kind == "cw_relax")
        return cw_relax(single_child(node, s), field<std::vector<double>>(node, "lambdas"));
    if (kind == "complement")
        return complement(single_child(node, s));
    if (kind == "convex_combination")
        return convex_combination(parse_children(node, s), field<std::vector<double>>(node, "weights"));
    if (kind == "componental_weighted") {
        bool strict = node.contains("strict") ? field<bool>(node, "strict") : true;
        return componental_weighted(
            parse_children(node, s),
            WeightMatrix::from_rows(field<std::vector<std::vector<double>>>(node, "weights")),
            field<std::vector<double>>(node, "lambdas"),
            strict ? Validation::strict : Validation::permissive);
    }
    if (kind == "block_diagonal") {
        auto children = field<json>(node, "children");
        if (!children.is_array() || children.size() != s.size())
            throw ParseError("block_diagonal needs one child per component");
        std::vector<Operator> maps;
        for (std::size_t j = 0; j < s.size(); ++j)
            maps.push_back(from_json(children[j], BlockStructure::single(s.dim(j))));
        return block_diagonal(std::move(maps));
    }
    if (kind == "block_select")
        return block_select(parse_children(node, s),
                            field<std::vector<std::size_t>>(node, "assignment"));
    throw ParseError("unknown operator kind '" + kind + "'");
}

Operator from_document(const json& doc) {
    if (!doc.is_object() || !doc.contains("dims") || !doc.contains("operator"))
        throw ParseError("operator document needs 'dims' and 'operator'");
    for (const auto& [key, value] : doc.items())
        if (key != "dims" && key != "operator")
            throw ParseError("unknown key '" + key + "' in operator document");
    std::vector<std::size_t> dims;
    try {
        dims = doc.at("dims").get<std::vector<std::size_t>>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("'dims': ") + e.what());
    }
    return from_json(doc.at("operator"), BlockStructure(std::move(dims)));
}

}  // namespace cfx

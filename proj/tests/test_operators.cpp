#include "cfx/errors.hpp"
#include "cfx/operators.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace cfx;

namespace {

ProductVector pv(const BlockStructure& s, std::vector<double> v) { return ProductVector(s, std::move(v)); }

std::vector<double> vals(const ProductVector& x) { return {x.values().begin(), x.values().end()}; }

void check_close(const ProductVector& a, const std::vector<double>& b, double tol = 1e-14) {
    REQUIRE(a.values().size() == b.size());
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(std::abs(a.values()[i] - b[i]) <= tol);
}

ProductVector random_point(const BlockStructure& s, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    ProductVector x(s);
    for (double& v : x.values()) v = u(rng);
    return x;
}

const BlockStructure kPlane = BlockStructure::scalar(2);

}  // namespace

TEST_CASE("atoms evaluate as defined") {
    CHECK(vals(identity(kPlane).apply(pv(kPlane, {3, -1}))) == std::vector<double>{3, -1});
    CHECK(vals(swap_blocks(kPlane, 0, 1).apply(pv(kPlane, {1, 5}))) == std::vector<double>{5, 1});
    CHECK(vals(contraction_example().apply(pv(kPlane, {0, 1}))) == std::vector<double>{3, 8});
    CHECK(vals(scaled_swap_example().apply(pv(kPlane, {1, 5}))) == std::vector<double>{2.5, 0.5});
}

TEST_CASE("apply_component agrees bit for bit with apply") {
    std::mt19937_64 rng(3);
    BlockStructure s({2, 1, 3});
    std::vector<Operator> ops{
        identity(s),
        hyperplane_projection(s, {1, 2, 0, -1, 3, 1}, 4.0),
        ball_projection(s, {0, 0, 0, 0, 0, 0}, 2.0),
        relax(halfspace_projection(s, {1, 1, 1, 1, 1, 1}, 0.0), 1.5),
        cw_relax(box_projection(s, {-1, -1, -1, -1, -1, -1}, {1, 1, 1, 1, 1, 1}), {0.5, 1.0, 2.0}),
        complement(hyperplane_projection(s, {1, 0, 0, 0, 0, 1}, 1.0)),
    };
    for (const auto& op : ops)
        for (int t = 0; t < 20; ++t) {
            ProductVector x = random_point(s, rng);
            ProductVector tx = op.apply(x);
            for (std::size_t j = 0; j < s.size(); ++j) {
                Block c = op.apply_component(x, j);
                auto b = tx.block(j);
                CHECK(std::equal(c.begin(), c.end(), b.begin(), b.end()));
            }
        }
    CHECK(contraction_example().apply_component(pv(kPlane, {6, 0}), 0) == Block{6.0});
    CHECK(swap_blocks(kPlane, 0, 1).apply_component(pv(kPlane, {1, 5}), 0) == Block{5.0});
}

TEST_CASE("apply checks the space") {
    Operator t = identity(kPlane);
    CHECK_THROWS_AS(t.apply(ProductVector(BlockStructure({2}))), ShapeError);
    CHECK_THROWS_AS(t.apply_component(pv(kPlane, {0, 0}), 2), IndexError);
}

TEST_CASE("hyperplane projection") {
    std::vector<double> a{1, 1}, z{0, 0};
    CHECK(project_hyperplane(a, 2.0, z) == std::vector<double>{1, 1});
    std::vector<double> on{0.5, 1.5};
    CHECK(project_hyperplane(a, 2.0, on) == on);
    std::vector<double> a2{3, 4}, z2{3, 4};
    auto p = project_hyperplane(a2, 0.0, z2);
    CHECK(std::abs(p[0]) < 1e-15);
    CHECK(std::abs(p[1]) < 1e-15);
    std::vector<double> zero{0, 0};
    CHECK_THROWS_AS(project_hyperplane(zero, 1.0, z), DegenerateConstraintError);
    CHECK_THROWS_AS(hyperplane_projection(kPlane, {0, 0}, 1.0), ParameterError);
}

TEST_CASE("set projections") {
    Operator ball = ball_projection(BlockStructure::single(2), {0, 0}, 1.0);
    BlockStructure s = BlockStructure::single(2);
    check_close(ball.apply(pv(s, {2, 0})), {1, 0});
    CHECK(vals(ball.apply(pv(s, {0.3, -0.2}))) == std::vector<double>{0.3, -0.2});
    CHECK_THROWS_AS(ball_projection(s, {0, 0}, 0.0), ParameterError);

    Operator half = halfspace_projection(s, {1, 0}, 1.0);
    CHECK(vals(half.apply(pv(s, {0, 4}))) == std::vector<double>{0, 4});
    check_close(half.apply(pv(s, {3, 4})), {1, 4});

    Operator box = box_projection(s, {-1, 0}, {1, 2});
    CHECK(vals(box.apply(pv(s, {-3, 5}))) == std::vector<double>{-1, 2});
    CHECK_THROWS(box_projection(s, {1, 0}, {0, 2}));
}

TEST_CASE("relaxation") {
    Operator p = hyperplane_projection(kPlane, {1, 1}, 2.0);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 10; ++t) {
        ProductVector x = random_point(kPlane, rng);
        CHECK(relax(p, 0.0).apply(x) == x);
        check_close(relax(p, 1.0).apply(x), vals(p.apply(x)));
        CHECK(cw_relax(p, {0.0, 0.0}).apply(x) == x);
        check_close(cw_relax(p, {1.0, 1.0}).apply(x), vals(p.apply(x)));
    }
    // z + 2 (P z - z) with P z = (1, 1)
    check_close(relax(p, 2.0).apply(pv(kPlane, {0, 0})), {2, 2});
    check_close(cw_relax(p, {2.0, 0.0}).apply(pv(kPlane, {0, 0})), {2, 0});
    CHECK_THROWS_AS(relax(p, -0.1), ParameterError);
    CHECK_THROWS_AS(cw_relax(p, {1.0, -1.0}), ParameterError);
    CHECK_THROWS_AS(cw_relax(p, {1.0}), ShapeError);
}

TEST_CASE("convex combination") {
    BlockStructure line = BlockStructure::single(1);
    Operator p0 = hyperplane_projection(line, {1}, 0.0);
    Operator p2 = hyperplane_projection(line, {1}, 2.0);
    check_close(convex_combination({p0, p2}, {0.5, 0.5}).apply(pv(line, {0})), {1});
    ProductVector x = pv(line, {7});
    CHECK(convex_combination({p2}, {1.0}).apply(x) == p2.apply(x));
    CHECK(convex_combination({identity(line), identity(line)}, {0.5, 0.5}).apply(x) == x);
    CHECK_THROWS(convex_combination({p0, p2}, {0.5, 0.6}));
    CHECK_THROWS(convex_combination({p0, p2}, {1.5, -0.5}));
}

TEST_CASE("weight matrix validation") {
    CHECK_THROWS_AS(WeightMatrix(2, 2, {1, -1, 0, 2}), WeightError);
    CHECK_THROWS_AS(WeightMatrix(2, 2, {1, 0, 0, 0}), WeightError);
    CHECK_THROWS_AS(WeightMatrix(1, 1, {std::numeric_limits<double>::quiet_NaN()}), WeightError);
    WeightMatrix w = WeightMatrix::from_rows({{0.5, 1.0}, {0.5, 0.0}});
    CHECK(w.normalized());
    CHECK(w.column_sum(0) == 1.0);
    WeightMatrix u = WeightMatrix::from_rows({{0.25, 0.5}, {0.25, 0.5}});
    CHECK_FALSE(u.normalized());
    CHECK(u.max_column_sum() == 1.0);
    std::vector<double> b{0.2, 0.8};
    WeightMatrix br = WeightMatrix::broadcast(b, 3);
    CHECK(br(1, 2) == 0.8);
    CHECK(br.normalized());
}

TEST_CASE("componental weighted combination") {
    BlockStructure s = BlockStructure::scalar(3);
    Operator p = hyperplane_projection(s, {1, 2, 3}, 6.0);
    ProductVector x = pv(s, {1, -1, 4});
    WeightMatrix ones = WeightMatrix::from_rows({{1, 1, 1}});
    check_close(componental_weighted({p}, ones, {1, 1, 1}).apply(x), vals(p.apply(x)));
    CHECK(componental_weighted({p}, ones, {0, 0, 0}, Validation::permissive).apply(x) == x);
    CHECK_THROWS_AS(componental_weighted({p}, ones, {0, 0, 0}), ParameterError);

    // Strict mode admits lambda_j up to 2 / w_.j.
    WeightMatrix half = WeightMatrix::from_rows({{0.5, 0.5, 0.5}});
    CHECK_NOTHROW(componental_weighted({p}, half, {4, 4, 4}));
    CHECK_THROWS_AS(componental_weighted({p}, half, {4.5, 1, 1}), ParameterError);
    CHECK_NOTHROW(componental_weighted({p}, half, {4.5, 1, 1}, Validation::permissive));
    CHECK_THROWS_AS(componental_weighted({p}, WeightMatrix::from_rows({{1, 1}}), {1, 1, 1}),
                    ShapeError);
}

TEST_CASE("componental weighted step over a 2x2 system matches direct evaluation") {
    // A = [[1, 0], [1, 1]], b = (1, 3), s = (2, 1), support-normalized weights.
    BlockStructure s = BlockStructure::scalar(2);
    Operator h1 = hyperplane_projection(s, {1, 0}, 1.0);
    Operator h2 = hyperplane_projection(s, {1, 1}, 3.0);
    WeightMatrix w = WeightMatrix::from_rows({{0.5, 0.0}, {0.5, 1.0}});
    ProductVector out = componental_weighted({h1, h2}, w, {1, 1}).apply(pv(s, {0, 0}));
    // r = (1/1, 3/2); x_j += (1/s_j) sum_i r_i a_ij
    const double x0 = (1.0 * 1.0 + 1.5 * 1.0) / 2.0;
    const double x1 = (1.5 * 1.0) / 1.0;
    check_close(out, {x0, x1});
}

TEST_CASE("block diagonal and block select") {
    BlockStructure line = BlockStructure::single(1);
    Operator u1 = affine_map(line, {{0.5}}, {3.0});
    Operator u2 = affine_map(line, {{8.0}}, {0.0});
    Operator t = block_diagonal({u1, u2});
    Operator ref = contraction_example();
    std::mt19937_64 rng(9);
    for (int k = 0; k < 20; ++k) {
        ProductVector x = random_point(kPlane, rng);
        CHECK(t.apply(x) == ref.apply(x));
        ProductVector y = x;
        y.block(1)[0] += 17.0;
        CHECK(t.apply_component(y, 0) == t.apply_component(x, 0));
    }
    Operator ids = block_diagonal({identity(line), identity(line)});
    ProductVector x = pv(kPlane, {2, 3});
    CHECK(ids.apply(x) == x);

    Operator p = hyperplane_projection(kPlane, {1, 1}, 2.0);
    check_close(block_select({p, identity(kPlane)}, {0, 1}).apply(pv(kPlane, {0, 0})), {1, 0});
    CHECK(block_select({p}, {0, 0}).apply(x) == p.apply(x));
    CHECK_THROWS(block_select({p}, {0, 1}));
    CHECK_THROWS(block_select({p}, {0}));
}

TEST_CASE("complement is identity minus the operator") {
    Operator p = hyperplane_projection(kPlane, {1, 1}, 2.0);
    ProductVector x = pv(kPlane, {4, 0});
    ProductVector px = p.apply(x);
    check_close(complement(p).apply(x), {4 - px.values()[0], 0 - px.values()[1]});
}

TEST_CASE("operator documents round trip") {
    BlockStructure s({1, 2});
    Operator h = hyperplane_projection(s, {1, -1, 2}, 0.5);
    Operator op = componental_weighted({h, relax(ball_projection(s, {0, 0, 0}, 1.0), 1.5)},
                                       WeightMatrix::from_rows({{0.5, 0.25}, {0.5, 0.75}}),
                                       {1.0, 1.2});
    auto doc = to_document(op);
    Operator back = from_document(doc);
    CHECK(to_document(back) == doc);
    std::mt19937_64 rng(1);
    for (int t = 0; t < 10; ++t) {
        ProductVector x = random_point(s, rng);
        CHECK(back.apply(x) == op.apply(x));
    }
}

TEST_CASE("operator documents reject malformed input") {
    using nlohmann::json;
    CHECK_THROWS_AS(from_document(json{{"dims", {1, 1}}}), ParseError);
    CHECK_THROWS_AS(from_document(json{{"dims", {1, 1}}, {"operator", {{"kind", "nope"}}}}),
                    ParseError);
    CHECK_THROWS_AS(from_document(json{{"dims", {1, 1}},
                                       {"operator", {{"kind", "identity"}}},
                                       {"extra", 1}}),
                    ParseError);
    CHECK_THROWS(from_document(json::parse(
        R"({"dims":[2],"operator":{"kind":"hyperplane","a":[0,0],"b":1}})")));
    Operator swap = from_document(json::parse(
        R"({"dims":[1,1],"operator":{"kind":"swap","first":0,"second":1}})"));
    CHECK(vals(swap.apply(pv(kPlane, {1, 5}))) == std::vector<double>{5, 1});
    Operator diag = from_document(json::parse(
        R"({"dims":[1,1],"operator":{"kind":"block_diagonal","children":[
            {"kind":"affine","matrix":[[0.5]],"offset":[3]},
            {"kind":"affine","matrix":[[8]],"offset":[0]}]}})"));
    CHECK(diag.apply(pv(kPlane, {0, 1})) == contraction_example().apply(pv(kPlane, {0, 1})));
}

#include "cfx/errors.hpp"
#include "cfx/problems.hpp"
#include "cfx/property_checks.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace cfx;

namespace {

LinearSystem lower_2x2() { return LinearSystem::from_dense({{1, 0}, {1, 1}}, {1, 3}); }

}  // namespace

TEST_CASE("linear system storage") {
    LinearSystem sys(2, 3, {{0, 1, 2.0}, {1, 0, 1.0}, {0, 1, 1.0}, {1, 2, 0.0}, {1, 2, -4.0}},
                     {3.0, 1.0});
    CHECK(sys.nonzeros() == 3);
    CHECK(sys.dense_row(0) == std::vector<double>{0, 3, 0});
    CHECK(sys.dense_row(1) == std::vector<double>{1, 0, -4});
    CHECK(sys.row_norm_sq(1) == 17.0);
    std::vector<double> x{1, 1, 1};
    CHECK(sys.row_dot(0, x) == 3.0);
    CHECK(sys.residual(x) == std::vector<double>{0.0, 4.0});
    CHECK(sys.residual_norm(x) == 4.0);
    CHECK(sys.relative_residual(x) == doctest::Approx(4.0 / (1.0 + std::sqrt(10.0))));
}

TEST_CASE("row norms match recomputation") {
    auto planted = plant_consistent_system(30, 20, 0.3, 4);
    const auto& sys = planted.system;
    for (std::size_t i = 0; i < sys.rows(); ++i) {
        double s = 0.0;
        for (double v : sys.dense_row(i)) s += v * v;
        CHECK(std::abs(sys.row_norm_sq(i) - s) <= 1e-14 * s);
    }
}

TEST_CASE("linear system rejects bad input") {
    CHECK_THROWS_AS(LinearSystem::from_dense({{0, 0}, {1, 1}}, {0, 1}), DegenerateConstraintError);
    CHECK_THROWS_AS(LinearSystem(2, 2, {{2, 0, 1.0}, {1, 1, 1.0}}, {1, 1}), IndexError);
    CHECK_THROWS_AS(LinearSystem::from_dense({{1, 0}, {0, 1}}, {1}), ShapeError);
    CHECK_THROWS(LinearSystem::from_dense({{1, 0}, {0, 1, 2}}, {1, 1}));
}

TEST_CASE("column sparsity counts structural nonzeros") {
    CHECK(column_sparsity(LinearSystem::from_dense({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {1, 1, 1}))
              .counts() == std::vector<std::size_t>{1, 1, 1});
    CHECK(column_sparsity(LinearSystem::from_dense({{1, 2, 3}, {4, 5, 6}}, {1, 1})).counts() ==
          std::vector<std::size_t>{2, 2, 2});
    CHECK(column_sparsity(lower_2x2()).counts() == std::vector<std::size_t>{2, 1});
    CHECK_THROWS_AS(column_sparsity(LinearSystem::from_dense({{1, 0}, {2, 0}}, {1, 2})),
                    DegenerateColumnError);
    CHECK_THROWS_AS(SparsityProfile({1, 0}), DegenerateColumnError);
}

TEST_CASE("drop weights") {
    auto sys = lower_2x2();
    auto s = column_sparsity(sys);
    WeightMatrix w = drop_weights(sys, s);
    CHECK(w(0, 0) == 0.5);
    CHECK(w(1, 0) == 0.5);
    CHECK(w(0, 1) == 0.0);
    CHECK(w(1, 1) == 1.0);
    CHECK(w.normalized());

    WeightMatrix e = drop_weights(sys, s, RowWeightsOverSparsity{{0.5, 0.5}});
    CHECK(e(0, 0) == 0.25);
    CHECK(e(1, 0) == 0.25);
    CHECK(e(0, 1) == 0.5);
    CHECK(e(1, 1) == 0.5);
    CHECK(e.column_sum(0) == 0.5);
    CHECK(e.column_sum(1) == 1.0);
    CHECK_FALSE(e.normalized());

    CHECK_THROWS_AS(drop_weights(sys, s, RowWeightsOverSparsity{{0.7, 0.7}}), ParameterError);
    CHECK_THROWS_AS(drop_weights(sys, s, RowWeightsOverSparsity{{1.0}}), ParameterError);

    auto eye = LinearSystem::from_dense({{2, 0, 0}, {0, 3, 0}, {0, 0, 4}}, {1, 1, 1});
    WeightMatrix we = drop_weights(eye, column_sparsity(eye));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(we(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("support-normalized columns sum to one on generated systems") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto p = plant_consistent_system(40, 25, 0.15, seed);
        WeightMatrix w = drop_weights(p.system, column_sparsity(p.system));
        for (double c : w.column_sums()) CHECK(std::abs(c - 1.0) <= 1e-14);
    }
}

TEST_CASE("planted systems") {
    auto p = plant_consistent_system(200, 100, 0.05, kDefaultSeed);
    const auto& sys = p.system;
    double bnorm = 0.0;
    for (double v : sys.rhs()) bnorm += v * v;
    CHECK(sys.residual_norm(p.solution) <= 1e-12 * std::sqrt(bnorm));
    auto s = column_sparsity(sys);
    // Recorded from the shipped default seed.
    CHECK(s.max() == 17);
    CHECK(sys.nonzeros() == 966);
    for (double v : p.solution) CHECK(std::abs(v) <= 10.0);

    auto dense = plant_consistent_system(7, 5, 1.0, 3);
    const auto dense_s = column_sparsity(dense.system);
    for (auto c : dense_s.counts()) CHECK(c == 7);

    auto again = plant_consistent_system(200, 100, 0.05, kDefaultSeed);
    CHECK(again.solution == p.solution);
    CHECK(again.system.rhs() == sys.rhs());

    CHECK_THROWS_AS(plant_consistent_system(50, 50, 1e-6, 1), GenerationError);
    CHECK_THROWS_AS(plant_consistent_system(5, 5, 0.0, 1), ParameterError);
    CHECK_THROWS_AS(plant_consistent_system(5, 5, 1.5, 1), ParameterError);
}

TEST_CASE("matrix market round trip") {
    auto p = plant_consistent_system(12, 9, 0.3, 8);
    std::stringstream mm, rhs;
    write_matrix_market(mm, p.system);
    write_dense_vector(rhs, p.system.rhs());
    LinearSystem back = read_linear_system(mm, rhs);
    CHECK(back.rows() == 12);
    CHECK(back.cols() == 9);
    CHECK(back.rhs() == p.system.rhs());
    for (std::size_t i = 0; i < 12; ++i) CHECK(back.dense_row(i) == p.system.dense_row(i));
}

TEST_CASE("matrix market reader") {
    std::istringstream mm("%%MatrixMarket matrix coordinate integer general\n% comment\n2 2 3\n1 1 "
                          "2\n2 1 1\n2 2 1\n");
    std::istringstream b("2\n3\n");
    LinearSystem sys = read_linear_system(mm, b);
    CHECK(sys.dense_row(0) == std::vector<double>{2, 0});
    CHECK(sys.rhs() == std::vector<double>{2, 3});

    auto fails = [](const std::string& m, const std::string& r) {
        std::istringstream ms(m), rs(r);
        return read_linear_system(ms, rs);
    };
    CHECK_THROWS_AS(fails("", "1\n"), ParseError);
    CHECK_THROWS_AS(fails("%%MatrixMarket matrix array real general\n1 1\n1\n", "1\n"), ParseError);
    CHECK_THROWS_AS(fails("%%MatrixMarket matrix coordinate real symmetric\n1 1 1\n1 1 1\n", "1\n"),
                    ParseError);
    CHECK_THROWS_AS(fails("%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1\n", "1\n"),
                    ParseError);
    CHECK_THROWS_AS(fails("%%MatrixMarket matrix coordinate real general\n1 1 1\n2 1 1\n", "1\n"),
                    ParseError);
    CHECK_THROWS_AS(fails("%%MatrixMarket matrix coordinate real general\n2 1 2\n1 1 1\n2 1 1\n",
                          "1\n"),
                    ParseError);
    CHECK_THROWS_AS(fails("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 x\n", "1\n"),
                    ParseError);
}

TEST_CASE("convex feasibility instances") {
    BlockStructure s({2});
    CfpInstance inst(s, {HyperplaneSet{{1, 1}, 2.0}, BallSet{{0, 0}, 2.0}, BoxSet{{0, 0}, {3, 3}},
                         HalfspaceSet{{1, -1}, 0.5}},
                     ProductVector(s, {1, 1}));
    auto ops = cfp_projection_operators(inst);
    REQUIRE(ops.size() == 4);
    CHECK(ops[1].apply(ProductVector(s, {0.5, 0.5})) == ProductVector(s, {0.5, 0.5}));

    BallSet unit{{0, 0}, 1.0};
    CfpInstance ball(s, {unit});
    auto p = cfp_projection_operators(ball)[0].apply(ProductVector(s, {2, 0}));
    CHECK(p.values()[0] == doctest::Approx(1.0));
    CHECK(p.values()[1] == 0.0);

    Sampler sampler = Sampler::uniform(21, -10, 10, 300);
    FixedPointCertificate cert{{*inst.planted()}};
    for (const auto& op : ops) CHECK(check_cutter(op, Scope::whole(), cert, sampler).passed());

    CHECK_THROWS_AS(CfpInstance(s, {HyperplaneSet{{1, 1}, 2.0}}, ProductVector(s, {0, 0})),
                    ParameterError);
    CHECK_THROWS_AS(cfp_projection_operators(CfpInstance(s, {HyperplaneSet{{0, 0}, 1.0}})),
                    ParameterError);
    CHECK_THROWS_AS(cfp_projection_operators(CfpInstance(s, {BallSet{{0, 0}, -1.0}})),
                    ParameterError);
    CHECK(membership_violation(unit, std::vector<double>{3, 0}) == doctest::Approx(2.0));
    CHECK(membership_violation(unit, std::vector<double>{0.5, 0}) == 0.0);
}

TEST_CASE("convex feasibility documents") {
    auto doc = nlohmann::json::parse(R"({"dims":[1,1],"sets":[
        {"kind":"hyperplane","a":[1,1],"b":2},
        {"kind":"halfspace","a":[1,0],"b":1.5},
        {"kind":"ball","center":[0,0],"radius":3},
        {"kind":"box","lo":[-1,-1],"hi":[2,2]}],"planted":[1,1]})");
    CfpInstance inst = cfp_from_json(doc);
    CHECK(inst.sets().size() == 4);
    CHECK(cfp_to_json(inst) == doc);
    auto bad = doc;
    bad["sets"][0]["extra"] = 1;
    CHECK_THROWS_AS(cfp_from_json(bad), ParseError);
    auto bad_kind = doc;
    bad_kind["sets"][0]["kind"] = "simplex";
    CHECK_THROWS_AS(cfp_from_json(bad_kind), ParseError);
    auto outside = doc;
    outside["planted"] = {5, 5};
    CHECK_THROWS_AS(cfp_from_json(outside), ParameterError);
}

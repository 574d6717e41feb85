#include "cfx/errors.hpp"
#include "cfx/product_space.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace cfx;

TEST_CASE("block structure offsets and dimensions") {
    BlockStructure s({2, 3, 1});
    CHECK(s.size() == 3);
    CHECK(s.total_dim() == 6);
    CHECK(s.offset(0) == 0);
    CHECK(s.offset(1) == 2);
    CHECK(s.offset(2) == 5);
    CHECK(s.dim(1) == 3);
    CHECK(BlockStructure::scalar(4).dims() == std::vector<std::size_t>{1, 1, 1, 1});
    CHECK(BlockStructure::single(5).dims() == std::vector<std::size_t>{5});
}

TEST_CASE("block structure rejects degenerate shapes") {
    CHECK_THROWS_AS(BlockStructure(std::vector<std::size_t>{}), ShapeError);
    CHECK_THROWS_AS(BlockStructure({2, 0}), ShapeError);
    BlockStructure s({1, 1});
    CHECK_THROWS_AS(s.check_index(2), IndexError);
    CHECK_NOTHROW(s.check_index(1));
}

TEST_CASE("product vector blocks view contiguous storage") {
    BlockStructure s({2, 1});
    ProductVector x(s, {1.0, 2.0, 3.0});
    CHECK(x.block(0).size() == 2);
    CHECK(x.block(1)[0] == 3.0);
    x.block(0)[1] = 7.0;
    CHECK(x.values()[1] == 7.0);
    CHECK(x.block_copy(0) == Block{1.0, 7.0});
    CHECK_THROWS_AS(ProductVector(s, {1.0, 2.0}), ShapeError);
    CHECK_THROWS_AS(x.block(2), IndexError);
    ProductVector zero(s);
    for (double v : zero.values()) CHECK(v == 0.0);
}

TEST_CASE("finiteness is reported, not enforced") {
    BlockStructure s({1, 1});
    ProductVector x(s, {1.0, std::numeric_limits<double>::infinity()});
    CHECK_FALSE(x.all_finite());
    CHECK(ProductVector(s, {1.0, 2.0}).all_finite());
}

TEST_CASE("inner product sums blockwise inner products") {
    BlockStructure s({2, 1});
    ProductVector x(s, {1.0, 2.0, 3.0});
    ProductVector y(s, {4.0, -1.0, 0.5});
    CHECK(inner(x, y) == doctest::Approx(4.0 - 2.0 + 1.5));
    CHECK(norm(x) == doctest::Approx(std::sqrt(14.0)));
    CHECK(component_norm(x, 0) == doctest::Approx(std::sqrt(5.0)));
    CHECK(component_norm(x, 1) == doctest::Approx(3.0));
    CHECK_THROWS_AS(component_norm(x, 3), IndexError);
    ProductVector other(BlockStructure({1, 2}), {1.0, 2.0, 3.0});
    CHECK_THROWS_AS(inner(x, other), ShapeError);
}

TEST_CASE("squared norm splits over components") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    BlockStructure s({3, 1, 4});
    for (int t = 0; t < 50; ++t) {
        ProductVector x(s);
        for (double& v : x.values()) v = u(rng);
        double sum = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j) sum += component_norm(x, j) * component_norm(x, j);
        CHECK(norm(x) * norm(x) == doctest::Approx(sum).epsilon(1e-14));
    }
}

TEST_CASE("axpy_block touches only block j") {
    BlockStructure s({2, 2});
    ProductVector x(s, {1.0, 1.0, 1.0, 1.0});
    std::vector<double> d{2.0, -2.0};
    ProductVector y = axpy_block(x, 1, 0.5, d);
    CHECK(y.block_copy(0) == Block{1.0, 1.0});
    CHECK(y.block_copy(1) == Block{2.0, 0.0});
    std::vector<double> wrong{1.0};
    CHECK_THROWS_AS(axpy_block(x, 1, 1.0, wrong), ShapeError);
    ProductVector diff = difference(y, x);
    CHECK(diff.values()[2] == 1.0);
    CHECK(diff.values()[0] == 0.0);
}

TEST_CASE("vector text round trip is exact") {
    BlockStructure s({1, 2});
    ProductVector x(s, {0.1, -1.0 / 3.0, 1e-300});
    std::stringstream io;
    write_vector(io, x);
    CHECK(io.str().substr(0, 4) == "1 2\n");
    ProductVector back = read_vector(io);
    CHECK(back == x);
}

TEST_CASE("vector reader rejects malformed input") {
    std::istringstream empty("");
    CHECK_THROWS_AS(read_vector(empty), ParseError);
    std::istringstream bad_dims("1 x\n1 2\n");
    CHECK_THROWS_AS(read_vector(bad_dims), ParseError);
    std::istringstream zero_dim("0\n\n");
    CHECK_THROWS_AS(read_vector(zero_dim), ParseError);
    std::istringstream bad_value("2\n1 abc\n");
    CHECK_THROWS_AS(read_vector(bad_value), ParseError);
    std::istringstream nan_value("1\nnan\n");
    CHECK_THROWS_AS(read_vector(nan_value), ParseError);
    std::istringstream short_values("2\n1\n");
    CHECK_THROWS(read_vector(short_values));
}

TEST_CASE("format_double keeps 17 significant digits") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(6.0) == "6");
    CHECK(std::stod(format_double(1.0 / 7.0)) == 1.0 / 7.0);
}

#include "cfx/product_space.hpp"

#include "cfx/errors.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace cfx {

BlockStructure::BlockStructure(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty())
        throw ShapeError("block structure needs at least one component");
    offsets_.reserve(dims_.size() + 1);
    offsets_.push_back(0);
    for (auto d : dims_) {
        if (d == 0)
            throw ShapeError("block dimensions must be positive");
        offsets_.push_back(offsets_.back() + d);
    }
}

BlockStructure BlockStructure::scalar(std::size_t n) {
    return BlockStructure(std::vector<std::size_t>(n, 1));
}

BlockStructure BlockStructure::single(std::size_t d) {
    return BlockStructure(std::vector<std::size_t>{d});
}

void BlockStructure::check_index(std::size_t j) const {
    if (j >= dims_.size())
        throw IndexError("component index " + std::to_string(j) + " out of range for " +
                         std::to_string(dims_.size()) + " components");
}

std::size_t BlockStructure::dim(std::size_t j) const {
    check_index(j);
    return dims_[j];
}

std::size_t BlockStructure::offset(std::size_t j) const {
    check_index(j);
    return offsets_[j];
}

ProductVector::ProductVector(BlockStructure structure)
    : structure_(std::move(structure)), values_(structure_.total_dim(), 0.0) {}

ProductVector::ProductVector(BlockStructure structure, std::vector<double> values)
    : structure_(std::move(structure)), values_(std::move(values)) {
    if (values_.size() != structure_.total_dim())
        throw ShapeError("vector has " + std::to_string(values_.size()) +
                         " coordinates, structure expects " +
                         std::to_string(structure_.total_dim()));
}

std::span<const double> ProductVector::block(std::size_t j) const {
    return std::span<const double>(values_).subspan(structure_.offset(j), structure_.dim(j));
}

std::span<double> ProductVector::block(std::size_t j) {
    return std::span<double>(values_).subspan(structure_.offset(j), structure_.dim(j));
}

Block ProductVector::block_copy(std::size_t j) const {
    auto b = block(j);
    return Block(b.begin(), b.end());
}

bool ProductVector::all_finite() const noexcept {
    for (double v : values_)
        if (!std::isfinite(v))
            return false;
    return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ShapeError("dot product of vectors with different lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ShapeError("distance between vectors with different lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

namespace {

void require_same(const ProductVector& x, const ProductVector& y) {
    if (x.structure() != y.structure())
        throw ShapeError("operands live in different product spaces");
}

}  // namespace

double inner(const ProductVector& x, const ProductVector& y) {
    require_same(x, y);
    double s = 0.0;
    for (std::size_t j = 0; j < x.num_blocks(); ++j)
        s += dot(x.block(j), y.block(j));
    return s;
}

double norm(const ProductVector& x) { return std::sqrt(inner(x, x)); }

double component_norm(const ProductVector& x, std::size_t j) { return norm2(x.block(j)); }

ProductVector axpy_block(const ProductVector& x, std::size_t j, double scale,
                         std::span<const double> direction) {
    if (direction.size() != x.structure().dim(j))
        throw ShapeError("direction length does not match block " + std::to_string(j));
    ProductVector out = x;
    auto b = out.block(j);
    for (std::size_t i = 0; i < b.size(); ++i)
        b[i] += scale * direction[i];
    return out;
}

ProductVector difference(const ProductVector& x, const ProductVector& y) {
    require_same(x, y);
    ProductVector out = x;
    auto o = out.values();
    auto v = y.values();
    for (std::size_t i = 0; i < o.size(); ++i)
        o[i] -= v[i];
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_vector(std::ostream& out, const ProductVector& x) {
    const auto& dims = x.structure().dims();
    for (std::size_t j = 0; j < dims.size(); ++j)
        out << (j ? " " : "") << dims[j];
    out << '\n';
    auto v = x.values();
    for (std::size_t i = 0; i < v.size(); ++i)
        out << (i ? " " : "") << format_double(v[i]);
    out << '\n';
}

ProductVector read_vector(std::istream& in) {
    std::string dims_line, values_line;
    if (!std::getline(in, dims_line))
        throw ParseError("vector file: missing dims line");
    if (!std::getline(in, values_line))
        values_line.clear();

    std::vector<std::size_t> dims;
    {
        std::istringstream ds(dims_line);
        long long d;
        while (ds >> d) {
            if (d <= 0)
                throw ParseError("vector file: block dimensions must be positive");
            dims.push_back(static_cast<std::size_t>(d));
        }
        if (!ds.eof())
            throw ParseError("vector file: malformed dims line");
    }
    if (dims.empty())
        throw ParseError("vector file: empty dims line");

    std::vector<double> values;
    {
        std::istringstream vs(values_line);
        std::string tok;
        while (vs >> tok) {
            std::size_t used = 0;
            double v;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                throw ParseError("vector file: bad coordinate '" + tok + "'");
            }
            if (used != tok.size() || !std::isfinite(v))
                throw ParseError("vector file: bad coordinate '" + tok + "'");
            values.push_back(v);
        }
    }
    BlockStructure structure(std::move(dims));
    if (values.size() != structure.total_dim())
        throw ParseError("vector file: expected " + std::to_string(structure.total_dim()) +
                         " coordinates, found " + std::to_string(values.size()));
    return ProductVector(std::move(structure), std::move(values));
}

}  // namespace cfx

#include "cfx/problems.hpp"

#include "cfx/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace cfx {

using nlohmann::json;

// ---------------------------------------------------------------------------
// LinearSystem

LinearSystem::LinearSystem(std::size_t rows, std::size_t cols, std::vector<Triplet> entries,
                           std::vector<double> rhs)
    : rows_(rows), cols_(cols), rhs_(std::move(rhs)) {
    if (rows_ == 0 || cols_ == 0)
        throw ShapeError("linear system needs m >= 1 and n >= 1");
    if (rhs_.size() != rows_)
        throw ShapeError("right-hand side length " + std::to_string(rhs_.size()) +
                         " does not match m = " + std::to_string(rows_));
    for (double v : rhs_)
        if (!std::isfinite(v))
            throw ParameterError("right-hand side entries must be finite");
    for (const auto& t : entries) {
        if (t.row >= rows_ || t.col >= cols_)
            throw IndexError("matrix entry (" + std::to_string(t.row) + ", " +
                             std::to_string(t.col) + ") outside " + std::to_string(rows_) + "x" +
                             std::to_string(cols_));
        if (!std::isfinite(t.value))
            throw ParameterError("matrix entries must be finite");
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    row_ptr_.assign(rows_ + 1, 0);
    for (std::size_t k = 0; k < entries.size();) {
        std::size_t r = entries[k].row, c = entries[k].col;
        double v = 0.0;
        for (; k < entries.size() && entries[k].row == r && entries[k].col == c; ++k)
            v += entries[k].value;
        if (v != 0.0) {
            entries_.push_back({c, v});
            ++row_ptr_[r + 1];
        }
    }
    for (std::size_t i = 0; i < rows_; ++i)
        row_ptr_[i + 1] += row_ptr_[i];

    row_norm_sq_.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (const auto& e : row(i))
            s += e.value * e.value;
        if (s == 0.0)
            throw DegenerateConstraintError("row " + std::to_string(i) + " of A is zero");
        row_norm_sq_[i] = s;
    }
}

LinearSystem LinearSystem::from_dense(const std::vector<std::vector<double>>& a,
                                      std::vector<double> rhs) {
    if (a.empty())
        throw ShapeError("dense matrix has no rows");
    std::size_t n = a.front().size();
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != n)
            throw ShapeError("ragged dense matrix");
        for (std::size_t j = 0; j < n; ++j)
            if (a[i][j] != 0.0)
                t.push_back({i, j, a[i][j]});
    }
    return LinearSystem(a.size(), n, std::move(t), std::move(rhs));
}

std::span<const RowEntry> LinearSystem::row(std::size_t i) const {
    if (i >= rows_)
        throw IndexError("row index out of range");
    return std::span<const RowEntry>(entries_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
}

std::vector<double> LinearSystem::dense_row(std::size_t i) const {
    std::vector<double> out(cols_, 0.0);
    for (const auto& e : row(i))
        out[e.col] = e.value;
    return out;
}

double LinearSystem::row_dot(std::size_t i, std::span<const double> x) const {
    double s = 0.0;
    for (const auto& e : row(i))
        s += e.value * x[e.col];
    return s;
}

std::vector<double> LinearSystem::residual(std::span<const double> x) const {
    if (x.size() != cols_)
        throw ShapeError("vector length does not match the number of unknowns");
    std::vector<double> r(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        r[i] = rhs_[i] - row_dot(i, x);
    return r;
}

double LinearSystem::residual_norm(std::span<const double> x) const { return norm2(residual(x)); }

double LinearSystem::relative_residual(std::span<const double> x) const {
    return residual_norm(x) / (1.0 + norm2(rhs_));
}

std::vector<Triplet> LinearSystem::triplets() const {
    std::vector<Triplet> out;
    out.reserve(entries_.size());
    for (std::size_t i = 0; i < rows_; ++i)
        for (const auto& e : row(i))
            out.push_back({i, e.col, e.value});
    return out;
}

// ---------------------------------------------------------------------------
// Sparsity and weights

SparsityProfile::SparsityProfile(std::vector<std::size_t> counts) : counts_(std::move(counts)) {
    for (std::size_t j = 0; j < counts_.size(); ++j)
        if (counts_[j] == 0)
            throw DegenerateColumnError("column " + std::to_string(j) + " of A has no nonzero");
}

std::size_t SparsityProfile::max() const {
    return counts_.empty() ? 0 : *std::max_element(counts_.begin(), counts_.end());
}

SparsityProfile column_sparsity(const LinearSystem& system) {
    std::vector<std::size_t> s(system.cols(), 0);
    for (std::size_t i = 0; i < system.rows(); ++i)
        for (const auto& e : system.row(i))
            ++s[e.col];
    return SparsityProfile(std::move(s));
}

WeightMatrix drop_weights(const LinearSystem& system, const SparsityProfile& s,
                          const DropWeightScheme& scheme) {
    std::size_t m = system.rows(), n = system.cols();
    if (s.size() != n)
        throw ShapeError("sparsity profile length does not match the number of unknowns");
    std::vector<double> w(m * n, 0.0);
    if (std::holds_alternative<SupportNormalized>(scheme)) {
        for (std::size_t i = 0; i < m; ++i)
            for (const auto& e : system.row(i))
                w[i * n + e.col] = 1.0 / static_cast<double>(s[e.col]);
    } else {
        const auto& rw = std::get<RowWeightsOverSparsity>(scheme).w;
        if (rw.size() != m)
            throw ParameterError("row weights need one entry per equation");
        double sum = 0.0;
        for (double v : rw) {
            if (!std::isfinite(v) || v < 0.0)
                throw ParameterError("row weights must be nonnegative");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw ParameterError("row weights must sum to 1");
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                w[i * n + j] = rw[i] / static_cast<double>(s[j]);
    }
    return WeightMatrix(m, n, std::move(w));
}

std::vector<Operator> hyperplane_operators(const LinearSystem& system) {
    auto structure = BlockStructure::scalar(system.cols());
    std::vector<Operator> ops;
    ops.reserve(system.rows());
    for (std::size_t i = 0; i < system.rows(); ++i)
        ops.push_back(hyperplane_projection(structure, system.dense_row(i), system.rhs()[i]));
    return ops;
}

PlantedSystem plant_consistent_system(std::size_t rows, std::size_t cols, double density,
                                      std::uint64_t seed) {
    if (rows == 0 || cols == 0)
        throw ParameterError("planted system needs m >= 1 and n >= 1");
    if (!(density > 0.0 && density <= 1.0))
        throw ParameterError("density must lie in (0, 1]");

    std::mt19937_64 rng(seed);
    std::bernoulli_distribution present(density);
    std::uniform_real_distribution<double> value(-1.0, 1.0);

    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<Triplet> entries;
        std::vector<bool> row_hit(rows, false), col_hit(cols, false);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) {
                if (!present(rng))
                    continue;
                double v = 0.0;
                while (v == 0.0)
                    v = value(rng);
                entries.push_back({i, j, v});
                row_hit[i] = col_hit[j] = true;
            }
        if (std::find(row_hit.begin(), row_hit.end(), false) != row_hit.end() ||
            std::find(col_hit.begin(), col_hit.end(), false) != col_hit.end())
            continue;

        std::uniform_real_distribution<double> coord(-10.0, 10.0);
        std::vector<double> solution(cols);
        for (auto& x : solution)
            x = coord(rng);
        std::vector<double> rhs(rows, 0.0);
        for (const auto& t : entries)
            rhs[t.row] += t.value * solution[t.col];
        return {LinearSystem(rows, cols, std::move(entries), std::move(rhs)), std::move(solution)};
    }
    throw GenerationError("density too low: every attempt produced a zero row or column");
}

// ---------------------------------------------------------------------------
// Text formats

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double parse_double(const std::string& tok, const char* what) {
    std::size_t used = 0;
    double v;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw ParseError(std::string(what) + ": bad number '" + tok + "'");
    }
    if (used != tok.size() || !std::isfinite(v))
        throw ParseError(std::string(what) + ": bad number '" + tok + "'");
    return v;
}

}  // namespace

LinearSystem read_linear_system(std::istream& matrix, std::istream& rhs_in) {
    std::string line;
    if (!std::getline(matrix, line))
        throw ParseError("matrix market: empty file");
    {
        std::istringstream hs(lower(line));
        std::string banner, object, format, field, symmetry;
        hs >> banner >> object >> format >> field >> symmetry;
        if (banner != "%%matrixmarket" || object != "matrix" || format != "coordinate")
            throw ParseError("matrix market: expected '%%MatrixMarket matrix coordinate' header");
        if (field != "real" && field != "integer")
            throw ParseError("matrix market: only real/integer fields are supported");
        if (symmetry != "general")
            throw ParseError("matrix market: only general symmetry is supported");
    }
    while (std::getline(matrix, line) && (line.empty() || line[0] == '%')) {
    }
    long long m = 0, n = 0, nnz = 0;
    {
        std::istringstream ss(line);
        if (!(ss >> m >> n >> nnz) || m <= 0 || n <= 0 || nnz < 0)
            throw ParseError("matrix market: bad size line '" + line + "'");
    }
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(nnz));
    while (static_cast<long long>(entries.size()) < nnz && std::getline(matrix, line)) {
        if (line.empty() || line[0] == '%')
            continue;
        std::istringstream ss(line);
        long long r, c;
        std::string vtok, extra;
        if (!(ss >> r >> c >> vtok) || (ss >> extra))
            throw ParseError("matrix market: bad entry line '" + line + "'");
        if (r < 1 || c < 1 || r > m || c > n)
            throw ParseError("matrix market: entry index out of range in '" + line + "'");
        entries.push_back({static_cast<std::size_t>(r - 1), static_cast<std::size_t>(c - 1),
                           parse_double(vtok, "matrix market")});
    }
    if (static_cast<long long>(entries.size()) != nnz)
        throw ParseError("matrix market: expected " + std::to_string(nnz) + " entries, found " +
                         std::to_string(entries.size()));
    auto rhs = read_dense_vector(rhs_in);
    if (rhs.size() != static_cast<std::size_t>(m))
        throw ParseError("right-hand side has " + std::to_string(rhs.size()) +
                         " entries, matrix has " + std::to_string(m) + " rows");
    return LinearSystem(static_cast<std::size_t>(m), static_cast<std::size_t>(n), std::move(entries),
                        std::move(rhs));
}

void write_matrix_market(std::ostream& out, const LinearSystem& system) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << system.rows() << ' ' << system.cols() << ' ' << system.nonzeros() << '\n';
    for (const auto& t : system.triplets())
        out << t.row + 1 << ' ' << t.col + 1 << ' ' << format_double(t.value) << '\n';
}

std::vector<double> read_dense_vector(std::istream& in) {
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tok, extra;
        if (!(ss >> tok))
            continue;
        if (ss >> extra)
            throw ParseError("dense vector: one value per line expected, got '" + line + "'");
        out.push_back(parse_double(tok, "dense vector"));
    }
    return out;
}

void write_dense_vector(std::ostream& out, std::span<const double> v) {
    for (double x : v)
        out << format_double(x) << '\n';
}

// ---------------------------------------------------------------------------
// Convex feasibility instances

double membership_violation(const ConvexSet& set, std::span<const double> z) {
    return std::visit(
        [&](const auto& s) -> double {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, HyperplaneSet>) {
                return std::abs(dot(s.a, z) - s.b);
            } else if constexpr (std::is_same_v<S, HalfspaceSet>) {
                return std::max(0.0, dot(s.a, z) - s.b);
            } else if constexpr (std::is_same_v<S, BallSet>) {
                return std::max(0.0, distance(z, s.center) - s.radius);
            } else {
                if (s.lo.size() != z.size() || s.hi.size() != z.size())
                    throw ShapeError("box bounds do not match the point dimension");
                double v = 0.0;
                for (std::size_t i = 0; i < z.size(); ++i)
                    v = std::max({v, s.lo[i] - z[i], z[i] - s.hi[i]});
                return v;
            }
        },
        set);
}

namespace {

/// Scale used for the planted-point membership tolerance 1e-12 * (1 + scale).
double set_scale(const ConvexSet& set) {
    return std::visit(
        [](const auto& s) -> double {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, HyperplaneSet> || std::is_same_v<S, HalfspaceSet>)
                return std::abs(s.b);
            else if constexpr (std::is_same_v<S, BallSet>)
                return s.radius;
            else
                return 0.0;
        },
        set);
}

Operator projection_of(const BlockStructure& structure, const ConvexSet& set) {
    return std::visit(
        [&](const auto& s) -> Operator {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, HyperplaneSet>)
                return hyperplane_projection(structure, s.a, s.b);
            else if constexpr (std::is_same_v<S, HalfspaceSet>)
                return halfspace_projection(structure, s.a, s.b);
            else if constexpr (std::is_same_v<S, BallSet>)
                return ball_projection(structure, s.center, s.radius);
            else
                return box_projection(structure, s.lo, s.hi);
        },
        set);
}

}  // namespace

CfpInstance::CfpInstance(BlockStructure structure, std::vector<ConvexSet> sets,
                         std::optional<ProductVector> planted)
    : structure_(std::move(structure)), sets_(std::move(sets)), planted_(std::move(planted)) {
    if (sets_.empty())
        throw ParameterError("feasibility instance needs at least one set");
    for (const auto& s : sets_)
        (void)projection_of(structure_, s);  // validates shapes and degeneracy
    if (planted_) {
        if (planted_->structure() != structure_)
            throw ShapeError("planted point lives in another space");
        for (std::size_t i = 0; i < sets_.size(); ++i) {
            double v = membership_violation(sets_[i], planted_->values());
            if (v > 1e-12 * (1.0 + set_scale(sets_[i])))
                throw ParameterError("planted point violates set " + std::to_string(i) + " by " +
                                     format_double(v));
        }
    }
}

std::vector<Operator> cfp_projection_operators(const CfpInstance& instance) {
    std::vector<Operator> ops;
    ops.reserve(instance.sets().size());
    for (const auto& s : instance.sets())
        ops.push_back(projection_of(instance.structure(), s));
    return ops;
}

namespace {

template <class T>
T get(const json& j, const char* key, const char* where) {
    if (!j.is_object() || !j.contains(key))
        throw ParseError(std::string(where) + ": missing '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string(where) + ": field '" + key + "': " + e.what());
    }
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            ok = ok || key == a;
        if (!ok)
            throw ParseError(std::string(where) + ": unknown key '" + key + "'");
    }
}

}  // namespace

CfpInstance cfp_from_json(const json& doc) {
    if (!doc.is_object())
        throw ParseError("feasibility instance must be a JSON object");
    reject_unknown(doc, {"dims", "sets", "planted"}, "feasibility instance");
    BlockStructure structure(get<std::vector<std::size_t>>(doc, "dims", "feasibility instance"));
    std::vector<ConvexSet> sets;
    for (const auto& s : get<json>(doc, "sets", "feasibility instance")) {
        auto kind = get<std::string>(s, "kind", "set");
        if (kind == "hyperplane" || kind == "halfspace") {
            reject_unknown(s, {"kind", "a", "b"}, "set");
            auto a = get<std::vector<double>>(s, "a", "set");
            auto b = get<double>(s, "b", "set");
            if (kind == "hyperplane")
                sets.emplace_back(HyperplaneSet{std::move(a), b});
            else
                sets.emplace_back(HalfspaceSet{std::move(a), b});
        } else if (kind == "ball") {
            reject_unknown(s, {"kind", "center", "radius"}, "set");
            sets.emplace_back(BallSet{get<std::vector<double>>(s, "center", "set"),
                                      get<double>(s, "radius", "set")});
        } else if (kind == "box") {
            reject_unknown(s, {"kind", "lo", "hi"}, "set");
            sets.emplace_back(BoxSet{get<std::vector<double>>(s, "lo", "set"),
                                     get<std::vector<double>>(s, "hi", "set")});
        } else {
            throw ParseError("unknown set kind '" + kind + "'");
        }
    }
    std::optional<ProductVector> planted;
    if (doc.contains("planted"))
        planted.emplace(structure, get<std::vector<double>>(doc, "planted", "feasibility instance"));
    return CfpInstance(std::move(structure), std::move(sets), std::move(planted));
}

json cfp_to_json(const CfpInstance& instance) {
    json sets = json::array();
    for (const auto& set : instance.sets()) {
        sets.push_back(std::visit(
            [](const auto& s) -> json {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, HyperplaneSet>)
                    return {{"kind", "hyperplane"}, {"a", s.a}, {"b", s.b}};
                else if constexpr (std::is_same_v<S, HalfspaceSet>)
                    return {{"kind", "halfspace"}, {"a", s.a}, {"b", s.b}};
                else if constexpr (std::is_same_v<S, BallSet>)
                    return {{"kind", "ball"}, {"center", s.center}, {"radius", s.radius}};
                else
                    return {{"kind", "box"}, {"lo", s.lo}, {"hi", s.hi}};
            },
            set));
    }
    json doc = {{"dims", instance.structure().dims()}, {"sets", sets}};
    if (instance.planted()) {
        auto v = instance.planted()->values();
        doc["planted"] = std::vector<double>(v.begin(), v.end());
    }
    return doc;
}

}  // namespace cfx

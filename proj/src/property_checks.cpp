#include "cfx/property_checks.hpp"

#include "cfx/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace cfx {

using nlohmann::json;

std::string Scope::label() const {
    return component ? "j=" + std::to_string(*component) : std::string("whole");
}

Sampler Sampler::uniform(std::uint64_t seed, double lo, double hi, std::size_t count) {
    Sampler s;
    s.seed = seed;
    s.lo = lo;
    s.hi = hi;
    s.count = count;
    return s;
}

Sampler Sampler::gaussian(std::uint64_t seed, double sigma, std::size_t count) {
    Sampler s;
    s.seed = seed;
    s.distribution = Distribution::gaussian;
    s.sigma = sigma;
    s.count = count;
    return s;
}

namespace {

class PointStream {
public:
    PointStream(const Sampler& s, BlockStructure structure)
        : sampler_(s), structure_(std::move(structure)), rng_(s.seed) {
        if (s.count == 0)
            throw PreconditionError("sampler must draw at least one sample");
        if (s.distribution == Distribution::uniform_box && !(s.lo < s.hi))
            throw ParameterError("uniform box needs lo < hi");
        if (s.distribution == Distribution::gaussian && !(s.sigma > 0.0))
            throw ParameterError("gaussian sampler needs sigma > 0");
    }

    ProductVector next() {
        std::vector<double> v(structure_.total_dim());
        if (sampler_.distribution == Distribution::uniform_box) {
            std::uniform_real_distribution<double> d(sampler_.lo, sampler_.hi);
            for (auto& e : v)
                e = d(rng_);
        } else {
            std::normal_distribution<double> d(0.0, sampler_.sigma);
            for (auto& e : v)
                e = d(rng_);
        }
        return ProductVector(structure_, std::move(v));
    }

private:
    const Sampler& sampler_;
    BlockStructure structure_;
    std::mt19937_64 rng_;
};

void require_space(const ProductVector& v, const BlockStructure& s, const char* what) {
    if (v.structure() != s)
        throw ShapeError(std::string(what) + " lives in another space");
}

}  // namespace

std::vector<ProductVector> draw_points(const Sampler& sampler, const BlockStructure& structure) {
    PointStream stream(sampler, structure);
    std::vector<ProductVector> out;
    out.reserve(sampler.pinned_points.size() + sampler.count);
    for (const auto& p : sampler.pinned_points) {
        require_space(p, structure, "pinned sample point");
        out.push_back(p);
    }
    for (std::size_t k = 0; k < sampler.count; ++k)
        out.push_back(stream.next());
    return out;
}

std::vector<std::pair<ProductVector, ProductVector>> draw_pairs(const Sampler& sampler,
                                                                const BlockStructure& structure) {
    PointStream stream(sampler, structure);
    std::vector<std::pair<ProductVector, ProductVector>> out;
    out.reserve(sampler.pinned_pairs.size() + sampler.count);
    for (const auto& [x, y] : sampler.pinned_pairs) {
        require_space(x, structure, "pinned sample pair");
        require_space(y, structure, "pinned sample pair");
        out.emplace_back(x, y);
    }
    for (std::size_t k = 0; k < sampler.count; ++k) {
        ProductVector x = stream.next();
        ProductVector y = stream.next();
        out.emplace_back(std::move(x), std::move(y));
    }
    return out;
}

const ProductVector& PropertyReport::witness_point(const std::string& role) const {
    for (const auto& w : witness)
        if (w.role == role)
            return w.point;
    throw std::out_of_range("report has no witness '" + role + "'");
}

json to_json(const PropertyReport& r) {
    json witness = json::object();
    for (const auto& w : r.witness) {
        auto v = w.point.values();
        witness[w.role] = {{"dims", w.point.structure().dims()},
                           {"values", std::vector<double>(v.begin(), v.end())}};
    }
    json scope = r.scope.component ? json(*r.scope.component) : json("whole");
    return {{"property", r.property},
            {"component", scope},
            {"parameters", r.parameters},
            {"seed", r.seed},
            {"samples_tested", r.samples_tested},
            {"max_violation", r.max_violation},
            {"tolerance", r.tolerance},
            {"witness", witness},
            {"verdict", r.passed() ? "pass" : "fail"},
            {"note", r.note}};
}

namespace {

/// Block j of v, or all of v.
std::span<const double> part(const ProductVector& v, Scope s) {
    return s.component ? v.block(*s.component) : v.values();
}

/// (T(x))_j, or T(x).
std::vector<double> image(const Operator& op, const ProductVector& x, Scope s) {
    if (s.component)
        return op.apply_component(x, *s.component);
    ProductVector t = op.apply(x);
    return std::vector<double>(t.values().begin(), t.values().end());
}

std::vector<double> minus(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a[i] - b[i];
    return out;
}

double sq(double v) { return v * v; }

void check_scope(const Operator& op, Scope s) {
    if (s.component)
        op.structure().check_index(*s.component);
}

/// Running maximum with lowest-index tie breaking.
struct Worst {
    double value = -std::numeric_limits<double>::infinity();
    std::vector<Witness> witness;
    std::size_t tested = 0;

    void offer(double v, std::vector<Witness> w) {
        ++tested;
        if (v > value) {
            value = v;
            witness = std::move(w);
        }
    }
};

PropertyReport finish(std::string property, Scope scope, std::map<std::string, double> params,
                      const Sampler& sampler, double tol, Worst worst) {
    PropertyReport r;
    r.property = std::move(property);
    r.scope = scope;
    r.parameters = std::move(params);
    r.seed = sampler.seed;
    r.samples_tested = worst.tested;
    r.tolerance = tol;
    r.max_violation = worst.tested ? worst.value : 0.0;
    if (r.max_violation > tol) {
        r.verdict = Verdict::fail;
        r.witness = std::move(worst.witness);
        r.note = "counterexample found";
    } else {
        r.verdict = Verdict::pass;
        r.note = worst.tested ? "no counterexample found under this sampler"
                              : "vacuous: no admissible sample";
    }
    return r;
}

template <class F>
PropertyReport pair_check(std::string property, const Operator& op, Scope scope,
                          std::map<std::string, double> params, const Sampler& sampler,
                          double tol, F&& violation) {
    check_scope(op, scope);
    Worst worst;
    for (const auto& [x, y] : draw_pairs(sampler, op.structure())) {
        auto tx = image(op, x, scope);
        auto ty = image(op, y, scope);
        double v = violation(part(x, scope), part(y, scope), tx, ty);
        worst.offer(v, {{"x", x}, {"y", y}});
    }
    return finish(std::move(property), scope, std::move(params), sampler, tol, std::move(worst));
}

template <class F>
PropertyReport certificate_check(std::string property, const Operator& op, Scope scope,
                                 std::map<std::string, double> params,
                                 const FixedPointCertificate& cert, const Sampler& sampler,
                                 double tol, F&& violation) {
    check_scope(op, scope);
    verify_certificate(op, scope, cert);
    Worst worst;
    for (const auto& x : draw_points(sampler, op.structure())) {
        auto tx = image(op, x, scope);
        for (const auto& z : cert.points) {
            auto v = violation(x, part(x, scope), tx, part(z, scope));
            if (v)
                worst.offer(*v, {{"x", x}, {"z", z}});
        }
    }
    return finish(std::move(property), scope, std::move(params), sampler, tol, std::move(worst));
}

double ne_violation(std::span<const double> x, std::span<const double> y,
                    std::span<const double> tx, std::span<const double> ty) {
    return distance(tx, ty) - distance(x, y);
}

double fne_violation(std::span<const double> x, std::span<const double> y,
                     std::span<const double> tx, std::span<const double> ty) {
    auto dt = minus(tx, ty);
    auto dx = minus(x, y);
    return dot(dt, dt) - dot(dt, dx);
}

}  // namespace

void verify_certificate(const Operator& op, Scope scope, const FixedPointCertificate& cert) {
    if (cert.points.empty())
        throw PreconditionError("fixed-point certificate is empty");
    for (const auto& z : cert.points) {
        require_space(z, op.structure(), "certificate point");
        double r = fix_residual(op, z, scope);
        if (r > cert.tolerance)
            throw PreconditionError("certificate point is not a fixed point (" + scope.label() +
                                    ", residual " + format_double(r) + ")");
    }
}

double fix_residual(const Operator& op, const ProductVector& x, Scope scope) {
    check_scope(op, scope);
    return distance(image(op, x, scope), part(x, scope));
}

PropertyReport check_nonexpansive(const Operator& op, Scope scope, const Sampler& sampler,
                                  double tol) {
    return pair_check("nonexpansive", op, scope, {}, sampler, tol, ne_violation);
}

PropertyReport check_fne(const Operator& op, Scope scope, const Sampler& sampler, double tol) {
    return pair_check("firmly_nonexpansive", op, scope, {}, sampler, tol, fne_violation);
}

PropertyReport check_rfne(const Operator& op, Scope scope, double lambda, const Sampler& sampler,
                          double tol) {
    if (!(lambda > 0.0 && lambda <= 2.0))
        throw ParameterError("RFNE relaxation must lie in (0, 2]");
    auto r = pair_check("relaxed_firmly_nonexpansive", relax(op, 1.0 / lambda), scope,
                        {{"lambda", lambda}}, sampler, tol, fne_violation);
    return r;
}

PropertyReport check_averaged(const Operator& op, Scope scope, double alpha,
                              const Sampler& sampler, double tol) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ParameterError("averagedness constant must lie in (0, 1)");
    return pair_check("averaged", relax(op, 1.0 / alpha), scope, {{"alpha", alpha}}, sampler, tol,
                      ne_violation);
}

PropertyReport check_contraction(const Operator& op, Scope scope, double alpha,
                                 const Sampler& sampler, double tol) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw ParameterError("contraction modulus must lie in [0, 1)");
    return pair_check("contraction", op, scope, {{"alpha", alpha}}, sampler, tol,
                      [alpha](auto x, auto y, auto tx, auto ty) {
                          return distance(tx, ty) - alpha * distance(x, y);
                      });
}

PropertyReport check_cutter(const Operator& op, Scope scope, const FixedPointCertificate& cert,
                            const Sampler& sampler, double tol) {
    return certificate_check("cutter", op, scope, {}, cert, sampler, tol,
                             [](const ProductVector&, auto x, auto tx, auto z) -> std::optional<double> {
                                 return dot(minus(x, tx), minus(z, tx));
                             });
}

PropertyReport check_qne(const Operator& op, Scope scope, const FixedPointCertificate& cert,
                         const Sampler& sampler, double tol) {
    return certificate_check("quasi_nonexpansive", op, scope, {}, cert, sampler, tol,
                             [](const ProductVector&, auto x, auto tx, auto z) -> std::optional<double> {
                                 return distance(tx, z) - distance(x, z);
                             });
}

PropertyReport check_sqne(const Operator& op, Scope scope, double rho,
                          const FixedPointCertificate& cert, const Sampler& sampler, double tol) {
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw ParameterError("SQNE constant rho must be positive");
    return certificate_check(
        "strongly_quasi_nonexpansive", op, scope, {{"rho", rho}}, cert, sampler, tol,
        [rho](const ProductVector&, auto x, auto tx, auto z) -> std::optional<double> {
            return sq(distance(tx, z)) + rho * sq(distance(tx, x)) - sq(distance(x, z));
        });
}

PropertyReport check_sqne_strict(const Operator& op, Scope scope,
                                 const FixedPointCertificate& cert, const Sampler& sampler,
                                 double tol) {
    auto r = certificate_check(
        "strictly_quasi_nonexpansive", op, scope, {{"margin", 1e-12}}, cert, sampler, 0.0,
        [tol](const ProductVector&, auto x, auto tx, auto z) -> std::optional<double> {
            if (distance(tx, x) <= tol)
                return std::nullopt;  // x in Fix^j T
            double dz = distance(x, z);
            return distance(tx, z) - dz + 1e-12 * (1.0 + dz);
        });
    r.parameters["fixed_point_tolerance"] = tol;
    return r;
}

PropertyReport check_fj_membership(const Operator& op, const ProductVector& z, Scope scope,
                                   const Sampler& sampler, double tol) {
    check_scope(op, scope);
    require_space(z, op.structure(), "candidate point");
    Worst worst;
    auto zp = part(z, scope);
    auto points = draw_points(sampler, op.structure());
    points.insert(points.begin(), z);
    for (const auto& x : points) {
        auto tx = image(op, x, scope);
        auto xp = part(x, scope);
        worst.offer(distance(tx, zp) - distance(xp, zp), {{"x", x}, {"z", z}});
    }
    return finish("fj_membership", scope, {{"fix_residual", fix_residual(op, z, scope)}}, sampler,
                  tol, std::move(worst));
}

double estimate_contraction_modulus(const Operator& op, Scope scope, const Sampler& sampler) {
    check_scope(op, scope);
    double best = -1.0;
    for (const auto& [x, y] : draw_pairs(sampler, op.structure())) {
        double d = distance(part(x, scope), part(y, scope));
        if (d < 1e-12)
            continue;
        best = std::max(best, distance(image(op, x, scope), image(op, y, scope)) / d);
    }
    if (best < 0.0)
        throw SamplingError("every sampled pair was degenerate in the tested scope");
    return best;
}

Fact3Battery check_fact3_battery(const Operator& op, Scope scope, const Sampler& sampler,
                                 double tol) {
    Fact3Battery out;

    auto i = check_fne(op, scope, sampler, tol);
    i.property = "fact3_i_fne";
    out.reports.push_back(std::move(i));

    std::optional<PropertyReport> ii;
    for (double lambda : {0.0, 0.5, 1.0, 1.5, 2.0}) {
        auto r = check_nonexpansive(relax(op, lambda), scope, sampler, tol);
        r.parameters["lambda"] = lambda;
        if (!ii) {
            ii = std::move(r);
            continue;
        }
        ii->samples_tested += r.samples_tested;
        if (r.max_violation > ii->max_violation) {
            std::size_t tested = ii->samples_tested;
            ii = std::move(r);
            ii->samples_tested = tested;
        }
    }
    ii->property = "fact3_ii_relaxations_ne";
    out.reports.push_back(std::move(*ii));

    auto iii = check_nonexpansive(relax(op, 2.0), scope, sampler, tol);
    iii.property = "fact3_iii_reflection_ne";
    out.reports.push_back(std::move(iii));

    auto iv = check_fne(complement(op), scope, sampler, tol);
    iv.property = "fact3_iv_complement_fne";
    out.reports.push_back(std::move(iv));

    out.reports.push_back(pair_check(
        "fact3_v_inequality", op, scope, {}, sampler, tol, [](auto x, auto y, auto tx, auto ty) {
            auto dt = minus(tx, ty);
            auto dx = minus(x, y);
            auto dr = minus(dx, dt);
            return dot(dt, dt) - dot(dx, dx) + dot(dr, dr);
        }));

    for (const auto& r : out.reports)
        out.consistent = out.consistent && r.verdict == out.reports.front().verdict;
    return out;
}

PropertyReport check_component_locality(const Operator& op, std::size_t j, const Sampler& sampler,
                                        double tol) {
    op.structure().check_index(j);
    Scope scope = Scope::block(j);
    bool conditioned = check_nonexpansive(op, scope, sampler, tol).passed();
    Worst worst;
    for (const auto& [x, fresh] : draw_pairs(sampler, op.structure())) {
        ProductVector moved = fresh;
        auto keep = x.block(j);
        std::copy(keep.begin(), keep.end(), moved.block(j).begin());
        worst.offer(distance(op.apply_component(x, j), op.apply_component(moved, j)),
                    {{"x", x}, {"x_perturbed", moved}});
    }
    auto r = finish("component_locality", scope, {}, sampler, tol, std::move(worst));
    r.note += conditioned ? " (conditioned: j-nonexpansive on the same sampler)"
                          : " (unconditioned: j-nonexpansiveness not established)";
    return r;
}

std::optional<double> find_rfne_constant(const Operator& op, Scope scope,
                                         std::span<const double> grid, const Sampler& sampler,
                                         double tol) {
    for (double lambda : grid)
        if (check_rfne(op, scope, lambda, sampler, tol).passed())
            return lambda;
    return std::nullopt;
}

std::optional<double> find_averaged_constant(const Operator& op, Scope scope,
                                             std::span<const double> grid,
                                             const Sampler& sampler, double tol) {
    for (double alpha : grid)
        if (check_averaged(op, scope, alpha, sampler, tol).passed())
            return alpha;
    return std::nullopt;
}

}  // namespace cfx

#pragma once

#include "cfx/operators.hpp"
#include "cfx/product_space.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cfx {

/// Which part of the space an inequality is evaluated on: one block x_j, or all of x.
struct Scope {
    std::optional<std::size_t> component;

    static Scope whole() { return Scope{}; }
    static Scope block(std::size_t j) { return Scope{j}; }
    bool is_whole() const noexcept { return !component.has_value(); }
    /// "j=<index>" or "whole".
    std::string label() const;
};

enum class Distribution { uniform_box, gaussian };

/**
 * Reproducible source of test points. Pinned points and pairs are tested
 * first, then `count` random draws.
 */
struct Sampler {
    std::uint64_t seed = 0;
    Distribution distribution = Distribution::uniform_box;
    double lo = -10.0;
    double hi = 10.0;
    double sigma = 1.0;
    std::size_t count = 1000;
    std::vector<ProductVector> pinned_points;
    std::vector<std::pair<ProductVector, ProductVector>> pinned_pairs;

    static Sampler uniform(std::uint64_t seed, double lo = -10.0, double hi = 10.0,
                           std::size_t count = 1000);
    static Sampler gaussian(std::uint64_t seed, double sigma, std::size_t count = 1000);
};

/// Pinned points followed by `count` random points. Throws PreconditionError when count == 0.
std::vector<ProductVector> draw_points(const Sampler& sampler, const BlockStructure& structure);
/// Pinned pairs followed by `count` random pairs.
std::vector<std::pair<ProductVector, ProductVector>> draw_pairs(const Sampler& sampler,
                                                                const BlockStructure& structure);

enum class Verdict { pass, fail };

struct Witness {
    std::string role;
    ProductVector point;
};

/**
 * Outcome of a sampled inequality check. verdict is fail exactly when
 * max_violation > tolerance, and then `witness` holds the worst sample.
 */
struct PropertyReport {
    std::string property;
    Scope scope;
    std::map<std::string, double> parameters;
    std::uint64_t seed = 0;
    std::size_t samples_tested = 0;
    double max_violation = 0.0;
    double tolerance = 0.0;
    std::vector<Witness> witness;
    Verdict verdict = Verdict::pass;
    std::string note;

    bool passed() const noexcept { return verdict == Verdict::pass; }
    /// Witness point with the given role; throws std::out_of_range when absent.
    const ProductVector& witness_point(const std::string& role) const;
};

nlohmann::json to_json(const PropertyReport& report);

/// Points claimed to lie in Fix^j T (or Fix T for the whole scope).
struct FixedPointCertificate {
    std::vector<ProductVector> points;
    double tolerance = 1e-9;
};

/// Throws PreconditionError when the certificate is empty or a point is not a fixed point.
void verify_certificate(const Operator& op, Scope scope, const FixedPointCertificate& cert);

inline constexpr double kDefaultTolerance = 1e-9;

/// ||(T(x))_j - x_j||_j (or ||T(x) - x||).
double fix_residual(const Operator& op, const ProductVector& x, Scope scope);

PropertyReport check_nonexpansive(const Operator& op, Scope scope, const Sampler& sampler,
                                  double tol = kDefaultTolerance);
PropertyReport check_fne(const Operator& op, Scope scope, const Sampler& sampler,
                         double tol = kDefaultTolerance);
/// Checks that U = Id + (1/lambda)(T - Id) is FNE; lambda in (0, 2].
PropertyReport check_rfne(const Operator& op, Scope scope, double lambda, const Sampler& sampler,
                          double tol = kDefaultTolerance);
/// Checks that U = Id + (1/alpha)(T - Id) is NE; alpha in (0, 1).
PropertyReport check_averaged(const Operator& op, Scope scope, double alpha,
                              const Sampler& sampler, double tol = kDefaultTolerance);
/// ||(Tx)_j - (Ty)_j|| <= alpha ||x_j - y_j||; alpha in [0, 1).
PropertyReport check_contraction(const Operator& op, Scope scope, double alpha,
                                 const Sampler& sampler, double tol = kDefaultTolerance);

PropertyReport check_cutter(const Operator& op, Scope scope, const FixedPointCertificate& cert,
                            const Sampler& sampler, double tol = kDefaultTolerance);
PropertyReport check_qne(const Operator& op, Scope scope, const FixedPointCertificate& cert,
                         const Sampler& sampler, double tol = kDefaultTolerance);
/// rho > 0.
PropertyReport check_sqne(const Operator& op, Scope scope, double rho,
                          const FixedPointCertificate& cert, const Sampler& sampler,
                          double tol = kDefaultTolerance);
/**
 * Strict decrease ||(Tx)_j - z_j|| < ||x_j - z_j|| for sampled x outside
 * Fix^j T (fix residual > tol). A decrease of at least 1e-12 (1 + ||x_j - z_j||)
 * is demanded, so the report's tolerance is 0.
 */
PropertyReport check_sqne_strict(const Operator& op, Scope scope,
                                 const FixedPointCertificate& cert, const Sampler& sampler,
                                 double tol = kDefaultTolerance);

/// Tests z against ||(Tx)_j - z_j|| <= ||x_j - z_j|| for x = z and sampled x.
/// The report carries z's fix residual as parameter "fix_residual".
PropertyReport check_fj_membership(const Operator& op, const ProductVector& z, Scope scope,
                                   const Sampler& sampler, double tol = kDefaultTolerance);

/**
 * Largest sampled ratio ||(Tx)_j - (Ty)_j|| / ||x_j - y_j||, a lower bound for
 * the Lipschitz modulus. Pairs closer than 1e-12 are skipped; throws
 * SamplingError when all are.
 */
double estimate_contraction_modulus(const Operator& op, Scope scope, const Sampler& sampler);

/// The five equivalent characterizations of firm nonexpansivity, one report each.
struct Fact3Battery {
    std::vector<PropertyReport> reports;
    /// All five verdicts agree.
    bool consistent = true;
};
Fact3Battery check_fact3_battery(const Operator& op, Scope scope, const Sampler& sampler,
                                 double tol = kDefaultTolerance);

/// Perturbs every block except j and measures the change of (T(x))_j.
PropertyReport check_component_locality(const Operator& op, std::size_t j, const Sampler& sampler,
                                        double tol = kDefaultTolerance);

/// First lambda of the grid for which check_rfne passes. Not a decision procedure.
std::optional<double> find_rfne_constant(const Operator& op, Scope scope,
                                         std::span<const double> grid, const Sampler& sampler,
                                         double tol = kDefaultTolerance);
/// First alpha of the grid for which check_averaged passes.
std::optional<double> find_averaged_constant(const Operator& op, Scope scope,
                                             std::span<const double> grid,
                                             const Sampler& sampler,
                                             double tol = kDefaultTolerance);

}  // namespace cfx

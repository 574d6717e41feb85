#pragma once

#include "cfx/errors.hpp"
#include "cfx/operators.hpp"
#include "cfx/problems.hpp"
#include "cfx/product_space.hpp"
#include "cfx/property_checks.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cfx {

struct StopRule {
    std::size_t max_iterations = 100000;
    /// Stop when max_j ||x_j^{k+1} - x_j^k|| <= step_tol over the watched components.
    double step_tol = 1e-10;
    /// Linear problems: stop when ||A x - b|| / (1 + ||b||) <= residual_tol.
    /// An exactly zero residual always stops the run.
    std::optional<double> residual_tol;
    /// Components consulted by the step rule; empty means all.
    std::vector<std::size_t> watch;

    /// Throws ParameterError on max_iterations == 0 or negative tolerances.
    void validate(const BlockStructure& structure) const;
};

enum class StopReason { step_tolerance, residual_tolerance, max_iterations, diverged };
std::string to_string(StopReason reason);

/**
 * Trajectory of a run. Row k of `steps` holds ||x_j^{k+1} - x_j^k||; row k of
 * `distances` holds ||x_j^k - z_j|| against `reference`; `residuals[k]` is
 * ||A x^k - b||. Iterates are kept every `thinning` steps; iterates[0] is x^0.
 */
struct IterationHistory {
    BlockStructure structure;
    std::size_t thinning = 1;
    std::vector<std::size_t> iterate_indices;
    std::vector<ProductVector> iterates;
    std::vector<std::vector<double>> steps;
    std::vector<std::vector<double>> distances;
    std::optional<ProductVector> reference;
    std::vector<double> residuals;
    /// ||b|| for linear problems, used for relative residuals.
    std::optional<double> rhs_norm;
    StopReason stop_reason = StopReason::max_iterations;

    explicit IterationHistory(BlockStructure s) : structure(std::move(s)) {}

    std::size_t iterations() const noexcept { return steps.size(); }
    const ProductVector& final_iterate() const { return iterates.back(); }
    /// residuals[k] / (1 + ||b||).
    double relative_residual(std::size_t k) const;
    /// First k with relative residual <= target, if any.
    std::optional<std::size_t> first_reaching(double target) const;
};

/// A run produced a non-finite iterate. Carries the partial history whose last
/// iterate is the last finite one.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, IterationHistory history)
        : Error(what), history_(std::move(history)) {}
    const IterationHistory& history() const noexcept { return history_; }
    const ProductVector& last_finite() const { return history_.final_iterate(); }

private:
    IterationHistory history_;
};

struct RunOptions {
    /// Records per-component distances against this point (e.g. a planted solution).
    std::optional<ProductVector> reference;
    std::size_t thinning = 1;
    Validation mode = Validation::strict;
    /// Relaxation for iteration k; constant lambda when empty.
    std::function<double(std::size_t)> relaxation_schedule;
};

/// x^{k+1} = T(x^k).
IterationHistory picard(const Operator& op, const ProductVector& x0, const StopRule& stop,
                        const RunOptions& options = {});

/// Error estimates for an (alpha_j, j)-contraction; entry k-1 belongs to iterate k >= 1.
struct ContractionBounds {
    std::size_t component = 0;
    double alpha = 0.0;
    /// alpha^k / (1 - alpha) * ||x_j^0 - x_j^1||
    std::vector<double> a_priori;
    /// alpha / (1 - alpha) * ||x_j^{k-1} - x_j^k||
    std::vector<double> a_posteriori;
};

/// Throws ParameterError unless alpha in [0, 1), PreconditionError for fewer than 2 iterates.
ContractionBounds contraction_bounds(const IterationHistory& history, std::size_t j, double alpha);

/// Checks ||x_j^k - x_j*|| <= bound + 1e-12 (1 + bound) for both estimates at every k.
PropertyReport check_error_bounds(const IterationHistory& history, const ContractionBounds& bounds,
                                  std::span<const double> fixed_block);

/// Checks ||x_j^k - x_j*|| <= alpha ||x_j^{k-1} - x_j*|| + 1e-12 for all k.
/// Throws ParameterError when fixed_block is empty or alpha is not in [0, 1).
PropertyReport rate_check(const IterationHistory& history, std::size_t j, double alpha,
                          std::span<const double> fixed_block);

/// x + lambda sum_i w_i ((b_i - <a^i,x>)/||a^i||^2) a^i.
std::vector<double> cimmino_step(const LinearSystem& system, std::span<const double> w,
                                 double lambda, std::span<const double> x,
                                 Validation mode = Validation::strict);
/// x_j + (lambda/s_j) sum_i ((b_i - <a^i,x>)/||a^i||^2) a_j^i.
std::vector<double> drop_step(const LinearSystem& system, const SparsityProfile& s, double lambda,
                              std::span<const double> x, Validation mode = Validation::strict);
/// x_j + lambda sum_i w_ij ((T_i(x))_j - x_j). Strict mode needs unit column sums
/// (WeightError otherwise) and lambda in (0, 2).
ProductVector general_cw_step(const std::vector<Operator>& ops, const WeightMatrix& w,
                              double lambda, const ProductVector& x,
                              Validation mode = Validation::strict);

IterationHistory run_cimmino(const LinearSystem& system, std::vector<double> w, double lambda,
                             std::span<const double> x0, const StopRule& stop,
                             const RunOptions& options = {});
IterationHistory run_drop(const LinearSystem& system, double lambda, std::span<const double> x0,
                          const StopRule& stop, const RunOptions& options = {});
/**
 * Iterates general_cw_step. With unnormalized columns in strict mode the
 * per-component bound lambda in (0, 2/w_.j] applies instead of unit column
 * sums. `system`, when given, supplies residuals.
 */
IterationHistory run_general_cw(const std::vector<Operator>& ops, const WeightMatrix& w,
                                double lambda, const ProductVector& x0, const StopRule& stop,
                                const RunOptions& options = {},
                                const LinearSystem* system = nullptr);

enum class Method { picard, cimmino, drop, general_cw };
Method parse_method(const std::string& name);
std::string to_string(Method method);

struct SolveRequest {
    Method method = Method::drop;
    /// picard
    std::optional<Operator> op;
    /// cimmino, drop, and general_cw over hyperplanes
    std::optional<LinearSystem> system;
    /// general_cw over arbitrary operators
    std::vector<Operator> ops;
    /// general_cw; support-normalized DROP weights by default
    std::optional<WeightMatrix> weights;
    /// cimmino; uniform 1/m when empty
    std::vector<double> cimmino_weights;
    double lambda = 1.0;
    /// zero when absent
    std::optional<ProductVector> x0;
};

IterationHistory solve(const SolveRequest& request, const StopRule& stop,
                       const RunOptions& options = {});

/**
 * Per-component Fejer monotonicity ||x_j^{k+1} - z_j|| <= ||x_j^k - z_j|| + 1e-10.
 * With rho > 0 additionally checks the SQNE inequality
 * ||x_j^{k+1} - z_j||^2 <= ||x_j^k - z_j||^2 - rho ||x_j^{k+1} - x_j^k||^2 (same tolerance).
 */
PropertyReport fejer_monitor(const IterationHistory& history, const ProductVector& z,
                             std::optional<double> rho = std::nullopt);
/// Same check with the product-space norm ||x^k - z||.
PropertyReport fejer_monitor_global(const IterationHistory& history, const ProductVector& z);

/// Header "k,residual,step_0,dist_0,..."; empty fields where a quantity is not recorded.
void write_history_csv(std::ostream& out, const IterationHistory& history);

}  // namespace cfx

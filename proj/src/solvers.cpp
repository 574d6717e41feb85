#include "cfx/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace cfx {

namespace {

constexpr double kFejerTol = 1e-10;
constexpr double kBoundSlack = 1e-12;

void check_lambda(double lambda, Validation mode, const std::string& method) {
    if (!std::isfinite(lambda))
        throw ParameterError(method + ": relaxation must be finite");
    if (mode == Validation::strict) {
        if (!(lambda > 0.0 && lambda < 2.0))
            throw ParameterError(method + ": relaxation must lie in (0, 2), got " +
                                 format_double(lambda));
    } else if (lambda < 0.0) {
        throw ParameterError(method + ": relaxation must be nonnegative");
    }
}

void check_simplex(std::span<const double> w, std::size_t m) {
    if (w.size() != m)
        throw ShapeError("cimmino weights: expected " + std::to_string(m) + " entries, got " +
                         std::to_string(w.size()));
    double sum = 0.0;
    for (double v : w) {
        if (!std::isfinite(v) || v < 0.0)
            throw WeightError("cimmino weights must be finite and nonnegative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw WeightError("cimmino weights must sum to 1, got " + format_double(sum));
}

/// r_i = (b_i - <a^i, x>) / ||a^i||^2
std::vector<double> scaled_residuals(const LinearSystem& system, std::span<const double> x) {
    if (x.size() != system.cols())
        throw ShapeError("iterate length " + std::to_string(x.size()) + " does not match " +
                         std::to_string(system.cols()) + " columns");
    std::vector<double> r(system.rows());
    for (std::size_t i = 0; i < system.rows(); ++i)
        r[i] = (system.rhs()[i] - system.row_dot(i, x)) / system.row_norm_sq(i);
    return r;
}

double norm_of(std::span<const double> v) { return norm2(v); }

/// Bookkeeping shared by every iteration: steps, distances, residuals, stopping.
class Recorder {
public:
    Recorder(const ProductVector& x0, const StopRule& stop, const RunOptions& options,
             const LinearSystem* system)
        : history_(x0.structure()), stop_(stop), system_(system), previous_(x0) {
        stop.validate(x0.structure());
        if (options.thinning == 0)
            throw ParameterError("thinning must be positive");
        if (!x0.all_finite())
            throw ParameterError("starting point must be finite");
        if (options.reference) {
            if (options.reference->structure() != x0.structure())
                throw ShapeError("reference point lives in another space");
            history_.reference = options.reference;
        }
        if (stop.residual_tol && !system)
            throw ParameterError("a residual tolerance needs a linear system");
        history_.thinning = options.thinning;
        if (system_)
            history_.rhs_norm = norm_of(system_->rhs());
        record_point(x0);
        history_.iterate_indices.push_back(0);
        history_.iterates.push_back(x0);
    }

    std::size_t k() const noexcept { return k_; }
    const ProductVector& current() const noexcept { return previous_; }

    /// Accepts x^{k+1}; returns true when the run should stop.
    bool advance(ProductVector next) {
        if (!next.all_finite()) {
            history_.stop_reason = StopReason::diverged;
            keep_last();
            throw DivergenceError("iterate " + std::to_string(k_ + 1) + " is not finite",
                                  std::move(history_));
        }
        const auto& s = history_.structure;
        std::vector<double> step(s.size());
        for (std::size_t j = 0; j < s.size(); ++j)
            step[j] = distance(next.block(j), previous_.block(j));
        history_.steps.push_back(step);
        ++k_;
        record_point(next);
        previous_ = std::move(next);
        if (k_ % history_.thinning == 0) {
            history_.iterate_indices.push_back(k_);
            history_.iterates.push_back(previous_);
        }

        const bool solved = system_ && history_.residuals.back() == 0.0;
        if (solved || (stop_.residual_tol && history_.relative_residual(k_) <= *stop_.residual_tol)) {
            history_.stop_reason = StopReason::residual_tolerance;
            return true;
        }
        double watched = 0.0;
        if (stop_.watch.empty()) {
            for (double v : step) watched = std::max(watched, v);
        } else {
            for (std::size_t j : stop_.watch) watched = std::max(watched, step[j]);
        }
        if (watched <= stop_.step_tol) {
            history_.stop_reason = StopReason::step_tolerance;
            return true;
        }
        if (k_ >= stop_.max_iterations) {
            history_.stop_reason = StopReason::max_iterations;
            return true;
        }
        return false;
    }

    IterationHistory finish() {
        keep_last();
        return std::move(history_);
    }

private:
    void record_point(const ProductVector& x) {
        if (history_.reference) {
            std::vector<double> d(x.num_blocks());
            for (std::size_t j = 0; j < d.size(); ++j)
                d[j] = distance(x.block(j), history_.reference->block(j));
            history_.distances.push_back(std::move(d));
        }
        if (system_)
            history_.residuals.push_back(system_->residual_norm(x.values()));
    }

    void keep_last() {
        if (history_.iterate_indices.back() != k_) {
            history_.iterate_indices.push_back(k_);
            history_.iterates.push_back(previous_);
        }
    }

    IterationHistory history_;
    StopRule stop_;
    const LinearSystem* system_;
    ProductVector previous_;
    std::size_t k_ = 0;
};

template <class Step>
IterationHistory iterate(const ProductVector& x0, const StopRule& stop, const RunOptions& options,
                         const LinearSystem* system, Step&& step) {
    Recorder rec(x0, stop, options, system);
    while (!rec.advance(step(rec.current(), rec.k()))) {
    }
    return rec.finish();
}

ProductVector as_scalar_vector(std::span<const double> x) {
    return ProductVector(BlockStructure::scalar(x.size()), std::vector<double>(x.begin(), x.end()));
}

/// Distance ||x_j^k - z_j|| for every recorded k; requires all iterates or a matching reference.
std::vector<std::vector<double>> distances_to(const IterationHistory& h, const ProductVector& z) {
    if (z.structure() != h.structure)
        throw ShapeError("reference point lives in another space");
    if (h.reference && *h.reference == z && !h.distances.empty())
        return h.distances;
    if (h.thinning != 1 || h.iterates.size() != h.iterations() + 1)
        throw ParameterError(
            "no reference distances: record the run against this point or keep every iterate");
    std::vector<std::vector<double>> out;
    out.reserve(h.iterates.size());
    for (const auto& x : h.iterates) {
        std::vector<double> d(x.num_blocks());
        for (std::size_t j = 0; j < d.size(); ++j) d[j] = distance(x.block(j), z.block(j));
        out.push_back(std::move(d));
    }
    return out;
}

void require_all_iterates(const IterationHistory& h, const std::string& what) {
    if (h.iterates.size() != h.iterations() + 1)
        throw PreconditionError(what + " needs every iterate (thinning 1)");
}

std::vector<double> block_distances(const IterationHistory& h, std::size_t j,
                                    std::span<const double> fixed_block) {
    h.structure.check_index(j);
    if (fixed_block.size() != h.structure.dim(j))
        throw ParameterError("fixed-point block has length " + std::to_string(fixed_block.size()) +
                             ", expected " + std::to_string(h.structure.dim(j)));
    require_all_iterates(h, "the error check");
    std::vector<double> d;
    d.reserve(h.iterates.size());
    for (const auto& x : h.iterates) d.push_back(distance(x.block(j), fixed_block));
    return d;
}

void finalize(PropertyReport& r) {
    r.verdict = r.max_violation > r.tolerance ? Verdict::fail : Verdict::pass;
    r.note = r.passed() ? "no violation along the trajectory" : "violation along the trajectory";
}

void attach_pair_witness(PropertyReport& r, const IterationHistory& h, std::size_t k) {
    if (h.iterates.size() == h.iterations() + 1 && k + 1 < h.iterates.size()) {
        r.witness.push_back({"x_k", h.iterates[k]});
        r.witness.push_back({"x_k1", h.iterates[k + 1]});
    }
}

}  // namespace

void StopRule::validate(const BlockStructure& structure) const {
    if (max_iterations == 0)
        throw ParameterError("max_iterations must be positive");
    if (!(step_tol >= 0.0))
        throw ParameterError("step tolerance must be nonnegative");
    if (residual_tol && !(*residual_tol >= 0.0))
        throw ParameterError("residual tolerance must be nonnegative");
    for (std::size_t j : watch) structure.check_index(j);
}

std::string to_string(StopReason reason) {
    switch (reason) {
    case StopReason::step_tolerance: return "step_tolerance";
    case StopReason::residual_tolerance: return "residual_tolerance";
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::diverged: return "diverged";
    }
    return "unknown";
}

double IterationHistory::relative_residual(std::size_t k) const {
    if (!rhs_norm)
        throw PreconditionError("history has no residuals");
    return residuals.at(k) / (1.0 + *rhs_norm);
}

std::optional<std::size_t> IterationHistory::first_reaching(double target) const {
    for (std::size_t k = 0; k < residuals.size(); ++k)
        if (relative_residual(k) <= target) return k;
    return std::nullopt;
}

IterationHistory picard(const Operator& op, const ProductVector& x0, const StopRule& stop,
                        const RunOptions& options) {
    if (x0.structure() != op.structure())
        throw ShapeError("starting point lives in another space");
    return iterate(x0, stop, options, nullptr,
                   [&](const ProductVector& x, std::size_t) { return op.apply(x); });
}

ContractionBounds contraction_bounds(const IterationHistory& history, std::size_t j,
                                     double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw ParameterError("contraction modulus must lie in [0, 1)");
    history.structure.check_index(j);
    if (history.iterations() == 0)
        throw PreconditionError("bounds need at least two iterates");
    ContractionBounds b;
    b.component = j;
    b.alpha = alpha;
    const double first = history.steps[0][j];
    const double c = 1.0 / (1.0 - alpha);
    double power = 1.0;
    for (std::size_t k = 1; k <= history.iterations(); ++k) {
        power *= alpha;
        b.a_priori.push_back(power * c * first);
        b.a_posteriori.push_back(alpha * c * history.steps[k - 1][j]);
    }
    return b;
}

PropertyReport check_error_bounds(const IterationHistory& history, const ContractionBounds& bounds,
                                  std::span<const double> fixed_block) {
    const auto d = block_distances(history, bounds.component, fixed_block);
    if (bounds.a_priori.size() + 1 != d.size())
        throw ShapeError("bounds and history have different lengths");
    PropertyReport r;
    r.property = "contraction_error_bounds";
    r.scope = Scope::block(bounds.component);
    r.parameters["alpha"] = bounds.alpha;
    r.tolerance = 0.0;
    std::size_t worst_k = 0;
    for (std::size_t k = 1; k < d.size(); ++k) {
        for (double bound : {bounds.a_priori[k - 1], bounds.a_posteriori[k - 1]}) {
            const double v = d[k] - bound - kBoundSlack * (1.0 + bound);
            if (v > r.max_violation) {
                r.max_violation = v;
                worst_k = k;
            }
            ++r.samples_tested;
        }
    }
    r.parameters["worst_k"] = static_cast<double>(worst_k);
    finalize(r);
    if (!r.passed()) r.witness.push_back({"x_k", history.iterates[worst_k]});
    return r;
}

PropertyReport rate_check(const IterationHistory& history, std::size_t j, double alpha,
                          std::span<const double> fixed_block) {
    if (fixed_block.empty())
        throw ParameterError("rate check needs the fixed-point block x_j*");
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw ParameterError("contraction modulus must lie in [0, 1)");
    const auto d = block_distances(history, j, fixed_block);
    PropertyReport r;
    r.property = "contraction_rate";
    r.scope = Scope::block(j);
    r.parameters["alpha"] = alpha;
    r.tolerance = kBoundSlack;
    std::size_t worst = 0;
    for (std::size_t k = 1; k < d.size(); ++k) {
        const double v = d[k] - alpha * d[k - 1];
        if (v > r.max_violation) {
            r.max_violation = v;
            worst = k;
        }
        ++r.samples_tested;
    }
    r.parameters["worst_k"] = static_cast<double>(worst);
    finalize(r);
    if (!r.passed()) attach_pair_witness(r, history, worst - 1);
    return r;
}

std::vector<double> cimmino_step(const LinearSystem& system, std::span<const double> w,
                                 double lambda, std::span<const double> x, Validation mode) {
    check_lambda(lambda, mode, "cimmino");
    check_simplex(w, system.rows());
    const auto r = scaled_residuals(system, x);
    std::vector<double> acc(system.cols(), 0.0);
    for (std::size_t i = 0; i < system.rows(); ++i) {
        const double c = w[i] * r[i];
        for (const auto& e : system.row(i)) acc[e.col] += c * e.value;
    }
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += lambda * acc[j];
    return out;
}

std::vector<double> drop_step(const LinearSystem& system, const SparsityProfile& s, double lambda,
                              std::span<const double> x, Validation mode) {
    check_lambda(lambda, mode, "drop");
    if (s.size() != system.cols())
        throw ShapeError("sparsity profile does not match the number of columns");
    const auto r = scaled_residuals(system, x);
    std::vector<double> acc(system.cols(), 0.0);
    for (std::size_t i = 0; i < system.rows(); ++i)
        for (const auto& e : system.row(i)) acc[e.col] += r[i] * e.value;
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] += lambda / static_cast<double>(s[j]) * acc[j];
    return out;
}

namespace {

Operator general_cw_operator(const std::vector<Operator>& ops, const WeightMatrix& w,
                             double lambda, Validation mode, bool route_unnormalized) {
    if (ops.empty())
        throw ParameterError("general_cw needs at least one operator");
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw ParameterError("general_cw: relaxation must be finite and nonnegative");
    const std::size_t n = ops.front().structure().size();
    std::vector<double> lambdas(n, lambda);
    if (mode == Validation::strict) {
        if (!w.normalized()) {
            if (!route_unnormalized)
                throw WeightError("general_cw: strict mode needs every weight column to sum to 1");
            // lambda in (0, 2/w_.j] is enforced by the combinator.
            return componental_weighted(ops, w, std::move(lambdas), Validation::strict);
        }
        check_lambda(lambda, mode, "general_cw");
    }
    return componental_weighted(ops, w, std::move(lambdas), Validation::permissive);
}

}  // namespace

ProductVector general_cw_step(const std::vector<Operator>& ops, const WeightMatrix& w,
                              double lambda, const ProductVector& x, Validation mode) {
    return general_cw_operator(ops, w, lambda, mode, false).apply(x);
}

IterationHistory run_cimmino(const LinearSystem& system, std::vector<double> w, double lambda,
                             std::span<const double> x0, const StopRule& stop,
                             const RunOptions& options) {
    if (w.empty()) w.assign(system.rows(), 1.0 / static_cast<double>(system.rows()));
    check_simplex(w, system.rows());
    if (!options.relaxation_schedule) check_lambda(lambda, options.mode, "cimmino");
    return iterate(as_scalar_vector(x0), stop, options, &system,
                   [&](const ProductVector& x, std::size_t k) {
                       const double l =
                           options.relaxation_schedule ? options.relaxation_schedule(k) : lambda;
                       return as_scalar_vector(cimmino_step(system, w, l, x.values(), options.mode));
                   });
}

IterationHistory run_drop(const LinearSystem& system, double lambda, std::span<const double> x0,
                          const StopRule& stop, const RunOptions& options) {
    const SparsityProfile s = column_sparsity(system);
    if (!options.relaxation_schedule) check_lambda(lambda, options.mode, "drop");
    return iterate(as_scalar_vector(x0), stop, options, &system,
                   [&](const ProductVector& x, std::size_t k) {
                       const double l =
                           options.relaxation_schedule ? options.relaxation_schedule(k) : lambda;
                       return as_scalar_vector(drop_step(system, s, l, x.values(), options.mode));
                   });
}

IterationHistory run_general_cw(const std::vector<Operator>& ops, const WeightMatrix& w,
                                double lambda, const ProductVector& x0, const StopRule& stop,
                                const RunOptions& options, const LinearSystem* system) {
    if (!ops.empty() && x0.structure() != ops.front().structure())
        throw ShapeError("starting point lives in another space");
    if (system && system->cols() != x0.structure().total_dim())
        throw ShapeError("linear system does not match the operator space");
    if (options.relaxation_schedule) {
        return iterate(x0, stop, options, system, [&](const ProductVector& x, std::size_t k) {
            return general_cw_operator(ops, w, options.relaxation_schedule(k), options.mode, true)
                .apply(x);
        });
    }
    const Operator op = general_cw_operator(ops, w, lambda, options.mode, true);
    return iterate(x0, stop, options, system,
                   [&](const ProductVector& x, std::size_t) { return op.apply(x); });
}

Method parse_method(const std::string& name) {
    if (name == "picard") return Method::picard;
    if (name == "cimmino") return Method::cimmino;
    if (name == "drop") return Method::drop;
    if (name == "general-cw" || name == "general_cw") return Method::general_cw;
    throw ParameterError("unknown method '" + name + "'");
}

std::string to_string(Method method) {
    switch (method) {
    case Method::picard: return "picard";
    case Method::cimmino: return "cimmino";
    case Method::drop: return "drop";
    case Method::general_cw: return "general-cw";
    }
    return "unknown";
}

IterationHistory solve(const SolveRequest& req, const StopRule& stop, const RunOptions& options) {
    auto start = [&](const BlockStructure& s) {
        if (req.x0) {
            if (req.x0->structure().total_dim() != s.total_dim())
                throw ShapeError("starting point has the wrong dimension");
            return ProductVector(s, std::vector<double>(req.x0->values().begin(),
                                                        req.x0->values().end()));
        }
        return ProductVector(s);
    };
    auto need_system = [&]() -> const LinearSystem& {
        if (!req.system)
            throw ParameterError(to_string(req.method) + " needs a linear system");
        return *req.system;
    };
    switch (req.method) {
    case Method::picard: {
        if (!req.op) throw ParameterError("picard needs an operator");
        return picard(*req.op, start(req.op->structure()), stop, options);
    }
    case Method::cimmino: {
        const auto& sys = need_system();
        const auto x0 = start(BlockStructure::scalar(sys.cols()));
        return run_cimmino(sys, req.cimmino_weights, req.lambda, x0.values(), stop, options);
    }
    case Method::drop: {
        const auto& sys = need_system();
        const auto x0 = start(BlockStructure::scalar(sys.cols()));
        return run_drop(sys, req.lambda, x0.values(), stop, options);
    }
    case Method::general_cw: {
        const LinearSystem* sys = req.system ? &*req.system : nullptr;
        std::vector<Operator> ops = req.ops;
        if (ops.empty()) {
            if (!sys) throw ParameterError("general-cw needs operators or a linear system");
            ops = hyperplane_operators(*sys);
        }
        std::optional<WeightMatrix> w = req.weights;
        if (!w) {
            if (!sys) throw ParameterError("general-cw needs weights");
            w = drop_weights(*sys, column_sparsity(*sys));
        }
        if (w->rows() != ops.size() || w->cols() != ops.front().structure().size())
            throw ShapeError("weight matrix must be operators x components");
        return run_general_cw(ops, *w, req.lambda, start(ops.front().structure()), stop, options,
                              sys);
    }
    }
    throw ParameterError("unknown method");
}

PropertyReport fejer_monitor(const IterationHistory& history, const ProductVector& z,
                             std::optional<double> rho) {
    const auto d = distances_to(history, z);
    PropertyReport r;
    r.property = "fejer_monotone";
    r.scope = Scope::whole();
    r.tolerance = kFejerTol;
    const bool sqne = rho && *rho > 0.0;
    if (rho) r.parameters["rho"] = *rho;
    std::size_t worst_k = 0, worst_j = 0;
    double sqne_worst = 0.0;
    for (std::size_t k = 0; k + 1 < d.size(); ++k) {
        for (std::size_t j = 0; j < d[k].size(); ++j) {
            double v = d[k + 1][j] - d[k][j];
            if (sqne) {
                const double step = history.steps[k][j];
                const double q = d[k + 1][j] * d[k + 1][j] - d[k][j] * d[k][j] + *rho * step * step;
                sqne_worst = std::max(sqne_worst, q);
                v = std::max(v, q);
            }
            if (v > r.max_violation) {
                r.max_violation = v;
                worst_k = k;
                worst_j = j;
            }
            ++r.samples_tested;
        }
    }
    r.parameters["worst_k"] = static_cast<double>(worst_k);
    r.parameters["worst_j"] = static_cast<double>(worst_j);
    if (sqne) r.parameters["sqne_max_violation"] = sqne_worst;
    finalize(r);
    if (rho && !sqne) r.note += "; rho <= 0, QNE only";
    if (!r.passed()) attach_pair_witness(r, history, worst_k);
    return r;
}

PropertyReport fejer_monitor_global(const IterationHistory& history, const ProductVector& z) {
    const auto d = distances_to(history, z);
    PropertyReport r;
    r.property = "fejer_monotone_global";
    r.scope = Scope::whole();
    r.tolerance = kFejerTol;
    auto total = [](const std::vector<double>& row) {
        double s = 0.0;
        for (double v : row) s += v * v;
        return std::sqrt(s);
    };
    std::size_t worst_k = 0;
    for (std::size_t k = 0; k + 1 < d.size(); ++k) {
        const double v = total(d[k + 1]) - total(d[k]);
        if (v > r.max_violation) {
            r.max_violation = v;
            worst_k = k;
        }
        ++r.samples_tested;
    }
    r.parameters["worst_k"] = static_cast<double>(worst_k);
    finalize(r);
    if (!r.passed()) attach_pair_witness(r, history, worst_k);
    return r;
}

void write_history_csv(std::ostream& out, const IterationHistory& h) {
    const std::size_t n = h.structure.size();
    out << "k,residual";
    for (std::size_t j = 0; j < n; ++j) out << ",step_" << j << ",dist_" << j;
    out << '\n';
    for (std::size_t k = 0; k <= h.iterations(); ++k) {
        out << k << ',';
        if (k < h.residuals.size()) out << format_double(h.residuals[k]);
        for (std::size_t j = 0; j < n; ++j) {
            out << ',';
            if (k >= 1) out << format_double(h.steps[k - 1][j]);
            out << ',';
            if (k < h.distances.size()) out << format_double(h.distances[k][j]);
        }
        out << '\n';
    }
}

}  // namespace cfx

#include "cfx/cli.hpp"

#include "cfx/errors.hpp"
#include "cfx/operators.hpp"
#include "cfx/problems.hpp"
#include "cfx/property_checks.hpp"
#include "cfx/solvers.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace cfx::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- config helpers --------------------------------------------------------

void allow_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object())
        throw ParseError(where + " must be a JSON object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw ParseError("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(where + "." + key + ": " + e.what());
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
    return obj.contains(key) ? get<T>(obj, key, where) : fallback;
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("'" + path.string() + "': " + e.what());
    }
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open '" + path.string() + "'");
    return in;
}

/// Inline document, or a path to one.
json document(const json& value, const fs::path& base, const std::string& where) {
    if (value.is_string())
        return read_json_file(base / value.get<std::string>());
    if (value.is_object())
        return value;
    throw ParseError(where + " must be a path or an inline JSON object");
}

Operator load_operator(const json& value, const fs::path& base, const std::string& where) {
    return from_document(document(value, base, where));
}

ProductVector to_point(const json& value, const BlockStructure& s, const std::string& where) {
    std::vector<double> v;
    try {
        v = value.get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ParseError(where + ": " + e.what());
    }
    if (v.size() != s.total_dim())
        throw ShapeError(where + " has " + std::to_string(v.size()) + " coordinates, expected " +
                         std::to_string(s.total_dim()));
    return ProductVector(s, std::move(v));
}

Validation parse_mode(const json& cfg, const std::string& where) {
    const auto mode = get_or<std::string>(cfg, "mode", "strict", where);
    if (mode == "strict") return Validation::strict;
    if (mode == "permissive") return Validation::permissive;
    throw ParseError(where + ".mode must be 'strict' or 'permissive'");
}

struct LoadedSystem {
    LinearSystem system;
    std::optional<std::vector<double>> planted;
};

LoadedSystem load_system(const json& cfg, const fs::path& base, const Overrides& flags) {
    const std::string where = "system";
    allow_keys(cfg, {"matrix", "rhs", "generate", "solution"}, where);
    if (cfg.contains("generate")) {
        if (cfg.contains("matrix") || cfg.contains("rhs"))
            throw ParseError("system: use either 'generate' or 'matrix'/'rhs'");
        const json& g = cfg.at("generate");
        allow_keys(g, {"rows", "cols", "density", "seed"}, "system.generate");
        std::uint64_t seed = get_or<std::uint64_t>(g, "seed", kDefaultSeed, "system.generate");
        if (flags.seed) seed = *flags.seed;
        auto planted = plant_consistent_system(get<std::size_t>(g, "rows", "system.generate"),
                                               get<std::size_t>(g, "cols", "system.generate"),
                                               get<double>(g, "density", "system.generate"), seed);
        return {std::move(planted.system), std::move(planted.solution)};
    }
    if (!cfg.contains("matrix") || !cfg.contains("rhs"))
        throw ParseError("system needs 'matrix' and 'rhs' paths, or 'generate'");
    auto a = open_input(base / get<std::string>(cfg, "matrix", where));
    auto b = open_input(base / get<std::string>(cfg, "rhs", where));
    LoadedSystem out{read_linear_system(a, b), std::nullopt};
    if (cfg.contains("solution")) {
        auto x = open_input(base / get<std::string>(cfg, "solution", where));
        out.planted = read_dense_vector(x);
    }
    return out;
}

StopRule parse_stop(const json& cfg, const Overrides& flags) {
    StopRule stop;
    if (!cfg.is_null()) {
        allow_keys(cfg, {"max_iterations", "step_tol", "residual_tol", "watch"}, "stop");
        stop.max_iterations = get_or<std::size_t>(cfg, "max_iterations", stop.max_iterations, "stop");
        stop.step_tol = get_or<double>(cfg, "step_tol", stop.step_tol, "stop");
        if (cfg.contains("residual_tol"))
            stop.residual_tol = get<double>(cfg, "residual_tol", "stop");
        stop.watch = get_or<std::vector<std::size_t>>(cfg, "watch", {}, "stop");
    }
    if (flags.max_iter) stop.max_iterations = *flags.max_iter;
    return stop;
}

fs::path output_dir(const json& config, const Overrides& flags, const fs::path& base) {
    fs::path dir = flags.out ? fs::path(*flags.out)
                             : base / get_or<std::string>(config, "out", "cfx-out", "config");
    fs::create_directories(dir);
    return dir;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string vector_text(const ProductVector& x) {
    std::ostringstream out;
    write_vector(out, x);
    return out.str();
}

json values_json(std::span<const double> v) { return std::vector<double>(v.begin(), v.end()); }

// ---- check -----------------------------------------------------------------

Sampler parse_sampler(const json& cfg, const BlockStructure& s, std::uint64_t seed) {
    Sampler sampler;
    sampler.seed = seed;
    if (cfg.is_null()) return sampler;
    const std::string where = "sampler";
    allow_keys(cfg, {"seed", "distribution", "lo", "hi", "sigma", "count", "pinned_points",
                     "pinned_pairs"},
               where);
    sampler.seed = get_or<std::uint64_t>(cfg, "seed", seed, where);
    const auto dist = get_or<std::string>(cfg, "distribution", "uniform", where);
    if (dist == "uniform")
        sampler.distribution = Distribution::uniform_box;
    else if (dist == "gaussian")
        sampler.distribution = Distribution::gaussian;
    else
        throw ParseError("sampler.distribution must be 'uniform' or 'gaussian'");
    sampler.lo = get_or<double>(cfg, "lo", sampler.lo, where);
    sampler.hi = get_or<double>(cfg, "hi", sampler.hi, where);
    sampler.sigma = get_or<double>(cfg, "sigma", sampler.sigma, where);
    sampler.count = get_or<std::size_t>(cfg, "count", sampler.count, where);
    if (cfg.contains("pinned_points"))
        for (const auto& p : cfg.at("pinned_points"))
            sampler.pinned_points.push_back(to_point(p, s, "sampler.pinned_points"));
    if (cfg.contains("pinned_pairs"))
        for (const auto& p : cfg.at("pinned_pairs")) {
            if (!p.is_array() || p.size() != 2)
                throw ParseError("sampler.pinned_pairs entries must be [x, y]");
            sampler.pinned_pairs.emplace_back(to_point(p[0], s, "sampler.pinned_pairs"),
                                              to_point(p[1], s, "sampler.pinned_pairs"));
        }
    return sampler;
}

std::vector<Scope> parse_scopes(const json& entry, const BlockStructure& s, bool block_only) {
    if (!entry.contains("component") ||
        (entry.at("component").is_string() && entry.at("component") == "whole")) {
        if (block_only)
            throw ParseError("this check needs a component index or \"each\"");
        return {Scope::whole()};
    }
    const json& c = entry.at("component");
    if (c.is_string() && c == "each") {
        std::vector<Scope> out;
        for (std::size_t j = 0; j < s.size(); ++j) out.push_back(Scope::block(j));
        return out;
    }
    if (!c.is_number_unsigned())
        throw ParseError("component must be an index, \"whole\" or \"each\"");
    const auto j = c.get<std::size_t>();
    s.check_index(j);
    return {Scope::block(j)};
}

FixedPointCertificate parse_certificate(const json& entry, const BlockStructure& s) {
    if (!entry.contains("fixed_points"))
        throw ParseError("this check needs 'fixed_points'");
    FixedPointCertificate cert;
    for (const auto& p : entry.at("fixed_points"))
        cert.points.push_back(to_point(p, s, "fixed_points"));
    return cert;
}

std::vector<PropertyReport> run_check(const Operator& op, const json& entry,
                                      const Sampler& sampler, double tol) {
    const std::string where = "checks[]";
    allow_keys(entry, {"property", "component", "lambda", "alpha", "rho", "fixed_points", "point",
                       "max"},
               where);
    const auto property = get<std::string>(entry, "property", where);
    const auto& s = op.structure();
    std::vector<PropertyReport> out;
    const bool block_only = property == "locality";
    for (const Scope scope : parse_scopes(entry, s, block_only)) {
        if (property == "nonexpansive") {
            out.push_back(check_nonexpansive(op, scope, sampler, tol));
        } else if (property == "fne") {
            out.push_back(check_fne(op, scope, sampler, tol));
        } else if (property == "rfne") {
            out.push_back(check_rfne(op, scope, get<double>(entry, "lambda", where), sampler, tol));
        } else if (property == "averaged") {
            out.push_back(check_averaged(op, scope, get<double>(entry, "alpha", where), sampler, tol));
        } else if (property == "contraction") {
            out.push_back(
                check_contraction(op, scope, get<double>(entry, "alpha", where), sampler, tol));
        } else if (property == "cutter") {
            out.push_back(check_cutter(op, scope, parse_certificate(entry, s), sampler, tol));
        } else if (property == "qne") {
            out.push_back(check_qne(op, scope, parse_certificate(entry, s), sampler, tol));
        } else if (property == "sqne") {
            out.push_back(check_sqne(op, scope, get<double>(entry, "rho", where),
                                     parse_certificate(entry, s), sampler, tol));
        } else if (property == "sqne_strict") {
            out.push_back(check_sqne_strict(op, scope, parse_certificate(entry, s), sampler, tol));
        } else if (property == "fj_membership") {
            if (!entry.contains("point"))
                throw ParseError("fj_membership needs 'point'");
            out.push_back(
                check_fj_membership(op, to_point(entry.at("point"), s, "point"), scope, sampler, tol));
        } else if (property == "fact3") {
            auto battery = check_fact3_battery(op, scope, sampler, tol);
            for (auto& r : battery.reports) out.push_back(std::move(r));
        } else if (property == "locality") {
            out.push_back(check_component_locality(op, *scope.component, sampler, tol));
        } else if (property == "modulus") {
            PropertyReport r;
            r.property = "contraction_modulus_estimate";
            r.scope = scope;
            r.seed = sampler.seed;
            const double estimate = estimate_contraction_modulus(op, scope, sampler);
            r.parameters["estimate"] = estimate;
            r.samples_tested = draw_pairs(sampler, s).size();
            if (entry.contains("max")) {
                const double max = get<double>(entry, "max", where);
                r.parameters["max"] = max;
                r.max_violation = std::max(0.0, estimate - max);
            }
            r.tolerance = 0.0;
            r.verdict = r.max_violation > 0.0 ? Verdict::fail : Verdict::pass;
            r.note = "sampled lower bound for the Lipschitz modulus";
            out.push_back(std::move(r));
        } else {
            throw ParseError("unknown property '" + property + "'");
        }
    }
    return out;
}

// ---- solve -----------------------------------------------------------------

WeightMatrix parse_weights(const json& value, const LinearSystem* system, std::size_t m,
                           std::size_t n) {
    if (value.is_array()) {
        try {
            return WeightMatrix::from_rows(value.get<std::vector<std::vector<double>>>());
        } catch (const json::exception& e) {
            throw ParseError(std::string("weights: ") + e.what());
        }
    }
    allow_keys(value, {"scheme", "w"}, "weights");
    const auto scheme = get<std::string>(value, "scheme", "weights");
    if (scheme == "uniform") {
        std::vector<double> w(m, 1.0 / static_cast<double>(m));
        return WeightMatrix::broadcast(w, n);
    }
    if (!system)
        throw ParseError("weights scheme '" + scheme + "' needs a linear system");
    const auto s = column_sparsity(*system);
    if (scheme == "support-normalized")
        return drop_weights(*system, s, SupportNormalized{});
    if (scheme == "row-over-sparsity")
        return drop_weights(*system, s,
                            RowWeightsOverSparsity{get<std::vector<double>>(value, "w", "weights")});
    throw ParseError("unknown weights scheme '" + scheme + "'");
}

json history_summary(const IterationHistory& h) {
    json out = {{"iterations", h.iterations()},
                {"stop_reason", to_string(h.stop_reason)},
                {"final_iterate", values_json(h.final_iterate().values())}};
    if (!h.residuals.empty()) {
        out["final_residual"] = h.residuals.back();
        out["final_relative_residual"] = h.relative_residual(h.residuals.size() - 1);
    }
    return out;
}

std::string history_csv(const IterationHistory& h) {
    std::ostringstream out;
    write_history_csv(out, h);
    return out.str();
}

}  // namespace

void write_atomically(const fs::path& path, const std::string& contents) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write '" + tmp.string() + "'");
        out << contents;
        out.flush();
        if (!out)
            throw Error("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, path);
}

int cmd_check(const json& config, const Overrides& flags, const fs::path& base, std::ostream& log) {
    allow_keys(config, {"operator", "checks", "sampler", "tolerance", "seed", "out"}, "config");
    if (!config.contains("operator") || !config.contains("checks"))
        throw ParseError("check config needs 'operator' and 'checks'");
    const Operator op = load_operator(config.at("operator"), base, "operator");
    std::uint64_t seed = get_or<std::uint64_t>(config, "seed", kDefaultSeed, "config");
    Sampler sampler = parse_sampler(config.value("sampler", json()), op.structure(), seed);
    if (flags.seed) sampler.seed = *flags.seed;
    const double tol = get_or<double>(config, "tolerance", kDefaultTolerance, "config");
    const json& checks = config.at("checks");
    if (!checks.is_array() || checks.empty())
        throw ParseError("'checks' must be a nonempty array");

    std::vector<PropertyReport> reports;
    for (const auto& entry : checks)
        for (auto& r : run_check(op, entry, sampler, tol)) reports.push_back(std::move(r));

    const fs::path dir = output_dir(config, flags, base);
    json list = json::array();
    bool all_pass = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        json entry = to_json(r);
        json files = json::array();
        for (const auto& w : r.witness) {
            const std::string name = "witness_" + std::to_string(i) + "_" + w.role + ".txt";
            write_atomically(dir / name, vector_text(w.point));
            files.push_back(name);
        }
        entry["witness_files"] = files;
        list.push_back(std::move(entry));
        all_pass = all_pass && r.passed();
        log << r.property << ' ' << r.scope.label() << ' ' << (r.passed() ? "pass" : "fail")
            << " max_violation=" << format_double(r.max_violation) << '\n';
    }
    json doc = {{"command", "check"},
                {"operator", to_document(op)},
                {"reports", list},
                {"passed", all_pass}};
    write_atomically(dir / "reports.json", dump(doc));
    return all_pass ? kPass : kRefuted;
}

int cmd_solve(const json& config, const Overrides& flags, const fs::path& base, std::ostream& log) {
    const std::string where = "config";
    allow_keys(config, {"method", "operator", "operators", "cfp", "system", "weights",
                        "cimmino_weights", "lambda", "mode", "x0", "reference", "stop",
                        "thinning", "fejer", "seed", "out"},
               where);
    SolveRequest req;
    req.method = parse_method(get<std::string>(config, "method", where));
    req.lambda = get_or<double>(config, "lambda", 1.0, where);
    RunOptions options;
    options.mode = parse_mode(config, where);
    options.thinning = get_or<std::size_t>(config, "thinning", 1, where);
    StopRule stop = parse_stop(config.value("stop", json()), flags);

    std::optional<std::vector<double>> planted;
    std::optional<BlockStructure> structure;
    if (config.contains("system")) {
        auto loaded = load_system(config.at("system"), base, flags);
        req.system = std::move(loaded.system);
        planted = std::move(loaded.planted);
        structure = BlockStructure::scalar(req.system->cols());
    }
    if (config.contains("operator")) {
        req.op = load_operator(config.at("operator"), base, "operator");
        structure = req.op->structure();
    }
    if (config.contains("operators")) {
        for (const auto& o : config.at("operators"))
            req.ops.push_back(load_operator(o, base, "operators[]"));
        if (req.ops.empty())
            throw ParseError("'operators' must be nonempty");
        structure = req.ops.front().structure();
    }
    if (config.contains("cfp")) {
        const CfpInstance cfp = cfp_from_json(document(config.at("cfp"), base, "cfp"));
        req.ops = cfp_projection_operators(cfp);
        structure = cfp.structure();
        if (cfp.planted()) {
            auto v = cfp.planted()->values();
            planted = std::vector<double>(v.begin(), v.end());
        }
    }
    if (!structure)
        throw ParseError("solve config needs a 'system', 'operator', 'operators' or 'cfp'");
    if (config.contains("weights")) {
        const std::size_t m = req.ops.empty() && req.system ? req.system->rows() : req.ops.size();
        req.weights = parse_weights(config.at("weights"), req.system ? &*req.system : nullptr, m,
                                    structure->size());
    } else if (req.method == Method::general_cw && !req.system && !req.ops.empty()) {
        std::vector<double> w(req.ops.size(), 1.0 / static_cast<double>(req.ops.size()));
        req.weights = WeightMatrix::broadcast(w, structure->size());
    }
    req.cimmino_weights = get_or<std::vector<double>>(config, "cimmino_weights", {}, where);
    if (config.contains("x0")) req.x0 = to_point(config.at("x0"), *structure, "x0");

    if (config.contains("reference")) {
        const json& ref = config.at("reference");
        if (ref.is_string() && ref == "planted") {
            if (!planted)
                throw ParseError("reference 'planted' needs a generated system or a planted point");
            options.reference = ProductVector(*structure, *planted);
        } else {
            options.reference = to_point(ref, *structure, "reference");
        }
    } else if (planted) {
        options.reference = ProductVector(*structure, *planted);
    }
    const bool fejer = get_or<bool>(config, "fejer", false, where);
    if (fejer && !options.reference)
        throw ParameterError("fejer monitoring needs a reference point");

    const fs::path dir = output_dir(config, flags, base);
    json summary = {{"command", "solve"}, {"method", to_string(req.method)}, {"lambda", req.lambda}};
    int code = kPass;
    try {
        IterationHistory h = solve(req, stop, options);
        summary.update(history_summary(h));
        if (fejer) {
            const double l = req.lambda;
            std::optional<double> rho;
            if (l > 0.0) rho = (2.0 - l) / l;
            PropertyReport per = fejer_monitor(h, *options.reference, rho);
            PropertyReport global = fejer_monitor_global(h, *options.reference);
            summary["fejer"] = to_json(per);
            summary["fejer_global"] = to_json(global);
            if (!per.passed() || !global.passed()) code = kRefuted;
        }
        write_atomically(dir / "history.csv", history_csv(h));
        log << to_string(req.method) << ": " << h.iterations() << " iterations, "
            << to_string(h.stop_reason) << '\n';
    } catch (const DivergenceError& e) {
        const IterationHistory& h = e.history();
        summary.update(history_summary(h));
        summary["last_finite"] = values_json(e.last_finite().values());
        summary["error"] = e.what();
        write_atomically(dir / "history.csv", history_csv(h));
        log << to_string(req.method) << ": diverged after " << h.iterations() << " iterations\n";
        code = kDiverged;
    }
    write_atomically(dir / "summary.json", dump(summary));
    return code;
}

int cmd_compare(const json& config, const Overrides& flags, const fs::path& base,
                std::ostream& log) {
    const std::string where = "config";
    allow_keys(config, {"system", "lambda", "mode", "x0", "target", "stop", "cimmino_weights",
                        "seed", "out"},
               where);
    if (!config.contains("system"))
        throw ParseError("compare config needs 'system'");
    Overrides system_flags = flags;
    if (!system_flags.seed && config.contains("seed"))
        system_flags.seed = get<std::uint64_t>(config, "seed", where);
    const auto loaded = load_system(config.at("system"), base, system_flags);
    const LinearSystem& sys = loaded.system;
    const double lambda = get_or<double>(config, "lambda", 1.0, where);
    const double target = get_or<double>(config, "target", 1e-3, where);
    RunOptions options;
    options.mode = parse_mode(config, where);
    StopRule stop = parse_stop(config.value("stop", json()), flags);
    if (!stop.residual_tol) stop.residual_tol = target;
    const BlockStructure s = BlockStructure::scalar(sys.cols());
    const ProductVector x0 =
        config.contains("x0") ? to_point(config.at("x0"), s, "x0") : ProductVector(s);
    const auto cimmino_w = get_or<std::vector<double>>(config, "cimmino_weights", {}, where);

    const fs::path dir = output_dir(config, flags, base);
    json summary = {{"command", "compare"}, {"lambda", lambda}, {"target", target}};
    std::optional<IterationHistory> drop, cimmino;
    try {
        drop = run_drop(sys, lambda, x0.values(), stop, options);
        cimmino = run_cimmino(sys, cimmino_w, lambda, x0.values(), stop, options);
    } catch (const DivergenceError& e) {
        summary["error"] = e.what();
        write_atomically(dir / "summary.json", dump(summary));
        log << "compare: diverged\n";
        return kDiverged;
    }

    std::ostringstream csv;
    csv << "k,drop_relative_residual,cimmino_relative_residual\n";
    const std::size_t rows = std::max(drop->residuals.size(), cimmino->residuals.size());
    for (std::size_t k = 0; k < rows; ++k) {
        csv << k << ',';
        if (k < drop->residuals.size()) csv << format_double(drop->relative_residual(k));
        csv << ',';
        if (k < cimmino->residuals.size()) csv << format_double(cimmino->relative_residual(k));
        csv << '\n';
    }
    write_atomically(dir / "compare.csv", csv.str());

    auto describe = [&](const IterationHistory& h) {
        json out = {{"iterations", h.iterations()}, {"stop_reason", to_string(h.stop_reason)}};
        auto first = h.first_reaching(target);
        out["first_reaching_target"] = first ? json(*first) : json(nullptr);
        out["final_relative_residual"] = h.relative_residual(h.residuals.size() - 1);
        return out;
    };
    summary["drop"] = describe(*drop);
    summary["cimmino"] = describe(*cimmino);
    write_atomically(dir / "summary.json", dump(summary));
    log << "drop reaches " << format_double(target) << " at "
        << summary["drop"]["first_reaching_target"].dump() << ", cimmino at "
        << summary["cimmino"]["first_reaching_target"].dump() << '\n';
    return kPass;
}

int run(int argc, char** argv, std::ostream& log, std::ostream& err) {
    CLI::App app{"Componental fixed-point toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> max_iter;
    for (const char* name : {"check", "solve", "compare"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--seed", seed, "overrides the config seed");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--max-iter", max_iter, "overrides stop.max_iterations");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        log << app.help();
        return kPass;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kInputError;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    Overrides flags{seed, out, max_iter};
    try {
        const fs::path path(config_path);
        const json config = read_json_file(path);
        const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
        if (command == "check") return cmd_check(config, flags, base, log);
        if (command == "solve") return cmd_solve(config, flags, base, log);
        return cmd_compare(config, flags, base, log);
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kDiverged;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace cfx::cli

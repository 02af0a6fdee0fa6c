#include "spde/cli.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "spde/conditions.hpp"
#include "spde/error.hpp"
#include "spde/field_io.hpp"
#include "spde/moments.hpp"
#include "spde/noise.hpp"
#include "spde/parallel.hpp"
#include "spde/serialize.hpp"
#include "spde/solvers.hpp"

namespace spde::cli {

namespace {

using nlohmann::json;

enum class Type { number, integer, string, numbers, boolean };

struct Key {
    std::string name;
    Type type;
    json fallback; // null: optional without default
    std::string help;
};

// Keys shared by every command.
std::vector<Key> common_keys() {
    return {{"seed", Type::integer, nullptr, "RNG seed (required with --strict)"},
            {"threads", Type::integer, 0, "worker threads (0: SPDE_LAB_THREADS or OpenMP default)"}};
}

std::map<std::string, std::vector<Key>> schemas() {
    std::map<std::string, std::vector<Key>> s;
    s["simulate"] = {
        {"model", Type::string, "gbm", "gbm|gfbm|sde_picard|linear_heat|pam_euler|heat_picard"},
        {"t", Type::number, 1.0, "final time"},
        {"p", Type::numbers, json::array({2.0}), "moment orders"},
        {"replicas", Type::integer, 1000, "Monte Carlo replicas"},
        {"hurst", Type::number, 0.75, "Hurst index (gfbm)"},
        {"steps", Type::integer, 64, "time steps"},
        {"cells", Type::integer, 127, "spatial cells (odd keeps x=0 a node)"},
        {"half_width", Type::number, 8.0, "spatial half width L"},
        {"sigma", Type::string, "identity", "identity|affine:a,b|sin|tanh|atan"},
        {"iterations", Type::integer, 8, "Picard iterations"},
        {"x0", Type::number, 1.0, "initial value for Picard runs"},
        {"rule", Type::string, "midpoint", "midpoint|cell_rms"},
        {"format", Type::string, "csv", "csv|json"}};
    s["chaos"] = {{"model", Type::string, "pam", "pam|bm|fbm"},
                  {"t", Type::number, 1.0, "time"},
                  {"n", Type::integer, 60, "truncation order"},
                  {"b", Type::number, 0.0, "endpoint value B_t (bm, fbm)"},
                  {"hurst", Type::number, 0.75, "Hurst index (fbm)"}};
    s["check"] = {{"op", Type::string, "heat", "heat|wave"},
                  {"alpha", Type::number, 1.0, "Riesz order"},
                  {"hurst", Type::number, nullptr, "Hurst index; omit for white time"},
                  {"d", Type::integer, 2, "spatial dimension"},
                  {"method", Type::string, "closed_form", "closed_form|quadrature"}};
    s["certificate"] = {{"profile", Type::string, "heat_1d", "heat_1d|wave_1d|constant"},
                        {"beta", Type::number, 1.0, "constant profile value"},
                        {"t", Type::number, 1.0, "horizon T"},
                        {"m", Type::number, 1.0, "bound M"},
                        {"n_max", Type::integer, 20, "largest n"},
                        {"replicas", Type::integer, 100000, "Monte Carlo replicas"}};
    s["fk"] = {{"t", Type::number, 0.25, "time"},
               {"hurst", Type::number, 0.7, "Hurst index"},
               {"alpha", Type::number, 0.5, "Riesz order"},
               {"d", Type::integer, 1, "spatial dimension"},
               {"replicas", Type::integer, 10000, "Monte Carlo replicas"},
               {"quad_steps", Type::integer, 128, "time quadrature cells"},
               {"delta_floor", Type::number, nullptr, "distance floor (default half a step)"}};
    s["holder"] = {{"t", Type::number, 1.0, "final time"},
                   {"steps", Type::integer, 512, "time steps"},
                   {"cells", Type::integer, 512, "spatial cells"},
                   {"half_width", Type::number, 4.0, "spatial half width L"},
                   {"replicas", Type::integer, 64, "ensemble size"},
                   {"p", Type::number, 2.0, "norm order"},
                   {"rule", Type::string, "cell_rms", "midpoint|cell_rms"}};
    s["noise"] = {{"kind", Type::string, "white", "white|fractional_riesz|bm|fbm"},
                  {"t", Type::number, 1.0, "final time"},
                  {"steps", Type::integer, 64, "time steps"},
                  {"cells", Type::integer, 64, "cells per axis"},
                  {"half_width", Type::number, 4.0, "spatial half width L"},
                  {"d", Type::integer, 1, "spatial dimension"},
                  {"hurst", Type::number, 0.75, "Hurst index"},
                  {"alpha", Type::number, 0.5, "Riesz order"},
                  {"format", Type::string, "spdf", "spdf|csv"}};
    for (auto& [name, keys] : s) {
        for (auto& k : common_keys()) keys.push_back(k);
    }
    return s;
}

json convert(const Key& key, const std::string& text) {
    try {
        std::size_t used = 0;
        switch (key.type) {
        case Type::number: {
            const double v = std::stod(text, &used);
            if (used != text.size()) break;
            return v;
        }
        case Type::integer: {
            const long long v = std::stoll(text, &used);
            if (used != text.size()) break;
            return v;
        }
        case Type::boolean:
            if (text == "true" || text == "1") return true;
            if (text == "false" || text == "0") return false;
            break;
        case Type::string: return text;
        case Type::numbers: {
            json arr = json::array();
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const double v = std::stod(item, &used);
                if (used != item.size()) throw std::invalid_argument(item);
                arr.push_back(v);
            }
            if (arr.empty()) break;
            return arr;
        }
        }
    } catch (const std::exception&) {
    }
    throw InputError("invalid value '" + text + "' for '" + key.name + "'");
}

void check_type(const Key& key, const json& v) {
    if (v.is_null()) return;
    bool ok = false;
    switch (key.type) {
    case Type::number: ok = v.is_number(); break;
    case Type::integer: ok = v.is_number_integer(); break;
    case Type::string: ok = v.is_string(); break;
    case Type::boolean: ok = v.is_boolean(); break;
    case Type::numbers:
        ok = v.is_array() && !v.empty();
        for (const auto& e : v) ok = ok && e.is_number();
        break;
    }
    if (!ok) throw InputError("config key '" + key.name + "' has the wrong type");
}

// Accessors with range validation.
struct Params {
    const json& cfg;

    double num(const std::string& k) const { return cfg.at(k).get<double>(); }
    std::optional<double> opt_num(const std::string& k) const {
        const auto& v = cfg.at(k);
        if (v.is_null()) return std::nullopt;
        return v.get<double>();
    }
    std::size_t count(const std::string& k, long long min_value = 1) const {
        const auto v = cfg.at(k).get<long long>();
        if (v < min_value) {
            throw InputError(fmt::format("'{}' must be >= {}", k, min_value));
        }
        return static_cast<std::size_t>(v);
    }
    std::string str(const std::string& k) const { return cfg.at(k).get<std::string>(); }
    double positive(const std::string& k) const {
        const double v = num(k);
        if (!(v > 0.0)) throw DomainError("'" + k + "' must be positive");
        return v;
    }
    std::uint64_t seed() const { return static_cast<std::uint64_t>(cfg.at("seed").get<long long>()); }
};

solvers::LipschitzFn parse_sigma(const std::string& text) {
    if (text == "identity") return solvers::LipschitzFn::identity();
    if (text.rfind("affine:", 0) == 0) {
        const auto body = text.substr(7);
        const auto comma = body.find(',');
        if (comma == std::string::npos) throw InputError("affine sigma needs 'affine:a,b'");
        try {
            return solvers::LipschitzFn::affine(std::stod(body.substr(0, comma)),
                                                std::stod(body.substr(comma + 1)));
        } catch (const std::invalid_argument&) {
            throw InputError("affine sigma needs numeric a,b");
        }
    }
    return solvers::LipschitzFn::bounded_smooth(text);
}

solvers::KernelRule parse_rule(const std::string& text) {
    if (text == "midpoint") return solvers::KernelRule::midpoint;
    if (text == "cell_rms") return solvers::KernelRule::cell_rms;
    throw InputError("unknown kernel rule '" + text + "'");
}

kernels::OperatorKind parse_op(const std::string& text) {
    if (text == "heat") return kernels::OperatorKind::heat;
    if (text == "wave") return kernels::OperatorKind::wave;
    throw InputError("unknown operator '" + text + "'");
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericalError(std::string(what) + " is not finite");
}

json envelope(const json& config) {
    return {{"version", version()}, {"config", config}};
}

void write_csv_banner(std::ostream& os, const json& config) {
    os << "# spde_lab " << version() << " config=" << config.dump() << "\n";
}

std::vector<double> moment_order_list(const Params& prm) {
    std::vector<double> ps = prm.cfg.at("p").get<std::vector<double>>();
    for (double p : ps) {
        if (!(p >= 1.0)) throw DomainError("moment orders must be >= 1");
    }
    return ps;
}

void emit_moments(std::ostream& os, const json& config, const std::string& model, double t,
                  const std::vector<double>& samples, const std::vector<double>& ps,
                  const std::string& format) {
    moments::MomentReport report;
    report.rows = moments::estimate_moments(samples, ps, t, model);
    for (const auto& row : report.rows) require_finite(row.estimate, "moment estimate");
    if (format == "json") {
        json j = envelope(config);
        j["report"] = io::to_json(report);
        os << j.dump(2) << "\n";
    } else {
        write_csv_banner(os, config);
        io::write_moment_csv(os, report.rows);
    }
}

void cmd_simulate(const json& cfg, std::ostream& os) {
    const Params prm{cfg};
    const auto model = prm.str("model");
    const double t = prm.positive("t");
    const auto format = prm.str("format");
    if (format != "csv" && format != "json") throw InputError("format must be csv or json");
    const RngStream rng(prm.seed(), 0);
    const std::size_t steps = prm.count("steps");

    if (model == "sde_picard" || model == "heat_picard") {
        const auto sigma = parse_sigma(prm.str("sigma"));
        const std::size_t it = prm.count("iterations");
        const std::size_t reps = prm.count("replicas");
        solvers::PicardTrace trace;
        if (model == "sde_picard") {
            trace = solvers::solve_sde_picard(sigma, TimeGrid(t, steps), rng, it, reps, prm.num("x0"));
        } else {
            const SpaceTimeGrid grid(TimeGrid(t, steps), prm.positive("half_width"), prm.count("cells"));
            trace = solvers::solve_nonlinear_heat_picard(sigma, grid, rng, it, reps, prm.num("x0"),
                                                         parse_rule(prm.str("rule")));
        }
        json j = envelope(cfg);
        j["trace"] = io::to_json(trace);
        os << j.dump(2) << "\n";
        return;
    }

    const auto ps = moment_order_list(prm);
    const std::size_t reps = prm.count("replicas");
    std::vector<double> samples;
    if (model == "gbm") {
        const TimeGrid grid(t, steps);
        samples = parallel::map_replicas<double>(reps, [&](std::size_t r) {
            return solvers::geometric_bm(sample_bm_path(grid, rng.child(r))).values.back();
        });
    } else if (model == "gfbm") {
        const double h = prm.num("hurst");
        const FbmSampler sampler(h, TimeGrid(t, steps));
        const double shift = 0.5 * std::pow(t, 2.0 * h);
        samples = parallel::map_replicas<double>(reps, [&](std::size_t r) {
            return std::exp(sampler.sample(rng.child(r)).values.back() - shift);
        });
    } else if (model == "linear_heat" || model == "pam_euler") {
        const std::size_t cells = prm.count("cells");
        const SpaceTimeGrid grid(TimeGrid(t, steps), prm.positive("half_width"), cells);
        const std::size_t centre = cells / 2;
        if (model == "linear_heat") {
            const solvers::HeatWeights w(grid, parse_rule(prm.str("rule")));
            samples = parallel::map_replicas<double>(reps, [&](std::size_t r) {
                return solvers::linear_heat_at(w, steps, centre, rng.child(r));
            });
        } else {
            samples = parallel::map_replicas<double>(reps, [&](std::size_t r) {
                const Field noise = sample_white_noise_sheet(grid, rng.child(r));
                return solvers::solve_pam_euler(grid, noise, {steps}).at(0, centre);
            });
        }
    } else {
        throw InputError("unknown simulate model '" + model + "'");
    }
    emit_moments(os, cfg, model, t, samples, ps, format);
}

void cmd_chaos(const json& cfg, std::ostream& os) {
    const Params prm{cfg};
    const auto model = prm.str("model");
    const double t = prm.positive("t");
    const std::size_t n = prm.count("n", 0);
    write_csv_banner(os, cfg);
    if (model == "pam") {
        const auto series = solvers::pam_chaos_series(t, n);
        require_finite(*series.closed_form, "closed-form second moment");
        require_finite(series.partial_sums.back(), "chaos partial sum");
        os << "n,term_variance,partial_sum,closed_form\n";
        for (std::size_t k = 0; k <= n; ++k) {
            fmt::print(os, "{},{:.17g},{:.17g},{:.17g}\n", k,
                       k == 0 ? 1.0 : series.term_variances[k - 1], series.partial_sums[k],
                       *series.closed_form);
        }
        return;
    }
    solvers::ChaosKind kind;
    double closed = 0.0;
    const double b = prm.num("b");
    if (model == "bm") {
        kind = solvers::ChaosKind::bm();
        closed = std::exp(b - 0.5 * t);
    } else if (model == "fbm") {
        const double h = prm.num("hurst");
        kind = solvers::ChaosKind::fbm(h);
        closed = std::exp(b - 0.5 * std::pow(t, 2.0 * h));
    } else {
        throw InputError("unknown chaos model '" + model + "'");
    }
    os << "n,partial_sum,closed_form\n";
    for (std::size_t k = 0; k <= n; ++k) {
        fmt::print(os, "{},{:.17g},{:.17g}\n", k, solvers::chaos_geometric(kind, t, b, k), closed);
    }
}

void cmd_check(const json& cfg, std::ostream& os) {
    const Params prm{cfg};
    const auto op = parse_op(prm.str("op"));
    const double alpha = prm.num("alpha");
    const auto hurst = prm.opt_num("hurst");
    const std::size_t d = prm.count("d");
    const auto method = prm.str("method");
    if (method != "closed_form" && method != "quadrature") {
        throw InputError("method must be closed_form or quadrature");
    }
    conditions::ConditionVerdict v;
    if (!hurst) {
        if (op == kernels::OperatorKind::heat || method == "quadrature") {
            v = method == "closed_form"
                    ? conditions::check_dalang_riesz(alpha, d)
                    : conditions::dalang_integral_numeric(conditions::SpectralMeasure::riesz(alpha, d),
                                                          1.0, d);
        } else {
            v = conditions::check_dalang_riesz(alpha, d);
        }
    } else if (method == "closed_form") {
        v = conditions::check_fractional(op, alpha, *hurst, d);
    } else {
        v = conditions::general_joint_condition(op, conditions::SpectralMeasure::fractional_time(*hurst),
                                                conditions::SpectralMeasure::riesz(alpha, d), d);
    }
    json j = envelope(cfg);
    j["verdict"] = io::to_json(v);
    os << j.dump(2) << "\n";
}

void cmd_certificate(const json& cfg, std::ostream& os) {
    const Params prm{cfg};
    const auto name = prm.str("profile");
    conditions::GProfile g = name == "heat_1d"   ? conditions::GProfile::heat_1d()
                             : name == "wave_1d" ? conditions::GProfile::wave_1d()
                             : name == "constant"
                                 ? conditions::GProfile::constant(prm.num("beta"))
                                 : throw InputError("unknown profile '" + name + "'");
    const auto cert = conditions::dalang_gronwall_certificate(
        g, prm.positive("t"), prm.num("m"), prm.count("n_max", 0), prm.count("replicas"),
        RngStream(prm.seed(), 0));
    json j = envelope(cfg);
    j["certificate"] = io::to_json(cert);
    os << j.dump(2) << "\n";
}

void cmd_fk(const json& cfg, std::ostream& os) {
    const Params prm{cfg};
    moments::FkOptions opt;
    opt.quad_steps = prm.count("quad_steps");
    opt.delta_floor = prm.opt_num("delta_floor");
    const auto spec = NoiseSpec::fractional_riesz(prm.num("hurst"), prm.num("alpha"));
    const std::size_t d = prm.count("d");
    spec.validate(d);
    json j = envelope(cfg);
    try {
        const auto est = moments::fk_second_moment(prm.positive("t"), spec, d, prm.count("replicas", 2),
                                                   opt, RngStream(prm.seed(), 0));
        j["fk"] = io::to_json(est);
    } catch (const moments::ConditionRejected& e) {
        j["error"] = {{"kind", e.kind()}, {"message", e.what()}, {"verdict", io::to_json(e.verdict())}};
        os << j.dump(2) << "\n";
        throw;
    }
    os << j.dump(2) << "\n";
}

void cmd_holder(const json& cfg, std::ostream& os) {
    const Params prm{cfg};
    const SpaceTimeGrid grid(TimeGrid(prm.positive("t"), prm.count("steps")), prm.positive("half_width"),
                             prm.count("cells"));
    const solvers::LinearHeatSolver solver(grid, parse_rule(prm.str("rule")));
    const RngStream rng(prm.seed(), 0);
    std::vector<std::size_t> rows;
    for (std::size_t k = grid.time().n_steps() / 2; k <= grid.time().n_steps(); ++k) rows.push_back(k);
    const auto ensemble = parallel::map_replicas<std::optional<Field>>(
        prm.count("replicas"), [&](std::size_t r) -> std::optional<Field> {
            return solver.solve(sample_white_noise_sheet(grid, rng.child(r)), rows);
        });
    std::vector<Field> fields;
    for (const auto& f : ensemble) fields.push_back(*f);
    const double p = prm.num("p");
    const auto time_fit = moments::holder_estimate(fields, p, moments::Axis::time);
    const auto space_fit = moments::holder_estimate(fields, p, moments::Axis::space);
    const auto predicted = conditions::predicted_holder(kernels::OperatorKind::heat, 0.5);
    json j = envelope(cfg);
    j["time"] = io::to_json(time_fit);
    j["space"] = io::to_json(space_fit);
    j["predicted"] = {{"time", predicted.time}, {"space", predicted.space}};
    os << j.dump(2) << "\n";
}

void cmd_noise(const json& cfg, std::ostream& os) {
    const Params prm{cfg};
    const auto kind = prm.str("kind");
    const auto format = prm.str("format");
    if (format != "spdf" && format != "csv") throw InputError("format must be spdf or csv");
    const TimeGrid tg(prm.positive("t"), prm.count("steps"));
    const RngStream rng(prm.seed(), 0);
    const std::size_t d = prm.count("d");
    if (d > 3) throw DomainError("d must be 1, 2 or 3");

    std::optional<Field> field;
    if (kind == "bm" || kind == "fbm") {
        const Path path = kind == "bm" ? sample_bm_path(tg, rng)
                                       : sample_fbm_path(prm.num("hurst"), tg, rng);
        // A path is stored as a nodes field over a single-cell d = 1 grid.
        field.emplace(SpaceTimeGrid(tg, 0.5, 1, 1), Field::Layout::nodes);
        std::copy(path.values.begin(), path.values.end(), field->values().begin());
    } else {
        const SpaceTimeGrid grid(tg, prm.positive("half_width"), prm.count("cells"), d);
        if (kind == "white") {
            field = sample_white_noise_sheet(grid, rng);
        } else if (kind == "fractional_riesz") {
            const auto spec = NoiseSpec::fractional_riesz(prm.num("hurst"), prm.num("alpha"));
            spec.validate(d);
            field = sample_homogeneous_noise(grid, spec, rng);
        } else {
            throw InputError("unknown noise kind '" + kind + "'");
        }
    }
    if (format == "csv") {
        write_csv_banner(os, cfg);
        io::write_field_csv(os, *field);
    } else {
        io::write_field_binary(os, *field, envelope(cfg).dump());
    }
}

using Handler = void (*)(const json&, std::ostream&);

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> h = {
        {"simulate", cmd_simulate}, {"chaos", cmd_chaos},   {"check", cmd_check},
        {"certificate", cmd_certificate}, {"fk", cmd_fk}, {"holder", cmd_holder},
        {"noise", cmd_noise}};
    return h;
}

void report(std::ostream& err, const std::string& kind, const std::string& message) {
    err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

// Merges defaults, the config file and explicit flags into one object.
json resolve(const std::string& command, const json& file_cfg,
             const std::map<std::string, std::string>& flags) {
    const auto keys = schemas().at(command);
    json cfg = json::object();
    cfg["command"] = command;
    for (const auto& k : keys) cfg[k.name] = k.fallback;
    if (!file_cfg.is_null()) {
        if (!file_cfg.is_object()) throw InputError("config must be a JSON object");
        for (const auto& [name, value] : file_cfg.items()) {
            if (name == "command") {
                if (value != command) throw InputError("config is for command " + value.dump());
                continue;
            }
            const auto it = std::find_if(keys.begin(), keys.end(),
                                         [&](const Key& k) { return k.name == name; });
            if (it == keys.end()) throw InputError("unknown config key '" + name + "'");
            check_type(*it, value);
            cfg[name] = value;
        }
    }
    for (const auto& [name, text] : flags) {
        const auto it = std::find_if(keys.begin(), keys.end(),
                                     [&](const Key& k) { return k.name == name; });
        cfg[name] = convert(*it, text);
    }
    return cfg;
}

int guarded(std::ostream& err, const std::function<void()>& body) {
    try {
        body();
        return exit_ok;
    } catch (const NumericalError& e) {
        report(err, e.kind(), e.what());
        return exit_numerical;
    } catch (const Error& e) {
        report(err, e.kind(), e.what());
        return exit_validation;
    } catch (const json::exception& e) {
        report(err, "input", e.what());
        return exit_validation;
    } catch (const std::bad_alloc&) {
        report(err, "numerical", "out of memory");
        return exit_numerical;
    } catch (const std::exception& e) {
        report(err, "numerical", e.what());
        return exit_numerical;
    }
}

void execute(const json& cfg, bool strict, const std::string& out_path, std::ostream& out) {
    if (cfg.at("seed").is_null()) {
        if (strict) throw InputError("--strict requires --seed");
    }
    json resolved = cfg;
    if (resolved.at("seed").is_null()) resolved["seed"] = 1;
    const auto threads = resolved.at("threads").get<long long>();
    if (threads < 0) throw InputError("threads must be >= 0");
    parallel::set_threads(static_cast<int>(threads));
    const auto handler = handlers().at(resolved.at("command").get<std::string>());
    if (out_path.empty()) {
        handler(resolved, out);
        return;
    }
    // Write to a buffer first so a failed run leaves no partial artifact.
    std::ostringstream buffer;
    handler(resolved, buffer);
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw InputError("cannot open output file " + out_path);
    file << buffer.str();
}

} // namespace

const char* version() noexcept { return SPDE_LAB_VERSION; }

int run_config(const json& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!config.is_object() || !config.contains("command") || !config["command"].is_string()) {
            throw InputError("config needs a string 'command'");
        }
        const auto command = config["command"].get<std::string>();
        if (!handlers().count(command)) throw InputError("unknown command '" + command + "'");
        execute(resolve(command, config, {}), false, "", out);
    });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"spde_lab: stochastic PDE experiments", "spde_lab"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_path;
    bool strict = false;
    app.add_option("--config", config_path, "JSON config (same schema as the embedded config)");
    app.add_option("--out", out_path, "artifact path (default: stdout)");
    app.add_flag("--strict", strict, "require --seed");

    const auto schema = schemas();
    std::map<std::string, std::map<std::string, std::string>> raw;
    for (const auto& [command, keys] : schema) {
        auto* sub = app.add_subcommand(command);
        sub->fallthrough();
        for (const auto& k : keys) {
            auto& slot = raw[command][k.name];
            std::string flag = "--" + k.name;
            if (k.name.find('_') != std::string::npos) {
                std::string dashed = k.name;
                std::replace(dashed.begin(), dashed.end(), '_', '-');
                flag += ",--" + dashed;
            }
            sub->add_option(flag, slot, k.help);
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << version() << "\n";
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        report(err, "input", e.what());
        return exit_validation;
    }

    return guarded(err, [&] {
        const auto* sub = app.get_subcommands().front();
        const std::string command = sub->get_name();
        json file_cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw InputError("cannot read config " + config_path);
            try {
                file_cfg = json::parse(in);
            } catch (const json::parse_error& e) {
                throw InputError(std::string("config is not valid JSON: ") + e.what());
            }
        }
        std::map<std::string, std::string> flags;
        for (const auto& k : schema.at(command)) {
            if (sub->count("--" + k.name) > 0) flags[k.name] = raw[command][k.name];
        }
        execute(resolve(command, file_cfg, flags), strict, out_path, out);
    });
}

} // namespace spde::cli

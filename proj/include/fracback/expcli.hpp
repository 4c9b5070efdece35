#pragma once

// Config-driven experiment runner behind the command-line tool.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracback/backcast.hpp"
#include "fracback/certify.hpp"
#include "fracback/error.hpp"
#include "fracback/evolve.hpp"
#include "fracback/io.hpp"
#include "fracback/mlf.hpp"
#include "fracback/specop.hpp"

namespace fracback::expcli {

namespace fs = std::filesystem;
using nlohmann::json;
using specop::EigenSystemPtr;
using specop::SpectralField;

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericError = 3, kCertificateFailure = 4 };

// ---------------------------------------------------------------------------
// Logging

enum class LogLevel { error = 0, info = 1, debug = 2 };

inline LogLevel log_level_from_env() {
    const char* v = std::getenv("BACKCAST_LOG");
    if (!v) return LogLevel::info;
    const std::string s(v);
    if (s == "error") return LogLevel::error;
    if (s == "debug") return LogLevel::debug;
    return LogLevel::info;
}

inline void log(LogLevel level, const std::string& msg) {
    static const LogLevel threshold = log_level_from_env();
    if (level > threshold) return;
    static constexpr const char* names[] = {"error", "info", "debug"};
    std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

// ---------------------------------------------------------------------------
// Configuration

struct OperatorConfig {
    std::string type = "dirichlet";
    double l = 1.0;
    double b = 0.0;
    double d = 1.0;
    double s = 1.0;
    int n_modes = 64;
    fs::path path;
    std::shared_ptr<OperatorConfig> inner;
};

struct U0Config {
    std::string type = "random";
    std::vector<double> coefficients;
    fs::path path;
    std::uint64_t seed = 1;
    double decay_exponent = 2.0;
    int count = 1;
    double radius_fraction = 0.9;
};

struct NoiseConfig {
    double delta = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> sweep;
};

struct CertifyConfig {
    std::optional<double> K_override;
    int dissipation_steps = 512;
};

struct ExperimentConfig {
    OperatorConfig op;
    std::vector<double> alphas;
    bool alpha_sweep = false;
    double T = 1.0;
    int time_points = 33;
    U0Config u0;
    double R = 1.0;
    double epsilon = 1.0;
    NoiseConfig noise;
    CertifyConfig certify;
    double amplification_cap = backcast::kDefaultAmplificationCap;
    fs::path outputs = "out";
    fs::path base_dir = ".";
};

namespace detail {

inline void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!ok.count(it.key())) throw ConfigError(where + ": unknown field '" + it.key() + "'");
    }
}

inline const json& require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    return j;
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(where + ": must be finite");
    return v;
}

inline double positive(const json& j, const std::string& where) {
    const double v = number(j, where);
    if (!(v > 0.0)) throw ConfigError(where + ": must be > 0, got " + io::format_double(v));
    return v;
}

inline double non_negative(const json& j, const std::string& where) {
    const double v = number(j, where);
    if (!(v >= 0.0)) throw ConfigError(where + ": must be >= 0, got " + io::format_double(v));
    return v;
}

inline int integer(const json& j, const std::string& where, int min) {
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    const auto v = j.get<long long>();
    if (v < min || v > 1'000'000) throw ConfigError(where + ": out of range, got " + std::to_string(v));
    return static_cast<int>(v);
}

inline std::uint64_t seed(const json& j, const std::string& where) {
    if (!j.is_number_unsigned()) throw ConfigError(where + ": expected a non-negative integer seed");
    return j.get<std::uint64_t>();
}

inline std::string string(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + ": expected a string");
    return j.get<std::string>();
}

inline double order(const json& j, const std::string& where) {
    const double a = number(j, where);
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError(where + ": must lie in (0, 1], got " + io::format_double(a));
    return a;
}

inline OperatorConfig parse_operator(const json& j, const std::string& where) {
    require_object(j, where);
    OperatorConfig op;
    if (!j.contains("type")) throw ConfigError(where + ".type: missing");
    op.type = string(j["type"], where + ".type");
    if (op.type == "dirichlet" || op.type == "neumann") {
        reject_unknown(j, where, {"type", "l", "n_modes"});
    } else if (op.type == "advection") {
        reject_unknown(j, where, {"type", "l", "b", "d", "n_modes"});
        if (j.contains("b")) op.b = number(j["b"], where + ".b");
        if (j.contains("d")) op.d = positive(j["d"], where + ".d");
    } else if (op.type == "fracpower") {
        reject_unknown(j, where, {"type", "inner", "s"});
        if (!j.contains("inner")) throw ConfigError(where + ".inner: missing");
        op.inner = std::make_shared<OperatorConfig>(parse_operator(j["inner"], where + ".inner"));
        if (!j.contains("s")) throw ConfigError(where + ".s: missing");
        op.s = positive(j["s"], where + ".s");
        return op;
    } else if (op.type == "matrix") {
        reject_unknown(j, where, {"type", "path"});
        if (!j.contains("path")) throw ConfigError(where + ".path: missing");
        op.path = string(j["path"], where + ".path");
        return op;
    } else {
        throw ConfigError(where + ".type: unknown operator '" + op.type + "'");
    }
    if (j.contains("l")) op.l = positive(j["l"], where + ".l");
    if (j.contains("n_modes")) op.n_modes = integer(j["n_modes"], where + ".n_modes", 1);
    return op;
}

inline U0Config parse_u0(const json& j) {
    const std::string where = "u0";
    require_object(j, where);
    U0Config u;
    if (!j.contains("type")) throw ConfigError("u0.type: missing");
    u.type = string(j["type"], "u0.type");
    if (u.type == "coefficients") {
        reject_unknown(j, where, {"type", "values"});
        if (!j.contains("values") || !j["values"].is_array() || j["values"].empty()) {
            throw ConfigError("u0.values: expected a non-empty array");
        }
        for (std::size_t i = 0; i < j["values"].size(); ++i) {
            u.coefficients.push_back(number(j["values"][i], "u0.values[" + std::to_string(i) + "]"));
        }
    } else if (u.type == "function-samples") {
        reject_unknown(j, where, {"type", "path"});
        if (!j.contains("path")) throw ConfigError("u0.path: missing");
        u.path = string(j["path"], "u0.path");
    } else if (u.type == "random") {
        reject_unknown(j, where, {"type", "seed", "decay_exponent", "count", "radius_fraction"});
        if (j.contains("seed")) u.seed = seed(j["seed"], "u0.seed");
        if (j.contains("decay_exponent")) u.decay_exponent = non_negative(j["decay_exponent"], "u0.decay_exponent");
        if (j.contains("count")) u.count = integer(j["count"], "u0.count", 1);
        if (j.contains("radius_fraction")) {
            u.radius_fraction = positive(j["radius_fraction"], "u0.radius_fraction");
            if (u.radius_fraction > 1.0) throw ConfigError("u0.radius_fraction: must be <= 1");
        }
    } else {
        throw ConfigError("u0.type: unknown initial-state kind '" + u.type + "'");
    }
    return u;
}

inline json read_json_file(const fs::path& p, const std::string& what) {
    std::ifstream in(p);
    if (!in) throw ConfigError(what + ": cannot open '" + p.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(what + ": '" + p.string() + "' is not valid JSON: " + e.what());
    }
}

inline fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

}  // namespace detail

inline ExperimentConfig parse_config(const json& j, const fs::path& base_dir = ".") {
    using namespace detail;
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown(j, "config", {"operator", "alpha", "T", "time_points", "u0", "R", "epsilon", "noise", "certify",
                                 "amplification_cap", "outputs"});
    ExperimentConfig c;
    c.base_dir = base_dir;
    if (!j.contains("operator")) throw ConfigError("operator: missing");
    c.op = parse_operator(j["operator"], "operator");
    if (!j.contains("alpha")) throw ConfigError("alpha: missing");
    if (j["alpha"].is_array()) {
        if (j["alpha"].empty()) throw ConfigError("alpha: sweep list is empty");
        for (std::size_t i = 0; i < j["alpha"].size(); ++i) {
            c.alphas.push_back(order(j["alpha"][i], "alpha[" + std::to_string(i) + "]"));
        }
        c.alpha_sweep = true;
    } else {
        c.alphas.push_back(order(j["alpha"], "alpha"));
    }
    if (j.contains("T")) c.T = positive(j["T"], "T");
    if (j.contains("time_points")) c.time_points = integer(j["time_points"], "time_points", 3);
    if (j.contains("u0")) c.u0 = parse_u0(j["u0"]);
    if (j.contains("R")) c.R = positive(j["R"], "R");
    if (j.contains("epsilon")) c.epsilon = positive(j["epsilon"], "epsilon");
    if (j.contains("noise")) {
        const json& n = require_object(j["noise"], "noise");
        reject_unknown(n, "noise", {"delta", "seed", "sweep"});
        if (n.contains("delta")) c.noise.delta = non_negative(n["delta"], "noise.delta");
        if (n.contains("seed")) c.noise.seed = seed(n["seed"], "noise.seed");
        if (n.contains("sweep")) {
            if (!n["sweep"].is_array()) throw ConfigError("noise.sweep: expected an array");
            for (std::size_t i = 0; i < n["sweep"].size(); ++i) {
                c.noise.sweep.push_back(non_negative(n["sweep"][i], "noise.sweep[" + std::to_string(i) + "]"));
            }
        }
    }
    if (j.contains("certify")) {
        const json& k = require_object(j["certify"], "certify");
        reject_unknown(k, "certify", {"K_override", "dissipation_steps"});
        if (k.contains("K_override")) c.certify.K_override = positive(k["K_override"], "certify.K_override");
        if (k.contains("dissipation_steps")) {
            c.certify.dissipation_steps = integer(k["dissipation_steps"], "certify.dissipation_steps", 2);
        }
    }
    if (j.contains("amplification_cap")) {
        c.amplification_cap = positive(j["amplification_cap"], "amplification_cap");
        if (c.amplification_cap < 1.0) throw ConfigError("amplification_cap: must be >= 1");
    }
    if (j.contains("outputs")) c.outputs = string(j["outputs"], "outputs");
    return c;
}

inline ExperimentConfig load_config(const fs::path& path) {
    const json j = detail::read_json_file(path, "config");
    return parse_config(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

struct Overrides {
    std::optional<fs::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> modes;
};

inline void apply_overrides(ExperimentConfig& c, const Overrides& o) {
    if (o.out) c.outputs = *o.out;
    if (o.seed) {
        c.u0.seed = *o.seed;
        c.noise.seed = backcast::detail::splitmix64(*o.seed);
    }
    if (o.modes) {
        if (*o.modes < 1) throw ConfigError("--modes: must be >= 1");
        OperatorConfig* op = &c.op;
        while (op->type == "fracpower") op = op->inner.get();
        if (op->type == "matrix") throw ConfigError("--modes: does not apply to matrix operators");
        op->n_modes = *o.modes;
    }
}

// ---------------------------------------------------------------------------
// Assembly

inline specop::Matrix load_matrix(const fs::path& p) {
    const json j = detail::read_json_file(p, "operator.path");
    const json& rows = j.is_object() && j.contains("matrix") ? j["matrix"] : j;
    if (!rows.is_array() || rows.empty()) throw ConfigError("operator.path: expected a square array of rows");
    std::vector<std::vector<double>> r;
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() != rows.size()) throw ConfigError("operator.path: matrix is not square");
        std::vector<double> v;
        for (const auto& x : row) {
            if (!x.is_number()) throw ConfigError("operator.path: non-numeric matrix entry");
            v.push_back(x.get<double>());
        }
        r.push_back(std::move(v));
    }
    return specop::Matrix::from_rows(r);
}

inline EigenSystemPtr build_operator(const OperatorConfig& op, const fs::path& base_dir) {
    if (op.type == "dirichlet") return specop::dirichlet_laplacian_1d(op.l, op.n_modes);
    if (op.type == "neumann") return specop::neumann_laplacian_1d(op.l, op.n_modes);
    if (op.type == "advection") return specop::advection_diffusion_reduce(op.l, op.b, op.d, op.n_modes);
    if (op.type == "fracpower") return specop::fractional_power(*build_operator(*op.inner, base_dir), op.s);
    if (op.type == "matrix") return specop::matrix_operator(load_matrix(detail::resolve(base_dir, op.path)));
    throw ConfigError("operator.type: unknown operator '" + op.type + "'");
}

/// Initial states named by the config. Random draws have coefficients
/// N(0,1) n^(-p) and are scaled so the largest of ||u0||, ||A u0|| and the
/// fractional-power norm equals radius_fraction * R.
inline std::vector<SpectralField> build_initial_states(const ExperimentConfig& c, const EigenSystemPtr& es) {
    std::vector<SpectralField> out;
    const std::size_t n = es->size();
    if (c.u0.type == "coefficients") {
        if (c.u0.coefficients.size() != n) {
            throw ConfigError("u0.values: " + std::to_string(c.u0.coefficients.size()) +
                              " coefficients for an operator with " + std::to_string(n) + " modes");
        }
        out.emplace_back(es, c.u0.coefficients);
    } else if (c.u0.type == "function-samples") {
        const json j = detail::read_json_file(detail::resolve(c.base_dir, c.u0.path), "u0.path");
        if (!j.is_array()) throw ConfigError("u0.path: expected a JSON array of samples");
        std::vector<double> v;
        for (const auto& x : j) {
            if (!x.is_number()) throw ConfigError("u0.path: non-numeric sample");
            v.push_back(x.get<double>());
        }
        out.push_back(specop::project(v, es));
    } else {
        for (int k = 0; k < c.u0.count; ++k) {
            std::vector<double> coef(n);
            for (std::size_t i = 0; i < n; ++i) {
                coef[i] = backcast::detail::counter_normal(c.u0.seed, static_cast<std::uint64_t>(k) * n + i) *
                          std::pow(static_cast<double>(i + 1), -c.u0.decay_exponent);
            }
            SpectralField f(es, std::move(coef));
            const double size = std::max({f.norm(), f.operator_norm(),
                                          certify::admissible_norms(f, c.epsilon).strict()});
            if (!(size > 0.0)) throw DomainError("random initial state vanished");
            out.push_back(f.scaled(c.u0.radius_fraction * c.R / size));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Commands

enum class Command { evolve, backcast, certify, amplification };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::evolve: return "evolve";
        case Command::backcast: return "backcast";
        case Command::certify: return "certify";
        case Command::amplification: return "amplification";
    }
    return "unknown";
}

namespace detail {

inline void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out << content;
}

inline void write_json(const fs::path& p, const json& j) { write_file(p, j.dump(2) + "\n"); }

inline std::vector<double> time_grid(const ExperimentConfig& c) {
    return evolve::UniformGrid::over(0.0, c.T, static_cast<std::size_t>(c.time_points)).points();
}

inline double rel_error_kept(const SpectralField& truth, const backcast::BackcastResult& r) {
    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < truth.size(); ++n) {
        if (r.u0_hat[n] == 0.0 && truth[n] != 0.0 && r.dropped_modes > 0) continue;
        const double d = r.u0_hat[n] - truth[n];
        num += d * d;
        den += truth[n] * truth[n];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace detail

inline int cmd_evolve(const ExperimentConfig& c, double alpha, const fs::path& dir) {
    const auto es = build_operator(c.op, c.base_dir);
    const auto u0 = build_initial_states(c, es).front();
    const FractionalOrder a(alpha);
    const auto tr = evolve::evolve_trajectory(u0, a, detail::time_grid(c));
    detail::write_file(dir / "trajectory.csv", io::trajectory_csv(tr));
    bool nonincreasing = true;
    for (std::size_t j = 1; j < tr.norms.size(); ++j) nonincreasing = nonincreasing && tr.norms[j] <= tr.norms[j - 1];
    detail::write_json(dir / "summary.json", {{"command", "evolve"},
                                              {"alpha", alpha},
                                              {"T", c.T},
                                              {"times", tr.times},
                                              {"norms", tr.norms},
                                              {"norms_nonincreasing", nonincreasing},
                                              {"initial_field", io::to_json(u0)},
                                              {"final_field", io::to_json(tr.fields.back())}});
    log(LogLevel::info, "evolve alpha=" + io::format_double(alpha) + ": ||u(T)|| = " + io::format_double(tr.norms.back()));
    return kOk;
}

inline int cmd_backcast(const ExperimentConfig& c, double alpha, const fs::path& dir) {
    const auto es = build_operator(c.op, c.base_dir);
    const auto u0 = build_initial_states(c, es).front();
    const FractionalOrder a(alpha);
    const double T = c.T;
    const auto uT = evolve::forward_evolve(u0, a, T);
    const auto [K, K1] = certify::log_convexity_constant(*es, a, T);
    const double beta = certify::holder_exponent(c.epsilon);
    std::vector<double> deltas = c.noise.sweep.empty() ? std::vector<double>{c.noise.delta} : c.noise.sweep;
    const auto u_mid = evolve::forward_evolve(u0, a, T / 2.0);

    std::vector<io::ExperimentRow> rows;
    json runs = json::array();
    std::vector<double> fit_d, fit_e;
    for (double delta : deltas) {
        const auto data = backcast::noisy_observation(uT, {delta, c.noise.seed});
        backcast::BackcastResult r =
            delta == 0.0 ? backcast::exact_backcast(data, a, T, c.amplification_cap)
                         : backcast::tikhonov_backcast(data, a, T, backcast::choose_gamma(delta, c.R, beta));
        const auto mid = backcast::backcast_interior(r.u0_hat, a, T / 2.0);
        io::ExperimentRow row{delta,
                              r.regularizer == backcast::Regularizer::tikhonov ? r.parameter : 0.0,
                              r.u0_hat.minus(u0).norm(),
                              mid.minus(u_mid).norm(),
                              2.0 * K * c.R,
                              2.0 * K * std::sqrt(c.R * delta)};
        rows.push_back(row);
        json run = {{"delta", delta}, {"result", io::to_json(r)}, {"err_t0", row.err_t0}, {"err_tmid", row.err_tmid}};
        if (delta == 0.0) run["rel_error_kept_modes"] = detail::rel_error_kept(u0, r);
        runs.push_back(std::move(run));
        if (delta > 0.0 && row.err_tmid > 0.0) {
            fit_d.push_back(delta);
            fit_e.push_back(row.err_tmid);
        }
        log(LogLevel::debug, "backcast delta=" + io::format_double(delta) + " err_tmid=" + io::format_double(row.err_tmid));
    }
    json summary = {{"command", "backcast"}, {"alpha", alpha}, {"T", c.T}, {"R", c.R}, {"K", K}, {"runs", runs}};
    if (fit_d.size() >= 2) {
        const auto fit = backcast::fit_power_law(fit_d, fit_e);
        summary["rate_fit"] = {{"exponent", fit.exponent}, {"log_prefactor", fit.log_prefactor}};
    } else {
        summary["rate_fit"] = nullptr;
    }
    detail::write_json(dir / "reconstruction.json", summary);
    detail::write_file(dir / "errors.csv", io::experiment_csv(rows));
    return kOk;
}

/// Certificate suite for one initial state.
struct SuiteTables {
    std::optional<evolve::DecayTable> dissipation;
    evolve::DecayTable mean_value;
};

inline certify::StabilityCertificate certify_instance(const ExperimentConfig& c, FractionalOrder a,
                                                      const SpectralField& u0, const SuiteTables& tables,
                                                      const std::optional<certify::InterpolationConstants>& ic,
                                                      std::uint64_t noise_seed) {
    const auto es = u0.eigsys();
    const double T = c.T;
    certify::StabilityCertificate cert;
    const auto kk = certify::log_convexity_constant(*es, a, T);
    cert.K = c.certify.K_override.value_or(kk.K);
    cert.K1 = kk.K1;
    cert.R = c.R;
    cert.epsilon = c.epsilon;
    auto add = [&](const std::vector<certify::Check>& v) { cert.checks.insert(cert.checks.end(), v.begin(), v.end()); };

    const auto times = detail::time_grid(c);
    const auto tr = evolve::evolve_trajectory(u0, a, times);
    add(certify::verify_log_convexity(tr, cert.K));

    if (!a.classical()) {
        const auto grid = evolve::UniformGrid::over(0.0, T, static_cast<std::size_t>(c.certify.dissipation_steps) + 1);
        const auto diss = certify::verify_dissipation_lemma(u0, a, grid, &*tables.dissipation);
        add({certify::worst(diss)});
    }

    const auto h = certify::holder_certificate(u0, a, T, c.R, &tables.mean_value);
    cert.xi = h.xi;
    cert.theta = h.theta;
    cert.checks.push_back(h.check);

    if (ic) {
        cert.C1 = ic->C1;
        cert.C2 = ic->C2;
        cert.beta_holder = ic->beta;
        add({certify::worst(ic->checks)});
        const auto th = certify::verify_explicit_holder(u0, a, T, c.epsilon, c.R);
        cert.rescale = th.rescale;
        cert.checks.push_back(th.check);
    }

    if (c.noise.delta > 0.0) {
        const auto w0 = backcast::matched_perturbation(es, a, T, c.noise.delta, noise_seed);
        const auto tr_noisy = evolve::evolve_trajectory(u0.plus(w0), a, times);
        add(certify::verify_noisy_holder(tr, tr_noisy, cert.K, c.R, c.noise.delta));
    }
    return cert;
}

inline int cmd_certify(const ExperimentConfig& c, double alpha, const fs::path& dir) {
    const auto es = build_operator(c.op, c.base_dir);
    const auto states = build_initial_states(c, es);
    const FractionalOrder a(alpha);
    SuiteTables tables{std::nullopt, certify::mean_value_table(*es, a, c.T)};
    if (!a.classical()) {
        const auto grid = evolve::UniformGrid::over(0.0, c.T, static_cast<std::size_t>(c.certify.dissipation_steps) + 1);
        tables.dissipation.emplace(certify::dissipation_table(*es, a, grid));
    }
    std::optional<certify::InterpolationConstants> ic;
    if (!a.classical() && es->m() < es->size()) ic = certify::interpolation_constants(*es, a, c.T, c.epsilon);

    json instances = json::array();
    std::ostringstream text;
    bool pass = true;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto cert = certify_instance(c, a, states[i], tables, ic, c.noise.seed + i);
        pass = pass && cert.pass();
        instances.push_back(io::to_json(cert));
        text << "# instance " << i << " alpha=" << io::format_double(alpha) << " K=" << io::format_double(cert.K)
             << " theta=" << io::format_double(cert.theta) << '\n'
             << io::render_text(cert.checks);
    }
    detail::write_json(dir / "certificate.json", {{"command", "certify"},
                                                  {"alpha", alpha},
                                                  {"T", c.T},
                                                  {"operator", io::to_json(*es)},
                                                  {"instances", instances},
                                                  {"pass", pass}});
    detail::write_file(dir / "certificate.txt", text.str());
    log(pass ? LogLevel::info : LogLevel::error,
        "certify alpha=" + io::format_double(alpha) + ": " + (pass ? "all checks pass" : "certificate FAILED"));
    return pass ? kOk : kCertificateFailure;
}

inline int cmd_amplification(const ExperimentConfig& c, double alpha, const fs::path& dir) {
    const auto es = build_operator(c.op, c.base_dir);
    const auto frac = backcast::amplification_profile(*es, FractionalOrder(alpha), c.T);
    const auto cls = backcast::amplification_profile(*es, FractionalOrder(1.0), c.T);
    std::ostringstream os;
    os << "n,lambda,factor_alpha,factor_1\n";
    for (std::size_t n = 0; n < frac.size(); ++n) {
        os << n + 1 << ',' << io::format_double(frac[n].lambda) << ',' << io::format_double(frac[n].factor) << ','
           << io::format_double(cls[n].factor) << '\n';
    }
    detail::write_file(dir / "amplification.csv", os.str());
    return kOk;
}

inline int run_one(Command cmd, const ExperimentConfig& c, double alpha, const fs::path& dir) {
    fs::create_directories(dir);
    switch (cmd) {
        case Command::evolve: return cmd_evolve(c, alpha, dir);
        case Command::backcast: return cmd_backcast(c, alpha, dir);
        case Command::certify: return cmd_certify(c, alpha, dir);
        case Command::amplification: return cmd_amplification(c, alpha, dir);
    }
    return kConfigError;
}

inline int classify(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kConfigError;
    return kNumericError;
}

/// Runs the command for every alpha. A sweep writes alpha_<k>/ subdirectories
/// and an index.json; the exit code is 3 if any run hit a numeric error,
/// else 4 if any certificate failed.
inline int run(Command cmd, const ExperimentConfig& c) {
    const fs::path out = c.outputs;
    if (!c.alpha_sweep) return run_one(cmd, c, c.alphas.front(), out);
    fs::create_directories(out);
    json runs = json::array();
    bool numeric = false, failed = false;
    for (std::size_t k = 0; k < c.alphas.size(); ++k) {
        const std::string name = "alpha_" + std::to_string(k);
        int code = kOk;
        json entry = {{"alpha", c.alphas[k]}, {"dir", name}};
        try {
            code = run_one(cmd, c, c.alphas[k], out / name);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            code = kNumericError;
            entry["error"] = e.what();
            log(LogLevel::error, name + ": " + e.what());
        }
        numeric = numeric || code == kNumericError;
        failed = failed || code == kCertificateFailure;
        entry["exit_code"] = code;
        runs.push_back(std::move(entry));
    }
    const int code = numeric ? kNumericError : failed ? kCertificateFailure : kOk;
    detail::write_json(out / "index.json", {{"command", to_string(cmd)}, {"runs", runs}, {"exit_code", code}});
    return code;
}

}  // namespace fracback::expcli

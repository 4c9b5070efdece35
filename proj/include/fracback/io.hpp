#pragma once

// JSON and CSV renderings of the library types.

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "fracback/backcast.hpp"
#include "fracback/certify.hpp"
#include "fracback/error.hpp"
#include "fracback/evolve.hpp"
#include "fracback/specop.hpp"

namespace fracback::io {

using nlohmann::json;

/// Shortest decimal that round-trips to the same double, at most 17 significant digits.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[400];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    // the positional form spells out large integers digit by digit
    if (std::abs(v) >= 1e17) res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
    return std::string(buf, res.ptr);
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------
// Spectral data

inline specop::BasisKind parse_basis(std::string_view s) {
    using specop::BasisKind;
    for (BasisKind b : {BasisKind::analytic_sine, BasisKind::analytic_cosine, BasisKind::matrix_columns,
                        BasisKind::abstract}) {
        if (s == specop::to_string(b)) return b;
    }
    throw ConfigError("unknown basis kind '" + std::string(s) + "'");
}

inline json to_json(const specop::EigenSystem& es) {
    return {{"eigenvalues", es.eigenvalues()},
            {"m", es.m()},
            {"kappa", es.kappa()},
            {"basis", specop::to_string(es.basis())}};
}

inline json to_json(const specop::SpectralField& f) {
    json j = to_json(*f.eigsys());
    j["coefficients"] = f.coefficients();
    return j;
}

/// Rebuilds a field on an abstract eigensystem; m is recomputed and checked.
inline specop::SpectralField field_from_json(const json& j) {
    try {
        specop::EigenSystem::Parts parts;
        parts.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
        parts.basis = specop::BasisKind::abstract;
        parts.kappa = j.at("kappa").get<double>();
        auto es = std::make_shared<const specop::EigenSystem>(std::move(parts));
        if (j.at("m").get<std::size_t>() != es->m()) throw ConfigError("field JSON: m disagrees with eigenvalues");
        parse_basis(j.at("basis").get<std::string>());
        return specop::SpectralField(es, j.at("coefficients").get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Backcast and certificates

inline json to_json(const backcast::BackcastResult& r) {
    return {{"u0_hat", to_json(r.u0_hat)},
            {"amplification_max", finite_or_null(r.amplification_max)},
            {"regularizer", backcast::to_string(r.regularizer)},
            {"parameter", finite_or_null(r.parameter)},
            {"dropped_modes", r.dropped_modes}};
}

inline json to_json(const certify::Check& c) {
    return {{"name", c.name},
            {"lhs", finite_or_null(c.lhs)},
            {"rhs", finite_or_null(c.rhs)},
            {"margin", finite_or_null(c.margin)},
            {"pass", c.pass}};
}

inline json optional_json(const std::optional<double>& v) { return v ? finite_or_null(*v) : json(nullptr); }

inline json to_json(const certify::StabilityCertificate& c) {
    json checks = json::array();
    for (const auto& ch : c.checks) checks.push_back(to_json(ch));
    return {{"constants",
             {{"K", c.K},
              {"K1", c.K1},
              {"xi", c.xi},
              {"theta", c.theta},
              {"C1", optional_json(c.C1)},
              {"C2", optional_json(c.C2)},
              {"beta_holder", optional_json(c.beta_holder)},
              {"epsilon", c.epsilon},
              {"R", c.R},
              {"rescale", c.rescale}}},
            {"checks", std::move(checks)},
            {"pass", c.pass()}};
}

/// One line per check: "name: lhs ≤ rhs (margin)", failures flagged.
inline std::string render_text(std::span<const certify::Check> checks) {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << c.name << ": " << format_double(c.lhs) << " ≤ " << format_double(c.rhs) << " ("
           << format_double(c.margin) << ")";
        if (!c.pass) os << " FAIL";
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// CSV

inline std::string trajectory_csv(const evolve::Trajectory& tr) {
    std::ostringstream os;
    os << "t,norm";
    const std::size_t n = tr.fields.empty() ? 0 : tr.fields.front().size();
    for (std::size_t k = 1; k <= n; ++k) os << ",c_" << k;
    os << '\n';
    for (std::size_t j = 0; j < tr.times.size(); ++j) {
        os << format_double(tr.times[j]) << ',' << format_double(tr.norms[j]);
        for (double c : tr.fields[j].coefficients()) os << ',' << format_double(c);
        os << '\n';
    }
    return os.str();
}

struct ExperimentRow {
    double delta = 0.0;
    double gamma = 0.0;
    double err_t0 = 0.0;
    double err_tmid = 0.0;
    double bound_t0 = 0.0;
    double bound_tmid = 0.0;
};

inline std::string experiment_csv(std::span<const ExperimentRow> rows) {
    std::ostringstream os;
    os << "delta,gamma,err_t0,err_tmid,bound_t0,bound_tmid\n";
    for (const auto& r : rows) {
        os << format_double(r.delta) << ',' << format_double(r.gamma) << ',' << format_double(r.err_t0) << ','
           << format_double(r.err_tmid) << ',' << format_double(r.bound_t0) << ',' << format_double(r.bound_tmid)
           << '\n';
    }
    return os.str();
}

}  // namespace fracback::io

#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "grushin/aggregate.hpp"
#include "grushin/common.hpp"
#include "grushin/fiber.hpp"
#include "grushin/grid_io.hpp"
#include "grushin/weyl.hpp"

namespace grushin::report {

using nlohmann::json;

/// Non-finite values have no JSON spelling: an overflowed fit reports a
/// null exponent and only the partial sums computed before the overflow.
inline json to_json(const numerics::TailFit& fit) {
    json sums = json::array();
    for (const auto& [cutoff, value] : fit.partial_sums) {
        if (!std::isfinite(value)) break;
        sums.push_back(json::array({cutoff, value}));
    }
    return {
        {"estimated_exponent", std::isfinite(fit.estimated_exponent) ? json(fit.estimated_exponent) : json(nullptr)},
        {"confidence", fit.confidence},
        {"converged", fit.converged},
        {"overflow", fit.overflow},
        {"partial_sums", std::move(sums)},
    };
}

inline json to_json(const weyl::EndpointReport& r) {
    json evidence = json::array();
    for (const auto& e : r.evidence) {
        json item = {
            {"solution", e.solution},
            {"square_integrable", e.square_integrable},
            {"inconclusive", e.inconclusive},
        };
        item["fit"] = e.fit ? to_json(*e.fit) : json(nullptr);
        evidence.push_back(std::move(item));
    }
    return {
        {"endpoint", std::string(to_string(r.endpoint))},
        {"class", std::string(weyl::to_string(r.endpoint_class))},
        {"method", std::string(weyl::to_string(r.method))},
        {"evidence", std::move(evidence)},
    };
}

/// Outcome of the optional numerical cross-check at one endpoint.
struct NumericCheck {
    Endpoint endpoint;
    std::optional<weyl::EndpointReport> report;
    /// Set when the oracle could not decide; the symbolic verdict stands.
    std::string inconclusive;
    /// Set when the point lies within δ of a regime boundary.
    bool skipped_near_boundary = false;
};

inline std::vector<NumericCheck> numeric_checks(const fiber::FiberProblem& p) {
    std::vector<NumericCheck> out;
    for (Endpoint e : {Endpoint::Zero, Endpoint::Infinity}) {
        NumericCheck c{e, std::nullopt, {}, false};
        if (weyl::near_regime_boundary(p)) {
            c.skipped_near_boundary = true;
        } else {
            try {
                c.report = weyl::classify_endpoint_numeric(p, e);
            } catch (const numerics::InconclusiveError& err) {
                c.inconclusive = err.what();
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

struct FiberRecord {
    fiber::FiberProblem problem;
    fiber::SolutionPair solutions;
    weyl::EndpointReport zero;
    weyl::EndpointReport infinity;
    weyl::DeficiencyIndices indices;
    bool essentially_self_adjoint;
    std::optional<std::vector<NumericCheck>> numeric;
};

inline FiberRecord classify_fiber(const fiber::FiberProblem& p, bool with_numeric) {
    FiberRecord r{p,
                  fiber::closed_form_solutions(p),
                  weyl::classify_endpoint_symbolic(p, Endpoint::Zero),
                  weyl::classify_endpoint_symbolic(p, Endpoint::Infinity),
                  weyl::deficiency_indices(p),
                  weyl::fiber_esa(p),
                  std::nullopt};
    if (with_numeric) {
        r.numeric = numeric_checks(p);
    }
    return r;
}

inline json to_json(const FiberRecord& r) {
    json j = {
        {"record", "fiber"},
        {"alpha", r.problem.alpha()},
        {"topology", std::string(to_string(r.problem.topology()))},
        {"mode", r.problem.mode()},
        {"branch", std::string(fiber::to_string(r.solutions.branch))},
        {"solutions", json::array({r.solutions.first.describe(), r.solutions.second.describe()})},
        {"endpoints", json::array({to_json(r.zero), to_json(r.infinity)})},
        {"deficiency_indices", {{"n_plus", r.indices.n_plus}, {"n_minus", r.indices.n_minus}}},
        {"essentially_self_adjoint", r.essentially_self_adjoint},
    };
    if (r.numeric) {
        json checks = json::array();
        for (const auto& c : *r.numeric) {
            json item = {{"endpoint", std::string(to_string(c.endpoint))}};
            if (c.skipped_near_boundary) {
                item["status"] = "skipped-near-boundary";
            } else if (c.report) {
                const auto& symbolic = c.endpoint == Endpoint::Zero ? r.zero : r.infinity;
                item["status"] = c.report->endpoint_class == symbolic.endpoint_class ? "agrees" : "disagrees";
                item["report"] = to_json(*c.report);
            } else {
                item["status"] = "inconclusive";
                item["message"] = c.inconclusive;
            }
            checks.push_back(std::move(item));
        }
        j["numeric_checks"] = std::move(checks);
    }
    return j;
}

inline json to_json(const aggregate::ModeSet& m) {
    json j = {{"kind", m.label()}, {"measure_zero", m.measure_is_zero()}};
    if (m.kind == aggregate::ModeSetKind::OpenInterval) {
        j["lo"] = m.lo;
        j["hi"] = m.hi;
    }
    return j;
}

inline json to_json(const aggregate::Verdict& v) {
    json j = {
        {"record", "manifold"},
        {"alpha", v.alpha},
        {"topology", std::string(to_string(v.topology))},
        {"essentially_self_adjoint", v.essentially_self_adjoint},
        {"failing_modes", to_json(v.failing_modes)},
        {"regime", v.regime_label},
    };
    if (v.total_deficiency) {
        j["total_deficiency"] = v.total_deficiency->infinite ? json("infinite") : json(v.total_deficiency->count);
    }
    return j;
}

// ---------------------------------------------------------------------------
// Atlas
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& atlas_columns() {
    static const std::vector<std::string> cols{"alpha",  "plane_esa",           "plane_failing", "plane_regime",
                                               "cyl_esa", "cyl_failing", "cyl_total_deficiency", "cyl_regime"};
    return cols;
}

namespace detail {

/// Quotes a CSV field only when it needs it.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

inline const char* boolean(bool b) { return b ? "true" : "false"; }

}  // namespace detail

inline void write_atlas_csv(std::ostream& os, const std::vector<aggregate::AtlasRow>& rows) {
    const auto& cols = atlas_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        os << (i ? "," : "") << cols[i];
    }
    os << '\n';
    for (const auto& r : rows) {
        const std::string deficiency = r.cylinder.total_deficiency ? r.cylinder.total_deficiency->label() : "";
        os << io::format_real(r.alpha) << ',' << detail::boolean(r.plane.essentially_self_adjoint) << ','
           << detail::csv_field(r.plane.failing_modes.label()) << ',' << detail::csv_field(r.plane.regime_label)
           << ',' << detail::boolean(r.cylinder.essentially_self_adjoint) << ','
           << detail::csv_field(r.cylinder.failing_modes.label()) << ',' << deficiency << ','
           << detail::csv_field(r.cylinder.regime_label) << '\n';
    }
}

inline json atlas_json(const std::vector<aggregate::AtlasRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        out.push_back({
            {"alpha", r.alpha},
            {"plane_esa", r.plane.essentially_self_adjoint},
            {"plane_failing", r.plane.failing_modes.label()},
            {"plane_regime", r.plane.regime_label},
            {"cyl_esa", r.cylinder.essentially_self_adjoint},
            {"cyl_failing", r.cylinder.failing_modes.label()},
            {"cyl_total_deficiency", r.cylinder.total_deficiency->infinite
                                         ? json("infinite")
                                         : json(r.cylinder.total_deficiency->count)},
            {"cyl_regime", r.cylinder.regime_label},
        });
    }
    return out;
}

inline void write_atlas_json(std::ostream& os, const std::vector<aggregate::AtlasRow>& rows) {
    os << atlas_json(rows).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Solution samples
// ---------------------------------------------------------------------------

inline std::string describe(const fiber::Asymptotics& a) {
    std::string s = "x^" + io::format_real(a.power);
    if (a.logarithmic) s += "*log(x)";
    if (a.exp_coefficient != 0.0) {
        s += "*exp(" + io::format_real(a.exp_coefficient) + "*x^" + io::format_real(a.exp_power) + ")";
    }
    return s;
}

/// Columnar text: x psi1 psi2, with the branch and the leading behaviour of
/// each solution at both endpoints in the header.
inline void write_solutions(std::ostream& os, const fiber::FiberProblem& p, const std::vector<double>& xs) {
    const fiber::SolutionPair pair = fiber::closed_form_solutions(p);
    io::ColumnarWriter w(os);
    w.header("format", "grushin-solutions v1")
        .header("alpha", io::format_real(p.alpha()))
        .header("topology", std::string(to_string(p.topology())))
        .header("mode", io::format_real(p.mode()))
        .header("branch", std::string(fiber::to_string(pair.branch)))
        .header("psi1", pair.first.describe())
        .header("psi2", pair.second.describe())
        .header("psi1_at_zero", describe(pair.asymptotic_exponents[0][0]))
        .header("psi1_at_infinity", describe(pair.asymptotic_exponents[0][1]))
        .header("psi2_at_zero", describe(pair.asymptotic_exponents[1][0]))
        .header("psi2_at_infinity", describe(pair.asymptotic_exponents[1][1]))
        .columns({"x", "psi1", "psi2"});
    for (double x : xs) {
        w.row({io::format_real(x), io::format_real(pair.first.value(x)), io::format_real(pair.second.value(x))});
    }
}

}  // namespace grushin::report

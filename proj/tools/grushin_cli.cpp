// grushin: command-line front end.
//
//   grushin classify  --alpha A [--xi X | --k K] [--topology plane|cylinder]
//   grushin atlas     --alpha-min A --alpha-max B --step S [--jobs N]
//   grushin solutions --alpha A [--xi X | --k K] [--x-min --x-max --points]
//   grushin verify    [--suite NAME]...
//
// Exit codes: 0 ok, 1 verification failure, 2 usage or I/O error,
// 3 internal assumption violation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grushin/aggregate.hpp"
#include "grushin/common.hpp"
#include "grushin/geometry.hpp"
#include "grushin/grid_io.hpp"
#include "grushin/report.hpp"
#include "grushin/verify.hpp"
#include "grushin/weyl.hpp"

namespace {

using namespace grushin;

enum Exit { kOk = 0, kVerificationFailed = 1, kUsage = 2, kInternal = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ClassifyArgs {
    double alpha = 0.0;
    std::optional<double> xi;
    std::optional<long> k;
    std::string topology = "plane";
    std::string format = "plain";
    std::string output;
    bool numeric = false;
    long k_max = 64;
};

struct AtlasArgs {
    double alpha_min = -4.0;
    double alpha_max = 2.0;
    double step = 0.25;
    std::string format = "csv";
    std::string output;
    unsigned jobs = 1;
    long k_max = 64;
};

struct SolutionsArgs {
    double alpha = 0.0;
    std::optional<double> xi;
    std::optional<long> k;
    double x_min = 0.05;
    double x_max = 20.0;
    std::size_t points = 200;
    std::string spacing = "log";
    std::string output;
};

struct VerifyArgs {
    std::vector<std::string> suites;
};

Topology parse_topology(const std::string& s) { return s == "cylinder" ? Topology::Cylinder : Topology::Plane; }

/// Runs `body` against stdout or the requested file.
template <class Body>
void with_output(const std::string& path, Body&& body) {
    if (path.empty() || path == "-") {
        body(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw UsageError("cannot open output file '" + path + "'");
    }
    body(out);
    out.close();
    if (!out) {
        throw UsageError("failed writing output file '" + path + "'");
    }
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

void print_fiber_plain(std::ostream& os, const report::FiberRecord& r) {
    const char* mode_name = r.problem.topology() == Topology::Plane ? "xi" : "k";
    os << "fiber alpha=" << io::format_real(r.problem.alpha()) << ' ' << mode_name << '='
       << io::format_real(r.problem.mode()) << " topology=" << to_string(r.problem.topology()) << '\n'
       << "  branch: " << fiber::to_string(r.solutions.branch) << '\n'
       << "  solutions: " << r.solutions.first.describe() << ", " << r.solutions.second.describe() << '\n'
       << "  endpoint 0: " << weyl::to_string(r.zero.endpoint_class) << '\n'
       << "  endpoint infinity: " << weyl::to_string(r.infinity.endpoint_class) << '\n'
       << "  deficiency indices: (" << r.indices.n_plus << ", " << r.indices.n_minus << ")\n"
       << "  ESA=" << yes_no(r.essentially_self_adjoint) << '\n';
    if (r.numeric) {
        for (const auto& c : *r.numeric) {
            os << "  numeric check at " << to_string(c.endpoint) << ": ";
            if (c.skipped_near_boundary) {
                os << "skipped (near a regime boundary)\n";
            } else if (c.report) {
                os << weyl::to_string(c.report->endpoint_class) << '\n';
            } else {
                os << "inconclusive (" << c.inconclusive << ")\n";
            }
        }
    }
}

void print_verdict_plain(std::ostream& os, const aggregate::Verdict& v) {
    os << to_string(v.topology) << " alpha=" << io::format_real(v.alpha) << '\n'
       << "  ESA=" << yes_no(v.essentially_self_adjoint) << '\n'
       << "  failing modes: " << v.failing_modes.label();
    if (v.topology == Topology::Plane) {
        os << (v.failing_modes.measure_is_zero() ? " (measure zero)" : " (positive measure)");
    }
    os << '\n';
    if (v.total_deficiency) {
        os << "  total deficiency: " << v.total_deficiency->label() << '\n';
    }
    os << "  regime: " << v.regime_label << '\n';
}

void write_fiber_csv(std::ostream& os, const report::FiberRecord& r) {
    os << "alpha,topology,mode,branch,zero_class,infinity_class,n_plus,n_minus,esa\n"
       << io::format_real(r.problem.alpha()) << ',' << to_string(r.problem.topology()) << ','
       << io::format_real(r.problem.mode()) << ',' << fiber::to_string(r.solutions.branch) << ','
       << weyl::to_string(r.zero.endpoint_class) << ',' << weyl::to_string(r.infinity.endpoint_class) << ','
       << r.indices.n_plus << ',' << r.indices.n_minus << ',' << yes_no(r.essentially_self_adjoint) << '\n';
}

void write_verdict_csv(std::ostream& os, const aggregate::Verdict& v) {
    os << "alpha,topology,esa,failing,total_deficiency,regime\n"
       << io::format_real(v.alpha) << ',' << to_string(v.topology) << ',' << yes_no(v.essentially_self_adjoint)
       << ',' << v.failing_modes.label() << ',' << (v.total_deficiency ? v.total_deficiency->label() : "") << ','
       << v.regime_label << '\n';
}

int cmd_classify(const ClassifyArgs& a) {
    const Topology topo = parse_topology(a.topology);
    if (a.xi && topo == Topology::Cylinder) {
        throw UsageError("--xi selects a plane fiber; use --k on the cylinder");
    }
    if (a.k && topo == Topology::Plane) {
        throw UsageError("--k selects a cylinder fiber; use --xi on the plane");
    }

    std::ostringstream human;
    std::function<void(std::ostream&)> machine;
    if (a.xi || a.k) {
        const auto p = a.xi ? fiber::FiberProblem::plane(a.alpha, *a.xi) : fiber::FiberProblem::cylinder(a.alpha, *a.k);
        const report::FiberRecord r = report::classify_fiber(p, a.numeric);
        print_fiber_plain(human, r);
        if (a.format == "json") {
            machine = [r](std::ostream& os) { os << report::to_json(r).dump(2) << '\n'; };
        } else if (a.format == "csv") {
            machine = [r](std::ostream& os) { write_fiber_csv(os, r); };
        }
    } else {
        const aggregate::Verdict v = topo == Topology::Plane
                                         ? aggregate::plane_verdict(a.alpha)
                                         : aggregate::cylinder_verdict(a.alpha, {a.k_max});
        print_verdict_plain(human, v);
        if (a.format == "json") {
            machine = [v](std::ostream& os) { os << report::to_json(v).dump(2) << '\n'; };
        } else if (a.format == "csv") {
            machine = [v](std::ostream& os) { write_verdict_csv(os, v); };
        }
    }

    if (!machine) {
        with_output(a.output, [&](std::ostream& os) { os << human.str(); });
    } else if (a.output.empty() || a.output == "-") {
        // Keep stdout machine-readable.
        std::cerr << human.str();
        with_output(a.output, machine);
    } else {
        std::cout << human.str();
        with_output(a.output, machine);
    }
    return kOk;
}

int cmd_atlas(const AtlasArgs& a) {
    const auto alphas = aggregate::alpha_range(a.alpha_min, a.alpha_max, a.step);
    const auto rows = aggregate::regime_atlas(alphas, a.jobs, {a.k_max});
    with_output(a.output, [&](std::ostream& os) {
        if (a.format == "json") {
            report::write_atlas_json(os, rows);
        } else {
            report::write_atlas_csv(os, rows);
        }
    });
    return kOk;
}

int cmd_solutions(const SolutionsArgs& a) {
    if (a.xi && a.k) {
        throw UsageError("give at most one of --xi and --k");
    }
    if (!(a.x_min > 0.0)) {
        throw UsageError("--x-min must be positive: solutions live on x > 0");
    }
    if (!(a.x_max > a.x_min)) {
        throw UsageError("--x-max must exceed --x-min");
    }
    if (a.points < 2) {
        throw UsageError("--points must be at least 2");
    }
    std::vector<double> xs;
    if (a.spacing == "log") {
        xs = geometry::log_spaced(a.x_min, a.x_max, a.points);
    } else {
        xs.resize(a.points);
        for (std::size_t i = 0; i < a.points; ++i) {
            xs[i] = a.x_min + (a.x_max - a.x_min) * static_cast<double>(i) / static_cast<double>(a.points - 1);
        }
    }
    const auto p = a.k ? fiber::FiberProblem::cylinder(a.alpha, *a.k) : fiber::FiberProblem::plane(a.alpha, a.xi.value_or(0.0));
    with_output(a.output, [&](std::ostream& os) { report::write_solutions(os, p, xs); });
    return kOk;
}

int cmd_verify(const VerifyArgs& a) {
    const auto& all = verify::suites();
    for (const auto& name : a.suites) {
        const bool known = std::any_of(all.begin(), all.end(), [&](const auto& s) { return s.name == name; });
        if (!known) {
            throw UsageError("unknown suite '" + name + "'");
        }
    }
    bool ok = true;
    std::size_t ran = 0;
    for (const auto& suite : all) {
        if (!a.suites.empty() && std::find(a.suites.begin(), a.suites.end(), suite.name) == a.suites.end()) {
            continue;
        }
        const verify::SuiteResult r = suite.run();
        ++ran;
        ok = ok && r.passed();
        std::cout << (r.passed() ? "PASS " : "FAIL ") << r.name << " (" << r.checks - r.failures.size() << "/"
                  << r.checks << " checks)\n";
        const std::size_t shown = std::min<std::size_t>(r.failures.size(), 20);
        for (std::size_t i = 0; i < shown; ++i) {
            std::cout << "  " << r.failures[i] << '\n';
        }
        if (r.failures.size() > shown) {
            std::cout << "  ... " << r.failures.size() - shown << " more\n";
        }
    }
    std::cout << (ok ? "all " : "some ") << ran << " suites " << (ok ? "passed" : "failed") << '\n';
    return ok ? kOk : kVerificationFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Essential self-adjointness of Grushin-type Laplacians on the half-plane and half-cylinder"};
    app.set_config("--config", "", "TOML/INI file with option values; command-line flags take precedence");
    app.require_subcommand(1);

    const std::vector<std::string> topologies{"plane", "cylinder"};

    ClassifyArgs ca;
    auto* classify = app.add_subcommand("classify", "Verdict for one manifold or one fiber operator");
    classify->add_option("--alpha", ca.alpha, "Metric exponent")->required();
    auto* xi_opt = classify->add_option("--xi", ca.xi, "Plane Fourier mode (selects a single fiber)");
    classify->add_option("--k", ca.k, "Cylinder Fourier mode (selects a single fiber)")->excludes(xi_opt);
    classify->add_option("--topology", ca.topology)->check(CLI::IsMember(topologies))->capture_default_str();
    classify->add_option("--format", ca.format)->check(CLI::IsMember({"plain", "json", "csv"}))->capture_default_str();
    classify->add_option("--output,-o", ca.output, "Machine record destination (default stdout)");
    classify->add_flag("--numeric", ca.numeric, "Cross-check fiber endpoints with the numerical oracle");
    classify->add_option("--k-max", ca.k_max, "Cylinder mode window")->check(CLI::Range(2L, 1L << 20))->capture_default_str();

    AtlasArgs aa;
    auto* atlas = app.add_subcommand("atlas", "Sweep alpha and tabulate plane and cylinder verdicts");
    atlas->add_option("--alpha-min", aa.alpha_min)->capture_default_str();
    atlas->add_option("--alpha-max", aa.alpha_max)->capture_default_str();
    atlas->add_option("--step", aa.step)->capture_default_str();
    atlas->add_option("--format", aa.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    atlas->add_option("--output,-o", aa.output, "Destination file (default stdout)");
    atlas->add_option("--jobs,-j", aa.jobs, "Worker threads; output is independent of this")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
    atlas->add_option("--k-max", aa.k_max)->check(CLI::Range(2L, 1L << 20))->capture_default_str();

    SolutionsArgs sa;
    auto* solutions = app.add_subcommand("solutions", "Sample the closed-form fundamental solutions");
    solutions->add_option("--alpha", sa.alpha)->required();
    auto* sxi = solutions->add_option("--xi", sa.xi, "Plane Fourier mode (default 0)");
    solutions->add_option("--k", sa.k, "Cylinder Fourier mode")->excludes(sxi);
    solutions->add_option("--x-min", sa.x_min)->capture_default_str();
    solutions->add_option("--x-max", sa.x_max)->capture_default_str();
    solutions->add_option("--points", sa.points)->capture_default_str();
    solutions->add_option("--spacing", sa.spacing)->check(CLI::IsMember({"log", "linear"}))->capture_default_str();
    solutions->add_option("--output,-o", sa.output, "Destination file (default stdout)");

    VerifyArgs va;
    auto* verify_cmd = app.add_subcommand("verify", "Run the self-verification suites");
    std::vector<std::string> names;
    for (const auto& s : verify::suites()) names.push_back(s.name);
    verify_cmd->add_option("--suite", va.suites, "Run only these suites")->check(CLI::IsMember(names));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*classify) return cmd_classify(ca);
        if (*atlas) return cmd_atlas(aa);
        if (*solutions) return cmd_solutions(sa);
        if (*verify_cmd) return cmd_verify(va);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.kind()) {
        case ErrorKind::Domain:
        case ErrorKind::Format:
            return kUsage;
        default:
            return kInternal;
        }
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}

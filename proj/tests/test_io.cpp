#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "grushin/grid_io.hpp"
#include "grushin/report.hpp"

using namespace grushin;
using geometry::GridFunction;
using geometry::GrushinModel;

namespace {

GridFunction sample_function() {
    return GridFunction::sample(geometry::log_spaced(0.1, 7.0, 9), geometry::periodic_grid(-1.0, 2.0, 6), -0.75,
                                [](double x, double y) {
                                    return std::complex<double>(std::exp(-x) * std::cos(3.0 * y), x * y / 3.0);
                                });
}

std::string write(const GrushinModel& m, const GridFunction& g) {
    std::ostringstream os;
    io::write_grid_function(os, m, g);
    return os.str();
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(FormatReal, RoundTripsExactly) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::numeric_limits<double>::denorm_min(),
                     std::numeric_limits<double>::max()}) {
        EXPECT_EQ(io::parse_real(io::format_real(v)), v);
    }
    EXPECT_EQ(io::format_real(0.1), "0.10000000000000001");
    EXPECT_EQ(io::format_real(-4), "-4");
}

TEST(ParseReal, RejectsGarbage) {
    EXPECT_THROW(io::parse_real("1.5x"), FormatError);
    EXPECT_THROW(io::parse_real(""), FormatError);
    EXPECT_THROW(io::parse_count("2.5"), FormatError);
    EXPECT_THROW(io::parse_count("-1"), FormatError);
    EXPECT_EQ(io::parse_count("12"), 12u);
}

TEST(GridFile, RoundTripPreservesEverything) {
    const GrushinModel m(-1.5, Topology::Cylinder);
    const GridFunction g = sample_function();
    const std::string text = write(m, g);
    std::istringstream is(text);
    const io::GridFile f = io::read_grid_function(is);
    EXPECT_EQ(f.model.alpha, m.alpha);
    EXPECT_EQ(f.model.topology, m.topology);
    EXPECT_EQ(f.function.x(), g.x());
    EXPECT_EQ(f.function.y(), g.y());
    EXPECT_EQ(f.function.values(), g.values());
    EXPECT_EQ(f.function.weight_exponent(), g.weight_exponent());
    EXPECT_EQ(f.function.y_axis(), g.y_axis());
    EXPECT_EQ(f.function.valid_lo(), g.valid_lo());
    EXPECT_EQ(f.function.valid_hi(), g.valid_hi());
    EXPECT_EQ(write(f.model, f.function), text);
}

TEST(GridFile, RoundTripKeepsValidRowsAndModeAxis) {
    const GrushinModel m(0.75, Topology::Plane);
    const GridFunction g = geometry::fourier_y(sample_function(), m);
    const GridFunction lb = geometry::apply_laplace_beltrami(sample_function(), m);
    for (const GridFunction* h : {&g, &lb}) {
        const std::string text = write(m, *h);
        std::istringstream is(text);
        const io::GridFile f = io::read_grid_function(is);
        EXPECT_EQ(f.function.y_axis(), h->y_axis());
        EXPECT_EQ(f.function.valid_lo(), h->valid_lo());
        EXPECT_EQ(f.function.valid_hi(), h->valid_hi());
        EXPECT_EQ(write(f.model, f.function), text);
    }
}

TEST(GridFile, Layout) {
    const auto ls = lines(write(GrushinModel(2, Topology::Plane), sample_function()));
    ASSERT_GE(ls.size(), 9u);
    EXPECT_EQ(ls[0], "# format: grushin-grid-function v1");
    EXPECT_EQ(ls[1], "# alpha: 2");
    EXPECT_EQ(ls[2], "# topology: plane");
    EXPECT_EQ(ls[3], "# weight_exponent: -0.75");
    EXPECT_EQ(ls[4], "# y_axis: position");
    EXPECT_EQ(ls[5], "# nx: 9");
    EXPECT_EQ(ls[6], "# ny: 6");
    EXPECT_EQ(ls[7], "# valid_rows: 0 9");
    EXPECT_EQ(ls[8], "x y re im");
    EXPECT_EQ(ls.size(), 9u + 9u * 6u);
}

TEST(GridFile, RejectsMalformedInput) {
    const std::string good = write(GrushinModel(1, Topology::Plane), sample_function());
    auto reject = [](std::string text) {
        std::istringstream is(text);
        EXPECT_THROW(io::read_grid_function(is), FormatError) << text.substr(0, 80);
    };
    auto replaced = [&](const std::string& from, const std::string& to) {
        std::string t = good;
        t.replace(t.find(from), from.size(), to);
        return t;
    };
    reject(replaced("grushin-grid-function v1", "grushin-grid-function v2"));
    reject(replaced("# topology: plane", "# topology: torus"));
    reject(replaced("# nx: 9", "# nx: 10"));
    reject(replaced("# y_axis: position", "# y_axis: sideways"));
    reject(replaced("# valid_rows: 0 9", "# valid_rows: zero"));
    reject(replaced("x y re im", "x y value"));
    reject(replaced("# alpha: 1\n", ""));
    reject(good + "1 2 3\n");
    std::string bad_number = good;
    bad_number.replace(bad_number.rfind(' ') + 1, 1, "q");
    reject(bad_number);
}

TEST(Report, FiberJson) {
    const auto rec = report::classify_fiber(fiber::FiberProblem::plane(-2, 0), false);
    const auto j = report::to_json(rec);
    EXPECT_EQ(j["record"], "fiber");
    EXPECT_EQ(j["branch"], "xi-zero-generic");
    EXPECT_EQ(j["solutions"][0], "1");
    EXPECT_EQ(j["solutions"][1], "x^-1");
    EXPECT_EQ(j["endpoints"][0]["class"], "limit-circle");
    EXPECT_EQ(j["endpoints"][1]["class"], "limit-point");
    EXPECT_EQ(j["deficiency_indices"]["n_plus"], 1);
    EXPECT_EQ(j["essentially_self_adjoint"], false);
    EXPECT_FALSE(j.contains("numeric_checks"));
}

TEST(Report, NumericChecksStatuses) {
    const auto agree = report::to_json(report::classify_fiber(fiber::FiberProblem::plane(-2, 0), true));
    ASSERT_EQ(agree["numeric_checks"].size(), 2u);
    for (const auto& c : agree["numeric_checks"]) {
        EXPECT_EQ(c["status"], "agrees");
        EXPECT_EQ(c["report"]["method"], "numeric");
        for (const auto& e : c["report"]["evidence"]) {
            EXPECT_TRUE(e["fit"].is_object());
        }
    }
    const auto edge = report::to_json(report::classify_fiber(fiber::FiberProblem::plane(-1, 1), true));
    EXPECT_EQ(edge["numeric_checks"][0]["status"], "skipped-near-boundary");
    const auto near = report::to_json(report::classify_fiber(fiber::FiberProblem::plane(0.9999, 1), true));
    EXPECT_EQ(near["numeric_checks"][1]["status"], "skipped-near-boundary");
}

TEST(Report, NonFiniteFitHasNullExponent) {
    numerics::TailFit fit;
    fit.estimated_exponent = std::numeric_limits<double>::infinity();
    fit.confidence = 0;
    fit.converged = false;
    fit.overflow = true;
    fit.partial_sums = {{1.0, 2.0}, {2.0, std::numeric_limits<double>::infinity()}, {3.0, 4.0}};
    const auto j = report::to_json(fit);
    EXPECT_TRUE(j["estimated_exponent"].is_null());
    EXPECT_EQ(j["partial_sums"].size(), 1u);
    EXPECT_NO_THROW((void)j.dump());
}

TEST(Report, VerdictJson) {
    const auto p = report::to_json(aggregate::plane_verdict(-1));
    EXPECT_EQ(p["record"], "manifold");
    EXPECT_EQ(p["failing_modes"]["kind"], "open-interval(-1,1)");
    EXPECT_EQ(p["failing_modes"]["lo"], -1.0);
    EXPECT_EQ(p["failing_modes"]["hi"], 1.0);
    EXPECT_EQ(p["failing_modes"]["measure_zero"], false);
    EXPECT_FALSE(p.contains("total_deficiency"));
    EXPECT_EQ(report::to_json(aggregate::cylinder_verdict(0))["total_deficiency"], "infinite");
    EXPECT_EQ(report::to_json(aggregate::cylinder_verdict(-2))["total_deficiency"], 1);
}

TEST(Atlas, CsvRows) {
    const auto rows = aggregate::regime_atlas(std::vector<double>{-2, -1, 0.5});
    std::ostringstream os;
    report::write_atlas_csv(os, rows);
    const auto ls = lines(os.str());
    ASSERT_EQ(ls.size(), 4u);
    EXPECT_EQ(ls[0], "alpha,plane_esa,plane_failing,plane_regime,cyl_esa,cyl_failing,cyl_total_deficiency,cyl_regime");
    EXPECT_EQ(ls[1], "-2,true,singleton-real-zero,esa-negative / measure-zero-exception,false,"
                     "singleton-integer-zero,1,zero-mode-fails");
    EXPECT_EQ(ls[2], "-1,false,\"open-interval(-1,1)\",boundary-minus-one,false,singleton-integer-zero,1,"
                     "zero-mode-fails");
    EXPECT_EQ(ls[3], "0.5,false,all-real-modes,all-modes-fail,false,all-integer-modes,infinite,all-modes-fail");
}

TEST(Atlas, JsonMatchesCsv) {
    const auto rows = aggregate::regime_atlas(aggregate::alpha_range(-4, 2, 0.5));
    const auto j = report::atlas_json(rows);
    ASSERT_EQ(j.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(j[i]["alpha"], rows[i].alpha);
        EXPECT_EQ(j[i]["plane_esa"], rows[i].plane.essentially_self_adjoint);
        EXPECT_EQ(j[i]["cyl_failing"], rows[i].cylinder.failing_modes.label());
        EXPECT_EQ(j[i].size(), report::atlas_columns().size());
    }
    std::ostringstream os;
    report::write_atlas_json(os, rows);
    EXPECT_EQ(nlohmann::json::parse(os.str()), j);
    EXPECT_EQ(os.str().back(), '\n');
}

TEST(Solutions, ColumnarOutput) {
    std::ostringstream os;
    report::write_solutions(os, fiber::FiberProblem::plane(0, 1), {0.5, 1.0, 2.0});
    std::istringstream is(os.str());
    const io::ColumnarTable t = io::read_columnar(is);
    EXPECT_EQ(t.header("format"), "grushin-solutions v1");
    EXPECT_EQ(t.header("branch"), "xi-nonzero-generic");
    EXPECT_EQ(t.columns, (std::vector<std::string>{"x", "psi1", "psi2"}));
    ASSERT_EQ(t.rows.size(), 3u);
    for (const auto& r : t.rows) {
        const double x = io::parse_real(r[0]);
        EXPECT_NEAR(io::parse_real(r[1]), std::exp(-x), 1e-15);
        EXPECT_NEAR(io::parse_real(r[2]), std::exp(x), 1e-14);
    }
    EXPECT_THROW(t.header("nope"), FormatError);
}

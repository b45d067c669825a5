#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "raman/config.hpp"
#include "raman/core_model.hpp"
#include "raman/errors.hpp"
#include "raman/measures.hpp"
#include "raman/scan.hpp"

using namespace raman;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;

ScanSpec pump_scan(double eps, int points, std::vector<std::string> outputs) {
    return ScanSpec::from_json({{"axes", {{{"name", "pump_amp"}, {"start", 0.0}, {"stop", 3.0}, {"points", points}}}},
                                {"params", {{"epsilon", eps}}},
                                {"outputs", outputs}});
}

std::string csv_text(const ScanResult& r) {
    std::ostringstream os;
    write_csv(r, os);
    return os.str();
}

std::size_t column(const ScanResult& r, const std::string& name) {
    const auto it = std::find(r.columns.begin(), r.columns.end(), name);
    REQUIRE(it != r.columns.end());
    return static_cast<std::size_t>(it - r.columns.begin());
}

}  // namespace

TEST_CASE("config text with comments and overrides") {
    json doc = parse_config_text(R"({
        // pump sweep
        "params": {"epsilon": 4.0 /* oscillatory */},
        "outputs": ["moments"]
    })");
    CHECK(doc["params"]["epsilon"] == 4.0);
    apply_override(doc, "params.n_V=0.5");
    apply_override(doc, "model=lossless");
    apply_override(doc, "extra.list=[1,2]");
    CHECK(doc["params"]["n_V"] == 0.5);
    CHECK(doc["model"] == "lossless");
    CHECK(doc["extra"]["list"].size() == 2);
    CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ContractError);
    CHECK_THROWS_AS(parse_config_text("{ broken"), ContractError);
}

TEST_CASE("parameter JSON round trip") {
    RamanParams p;
    p.epsilon = 2.5;
    p.pump_amp = 1.1;
    p.gamma_n = 0.3;
    p.n_V = 0.2;
    p.n_T = 0.1;
    p.phi_L = 0.4;
    const RamanParams q = params_from_json(params_to_json(p));
    CHECK(q.epsilon == p.epsilon);
    CHECK(q.pump_amp == p.pump_amp);
    CHECK(q.gamma_n == p.gamma_n);
    CHECK(q.n_V == p.n_V);
    CHECK(q.n_T == p.n_T);
    CHECK(q.phi_L == p.phi_L);
    CHECK_THROWS_AS(params_from_json({{"epsilonn", 1.0}}), ContractError);
}

TEST_CASE("axis sampling") {
    const ScanAxis a{"pump_amp", 0.0, 3.0, 0.01};
    CHECK(a.points() == 301);
    CHECK(a.value(0) == 0.0);
    CHECK(a.value(300) == 3.0);
    const auto s = pump_scan(4.0, 11, {"moments.b_s"});
    CHECK(s.axes[0].points() == 11);
    CHECK(s.axes[0].value(10) == 3.0);
}

TEST_CASE("scan rows reproduce direct evaluation") {
    const auto spec = pump_scan(4.0, 31, {"moments", "measures.nrf"});
    const auto r = run_scan(spec);
    REQUIRE(r.rows.size() == 31);
    CHECK(r.columns.front() == "pump_amp");
    CHECK(r.error_count() == 0);
    const auto bs = column(r, "moments.b_s"), d = column(r, "moments.d_sa_re"), nr = column(r, "measures.nrf");
    for (const auto& row : r.rows) {
        RamanParams p;
        p.epsilon = 4.0;
        p.pump_amp = row[0];
        const auto m = moments_general(p);
        CHECK(row[bs] == Approx(m.b_s).epsilon(1e-14).scale(1.0));
        CHECK(row[d] == Approx(m.d_sa.real()).epsilon(1e-14).scale(1.0));
        if (row[0] > 0.0) CHECK(row[nr] == Approx(nrf(m)).epsilon(1e-12));
    }
    CHECK(r.metadata["code_version"] == kCodeVersion);
    CHECK(r.metadata["regime"] == "oscillatory");
}

TEST_CASE("scans are deterministic across thread counts") {
    const auto spec = pump_scan(0.25, 41, {"moments", "measures", "spdc"});
    const std::string one = csv_text(run_scan(spec, 1));
    CHECK(one == csv_text(run_scan(spec, 4)));
    CHECK(one == csv_text(run_scan(spec, 1)));
    CHECK(one.substr(0, one.find('\n')).ends_with(",error"));
}

TEST_CASE("failed points are tagged and blanked") {
    json j = {{"axes", {{{"name", "epsilon"}, {"start", 0.5}, {"stop", 1.5}, {"points", 5}}}},
              {"params", {{"pump_amp", 1.0}}},
              {"model", "thermal"},
              {"outputs", {"moments.b_s"}}};
    const auto r = run_scan(ScanSpec::from_json(j));
    REQUIRE(r.rows.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        if (r.rows[i][0] <= 1.0) {
            CHECK(r.errors[i].starts_with("unsupported:"));
            CHECK(std::isnan(r.rows[i][1]));
        } else {
            CHECK(r.errors[i].empty());
            CHECK(std::isfinite(r.rows[i][1]));
        }
    }
    CHECK(r.error_count() == 3);
    CHECK(r.metadata["regime"] == "mixed");
    CHECK(csv_text(r).find("nan") != std::string::npos);

    json d = {{"axes", {{{"name", "n_T"}, {"start", -0.2}, {"stop", 0.2}, {"points", 3}}}},
              {"outputs", {"moments.b_s"}}};
    const auto rd = run_scan(ScanSpec::from_json(d));
    CHECK(rd.errors[0].starts_with("domain:"));
    CHECK(rd.errors[2].empty());

    // Fixed parameters are checked once for the whole run.
    json bad = {{"axes", {{{"name", "pump_amp"}, {"start", 0.0}, {"stop", 1.0}, {"points", 3}}}},
                {"params", {{"epsilon", -1.0}}},
                {"outputs", {"moments.b_s"}}};
    CHECK_THROWS_AS(ScanSpec::from_json(bad), DomainError);
    bad["axes"][0]["name"] = "epsilon";
    bad["axes"][0]["start"] = 0.5;
    CHECK_NOTHROW(ScanSpec::from_json(bad));
    CHECK_THROWS_AS(report_tables(-1.0, 0.0), DomainError);
    CHECK_THROWS_AS(report_tables(4.0, -0.1), DomainError);
}

TEST_CASE("malformed scan specs are contract errors") {
    auto axis = json{{{"name", "pump_amp"}, {"start", 0.0}, {"stop", 1.0}, {"points", 3}}};
    CHECK_THROWS_AS(ScanSpec::from_json({{"axes", axis}, {"outputs", {"moments.nope"}}}), ContractError);
    CHECK_THROWS_AS(ScanSpec::from_json({{"axes", axis}, {"outputs", {"moments"}}, {"colour", 1}}), ContractError);
    CHECK_THROWS_AS(ScanSpec::from_json({{"axes", axis}}), ContractError);
    CHECK_THROWS_AS(ScanSpec::from_json({{"axes", {{{"name", "wavelength"}, {"start", 0}, {"stop", 1}, {"points", 2}}}},
                                         {"outputs", {"moments"}}}),
                    ContractError);
    json three = json::array({axis[0], axis[0], axis[0]});
    CHECK_THROWS_AS(ScanSpec::from_json({{"axes", three}, {"outputs", {"moments"}}}), ContractError);
    CHECK_THROWS_AS(ScanSpec::from_json({{"axes", axis}, {"outputs", {"moments"}}, {"model", "magic"}}), ContractError);
}

TEST_CASE("two-axis maps are long format, first axis outermost") {
    json j = {{"axes",
               {{{"name", "epsilon"}, {"start", 2.0}, {"stop", 4.0}, {"points", 3}},
                {{"name", "pump_amp"}, {"start", 0.0}, {"stop", 1.0}, {"points", 4}}}},
              {"outputs", {"moments.b_s"}}};
    const auto r = run_scan(ScanSpec::from_json(j), 3);
    REQUIRE(r.rows.size() == 12);
    CHECK(r.rows[0][0] == 2.0);
    CHECK(r.rows[3][0] == 2.0);
    CHECK(r.rows[4][0] == 3.0);
    CHECK(r.rows[5][1] == Approx(1.0 / 3.0));
}

TEST_CASE("gamma ratio ties damping to the pump") {
    json j = {{"axes", {{{"name", "pump_amp"}, {"start", 0.5}, {"stop", 2.0}, {"points", 4}}}},
              {"params", {{"epsilon", 4.0}, {"n_V", 0.1}}},
              {"gamma_ratio", 2.0},
              {"outputs", {"moments.b_s"}}};
    const auto r = run_scan(ScanSpec::from_json(j));
    for (const auto& row : r.rows) {
        RamanParams p;
        p.pump_amp = row[0];
        p.gamma_n = 2.0 * row[0];
        p.n_V = 0.1;
        CHECK(row[1] == Approx(moments_general(p).b_s).epsilon(1e-14));
    }
}

TEST_CASE("result files") {
    const auto dir = std::filesystem::temp_directory_path() / "raman_test_scan";
    std::filesystem::remove_all(dir);
    const auto r = run_scan(pump_scan(4.0, 5, {"moments.b_s"}));
    write_result(r, dir / "s.csv");
    std::ifstream csv(dir / "s.csv"), meta(dir / "s.json");
    REQUIRE(csv.good());
    REQUIRE(meta.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "pump_amp,moments.b_s,error");
    const json m = json::parse(meta);
    CHECK(m["code_version"] == kCodeVersion);
    CHECK(m["spec"]["params"]["epsilon"] == 4.0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("value formatting") {
    CHECK(format_value(0.0) == "0");
    CHECK(format_value(std::nan("")) == "nan");
    CHECK(format_value(1.0 / 3.0) == "0.333333333333");
    CHECK(format_value(-INFINITY) == "-inf");
}

TEST_CASE("figure registry") {
    CHECK(figure_names().size() == 7);
    for (const auto& n : figure_names()) CHECK(figure_recipe(n).contains("jobs"));
    CHECK_THROWS_AS(figure_recipe("fig9"), ContractError);
    CHECK_THROWS_AS(run_figure("fig2", json::object()), ContractError);
}

TEST_CASE("fig3: the noise-reduction factor vanishes at the balanced pump") {
    json recipe = figure_recipe("fig3");
    recipe["jobs"].erase("fig3_exponential");
    recipe["jobs"]["fig3_oscillatory"]["axes"][0]["points"] = 31;
    const auto res = run_figure("fig3", recipe, 2);
    REQUIRE(res.size() == 1);
    const auto& r = res[0].result;
    CHECK(r.error_count() == 0);
    const auto nr = column(r, "measures.nrf");
    // 31 points over [0, 3 alpha_1]: alpha_1 sits at row 10.
    CHECK(r.rows[10][0] == Approx(pi / std::sqrt(3.0)));
    CHECK(std::abs(r.rows[10][nr]) < 1e-9);
    for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i][nr] >= -1e-12);
    const auto bell = column(r, "measures.bell"), sbell = column(r, "spdc.bell");
    CHECK(r.rows[10][bell] == Approx(r.rows[10][sbell]).epsilon(1e-6));
    CHECK(r.metadata["figure"] == "fig3");
}

TEST_CASE("fig6: phonon noise raises the noise-reduction factor") {
    json recipe = figure_recipe("fig6");
    for (auto& [k, job] : recipe["jobs"].items()) {
        job["axes"][0]["points"] = 31;
        job["outputs"] = {"measures.nrf", "measures.log_neg"};
    }
    const auto res = run_figure("fig6", recipe);
    REQUIRE(res.size() == 3);
    std::map<std::string, const ScanResult*> by;
    for (const auto& n : res) by[n.name] = &n.result;
    const auto& ideal = *by.at("fig6_ideal");
    const auto& thermal = *by.at("fig6_thermal");
    const auto& damped = *by.at("fig6_damped");
    const auto nr = column(ideal, "measures.nrf");
    const auto en = column(ideal, "measures.log_neg");
    CHECK(ideal.rows[10][nr] < 1e-9);
    // Thermal phonons drop out at alpha_1 exactly and matter most at alpha_1 / 2.
    CHECK(thermal.rows[10][nr] == Approx(ideal.rows[10][nr]).epsilon(1e-9).scale(1.0));
    CHECK(thermal.rows[5][nr] > ideal.rows[5][nr] + 1e-3);
    CHECK(thermal.rows[5][en] < ideal.rows[5][en]);
    CHECK(damped.rows[10][nr] > ideal.rows[10][nr] + 1e-3);
}

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "raman/config.hpp"
#include "raman/errors.hpp"
#include "raman/scan.hpp"

namespace fs = std::filesystem;
using namespace raman;

namespace {

enum Exit { kOk = 0, kUsage = 1, kDomain = 2, kVerifyFailed = 3 };

struct Common {
    std::string config;
    std::string out = "out";
    std::vector<std::string> sets;
    int jobs = 1;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON config file (comments allowed)");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--set", c.sets, "override a config key, e.g. params.epsilon=4")->take_all();
    app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

void write_all(const std::vector<NamedResult>& results, const fs::path& dir) {
    for (const auto& r : results) {
        const fs::path p = dir / (r.name + ".csv");
        write_result(r.result, p);
        std::cout << p.string() << " (" << r.result.rows.size() << " rows, " << r.result.error_count() << " errors)\n";
        for (const auto& w : r.result.warnings) std::cerr << "warning: " << r.name << ": " << w << '\n';
    }
}

int run_scan_cmd(const Common& c, const std::string& name) {
    if (c.config.empty() && c.sets.empty()) throw CLI::ValidationError("scan", "needs --config or --set");
    json doc = c.config.empty() ? json::object() : load_config(c.config);
    apply_overrides(doc, c.sets);
    const ScanSpec spec = ScanSpec::from_json(doc);
    write_all({{name, run_scan(spec, c.jobs)}}, c.out);
    return kOk;
}

int run_figure_cmd(const Common& c, const std::string& name) {
    json recipe = figure_recipe(name);
    if (!c.config.empty()) recipe.merge_patch(load_config(c.config));
    apply_overrides(recipe, c.sets);
    write_all(run_figure(name, recipe, c.jobs), c.out);
    return kOk;
}

int run_verify_cmd(const Common& c, const std::string& subset, double tolerance) {
    json doc = c.config.empty() ? json::object() : load_config(c.config);
    apply_overrides(doc, c.sets);
    VerifyOptions o;
    if (tolerance > 0.0) o.tolerance = tolerance;
    o.samples = doc.value("samples", o.samples);
    o.seed = doc.value("seed", o.seed);
    o.max_basis = doc.value("max_basis", o.max_basis);
    const VerifyReport rep = verify(subset, o);
    json j = {{"code_version", kCodeVersion}, {"subset", rep.subset},         {"passed", rep.passed},
              {"complete", rep.complete},     {"max_deviation", rep.max_deviation}, {"tolerance", rep.tolerance},
              {"details", rep.details}};
    fs::create_directories(c.out);
    const fs::path p = fs::path(c.out) / ("verify_" + subset + ".json");
    std::ofstream(p) << j.dump(2) << '\n';
    std::cout << subset << ": " << (rep.passed ? "PASS" : "FAIL") << " max_deviation=" << format_value(rep.max_deviation)
              << " tolerance=" << format_value(rep.tolerance) << (rep.complete ? "" : " (incomplete)") << '\n';
    return rep.passed ? kOk : kVerifyFailed;
}

int run_report_cmd(const Common& c) {
    json doc = c.config.empty() ? json::object() : load_config(c.config);
    apply_overrides(doc, c.sets);
    write_all(report_tables(doc.value("epsilon", 4.0), doc.value("n_T", 0.0)), c.out);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stokes/anti-Stokes Raman correlation model: scans, figure data, oracle checks"};
    app.require_subcommand(1);

    Common scan_c, fig_c, ver_c, rep_c;
    std::string scan_name = "scan";
    std::string fig_name;
    std::string subset;
    double tolerance = 0.0;

    auto* scan = app.add_subcommand("scan", "run a parameter sweep from a scan spec");
    add_common(scan, scan_c);
    scan->add_option("--name", scan_name, "output file stem");

    auto* fig = app.add_subcommand("figure", "write the data behind one figure");
    add_common(fig, fig_c);
    fig->add_option("name", fig_name, "fig2 .. fig8")->required();

    auto* ver = app.add_subcommand("verify", "compare closed forms with the Fock-space oracle");
    add_common(ver, ver_c);
    ver->add_option("subset", subset, "lossless, thermal or damped")->required()->check(
        CLI::IsMember({"lossless", "thermal", "damped"}));
    ver->add_option("--tolerance", tolerance, "accepted relative deviation");

    auto* rep = app.add_subcommand("report", "balanced-point and asymptotic closed-form tables");
    add_common(rep, rep_c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*scan) return run_scan_cmd(scan_c, scan_name);
        if (*fig) {
            if (std::find(figure_names().begin(), figure_names().end(), fig_name) == figure_names().end()) {
                std::cerr << "unknown figure " << fig_name << '\n';
                return kUsage;
            }
            return run_figure_cmd(fig_c, fig_name);
        }
        if (*ver) return run_verify_cmd(ver_c, subset, tolerance);
        if (*rep) return run_report_cmd(rep_c);
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << '\n';
        return kUsage;
    } catch (const ContractError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomain;
    }
    return kUsage;
}

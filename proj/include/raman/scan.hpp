#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "raman/config.hpp"
#include "raman/core_model.hpp"

namespace raman {

inline constexpr const char* kCodeVersion = "1.0.0";

// Swept variable: pump_amp, epsilon, n_V, n_T, gamma_n, phi_L, delta, zfrac, s, z_s or z_a.
struct ScanAxis {
    std::string name;
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    std::size_t points() const;
    double value(std::size_t i) const;
};

struct ScanSpec {
    std::vector<ScanAxis> axes;  // one axis, or two for a long-format map
    RamanParams params;
    double zfrac = 1.0;
    double delta = 0.5;
    double s = 0.0;      // ordering parameter for quasi.* outputs
    double z_s = 1.0;    // positions for corr.* outputs
    double z_a = 1.0;
    std::optional<double> gamma_ratio;  // gamma_n = gamma_ratio * pump_amp when set
    std::string model = "general";      // general | lossless | thermal | asymptotic
    int oracle_dim = 40;
    std::vector<std::string> outputs;   // qualified names or group names

    void validate() const;
    static ScanSpec from_json(const json& j);
    json to_json() const;
};

struct ScanResult {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> errors;  // one per row, empty when the point succeeded
    std::vector<std::string> warnings;
    json metadata;

    std::size_t error_count() const;
};

// Qualified output names accepted by ScanSpec, e.g. "moments.b_s" or "measures.log_neg".
const std::vector<std::string>& known_outputs();
// Expands group names such as "measures" into qualified names.
std::vector<std::string> expand_outputs(const std::vector<std::string>& requested);

ScanResult run_scan(const ScanSpec& spec, int jobs = 1);

std::string format_value(double x);
void write_csv(const ScanResult& r, std::ostream& out);
// Writes the CSV and a .json sidecar next to it.
void write_result(const ScanResult& r, const std::filesystem::path& csv_path);

struct NamedResult {
    std::string name;
    ScanResult result;
};

const std::vector<std::string>& figure_names();
// Default recipe for a figure; throws ContractError for unknown names.
json figure_recipe(const std::string& name);
std::vector<NamedResult> run_figure(const std::string& name, const json& recipe, int jobs = 1);

struct VerifyOptions {
    std::optional<double> tolerance;
    int samples = 50;
    std::uint64_t seed = 20240611;
    int max_basis = 14 * 14 * 14;
};

struct VerifyReport {
    std::string subset;
    bool passed = false;
    bool complete = true;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    json details;
};

// Subsets: lossless, thermal, damped.
VerifyReport verify(const std::string& subset, const VerifyOptions& opts = {});

// Balanced-point and asymptotic tables: closed form next to the generic pipeline.
std::vector<NamedResult> report_tables(double epsilon, double n_T);

}  // namespace raman

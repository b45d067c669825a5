#include "raman/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <thread>

#include "raman/distributions.hpp"
#include "raman/errors.hpp"
#include "raman/fock_oracle.hpp"
#include "raman/measures.hpp"
#include "raman/spdc.hpp"

namespace raman {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = std::numbers::pi;

const std::vector<std::string>& axis_names() {
    static const std::vector<std::string> names = {"pump_amp", "epsilon", "n_V", "n_T", "gamma_n", "phi_L",
                                                   "delta",    "zfrac",   "s",   "z_s", "z_a"};
    return names;
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& output_groups() {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> groups = {
        {"moments", {"b_s", "b_a", "b_v", "d_sa_re", "d_sa_im", "d_sa_abs", "ratio"}},
        {"measures",
         {"g2", "cs_violated", "nrf", "lambda_sq", "log_neg", "purity", "tau", "steer_s_to_a", "steer_a_to_s"}},
        {"spdc",
         {"n_mean", "g2", "nrf", "lambda_sq", "log_neg", "purity", "tau", "steer_s_to_a", "steer_a_to_s"}},
        {"pnd", {"p00", "p10", "p01", "p11"}},
        {"quasi", {"min", "tail", "divergent"}},
        {"corr", {"dd", "d_re", "d_im"}},
        {"multimode", {"rm"}},
        {"balanced", {"alpha_1", "alpha_2", "alpha_3", "alpha_tilde_1", "alpha_tilde_2", "alpha_tilde_3"}},
        {"oracle", {"b_s", "b_a", "d_sa_re", "d_sa_im", "max_rel_dev", "leakage"}},
        {"regime", {"oscillatory"}},
    };
    return groups;
}

// Outputs not included when a group name is requested.
const std::vector<std::string>& extra_outputs() {
    static const std::vector<std::string> extra = {"measures.bell", "measures.bell_j", "measures.bell_q",
                                                   "spdc.bell", "multimode.rm_closed"};
    return extra;
}

std::string error_tag(const std::exception& e) {
    if (dynamic_cast<const DomainError*>(&e)) return "domain";
    if (dynamic_cast<const UnsupportedError*>(&e)) return "unsupported";
    if (dynamic_cast<const ContractError*>(&e)) return "contract";
    if (dynamic_cast<const TruncationError*>(&e)) return "truncation";
    if (dynamic_cast<const InstabilityError*>(&e)) return "instability";
    if (dynamic_cast<const ResourceError*>(&e)) return "resource";
    if (dynamic_cast<const InconclusiveError*>(&e)) return "inconclusive";
    return "error";
}

double get_number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ContractError(std::string(key) + " must be a number");
    return j.at(key).get<double>();
}

void set_axis_value(const std::string& name, double x, RamanParams& p, ScanSpec& s) {
    if (name == "pump_amp") p.pump_amp = x;
    else if (name == "epsilon") p.epsilon = x;
    else if (name == "n_V") p.n_V = x;
    else if (name == "n_T") p.n_T = x;
    else if (name == "gamma_n") p.gamma_n = x;
    else if (name == "phi_L") p.phi_L = x;
    else if (name == "delta") s.delta = x;
    else if (name == "zfrac") s.zfrac = x;
    else if (name == "s") s.s = x;
    else if (name == "z_s") s.z_s = x;
    else if (name == "z_a") s.z_a = x;
    else throw ContractError("unknown axis " + name);
}

JointPND pnd_auto(const TwoModeMoments& m, const RamanParams& p, bool paired_model, int n_max) {
    if (paired_model && p.n_V == 0.0 && p.gamma_n == 0.0) return pnd_nv0(m, n_max);
    return pnd_general(m, n_max);
}

std::mutex& oracle_mutex() {
    static std::mutex m;
    return m;
}

double rel_dev(double x, double ref) {
    const double scale = std::abs(ref);
    return scale > 1e-12 ? std::abs(x - ref) / scale : std::abs(x - ref);
}

double moment_deviation(const TwoModeMoments& oracle, const TwoModeMoments& ref) {
    const double ds = std::abs(ref.d_sa);
    const double dd = ds > 1e-12 ? std::abs(oracle.d_sa - ref.d_sa) / ds : std::abs(oracle.d_sa - ref.d_sa);
    return std::max({rel_dev(oracle.b_s, ref.b_s), rel_dev(oracle.b_a, ref.b_a), dd});
}

// Evaluates the requested outputs at one grid point.
class PointEvaluator {
public:
    PointEvaluator(const ScanSpec& spec, const RamanParams& p) : spec_(spec), p_(p) {}

    double eval(const std::string& q) {
        const auto dot = q.find('.');
        const std::string group = q.substr(0, dot);
        const std::string key = q.substr(dot + 1);
        if (group == "moments") {
            const auto& m = moments();
            if (key == "b_s") return m.b_s;
            if (key == "b_a") return m.b_a;
            if (key == "b_v") return m.b_v ? *m.b_v : kNaN;
            if (key == "d_sa_re") return m.d_sa.real();
            if (key == "d_sa_im") return m.d_sa.imag();
            if (key == "d_sa_abs") return std::abs(m.d_sa);
            if (key == "ratio") return m.b_a / m.b_s;
        } else if (group == "measures") {
            if (key.rfind("bell", 0) == 0) {
                const auto& b = bell();
                if (key == "bell") return b.value;
                if (key == "bell_j") return b.config.j;
                if (key == "bell_q") return b.config.q;
            }
            return report_field(report(), key);
        } else if (group == "spdc") {
            if (key == "n_mean") return spdc_twin().b_s;
            if (key == "bell") return bell_optimize(spdc_twin()).value;
            return report_field(spdc_report(), key);
        } else if (group == "pnd") {
            const auto& d = small_pnd();
            if (key == "p00") return d.probs(0, 0);
            if (key == "p10") return d.probs(1, 0);
            if (key == "p01") return d.probs(0, 1);
            if (key == "p11") return d.probs(1, 1);
        } else if (group == "quasi") {
            const auto& qd = quasi();
            if (key == "min") return qd.negative_region().min_value;
            if (key == "tail") return qd.tail_estimate;
            if (key == "divergent") return qd.divergent ? 1.0 : 0.0;
        } else if (group == "corr") {
            const cplx d = cross_position_correlator(p_, spec_.z_s, spec_.z_a);
            if (key == "dd") return std::norm(d);
            if (key == "d_re") return d.real();
            if (key == "d_im") return d.imag();
        } else if (group == "multimode") {
            if (key == "rm") return multimode_nrf_numeric(p_, spec_.delta);
            if (key == "rm_closed") {
                if (p_.n_V != 0.0 || p_.gamma_n != 0.0 || p_.n_T != 0.0)
                    throw UnsupportedError("closed multimode NRF needs n_V = n_T = gamma_n = 0");
                return multimode_nrf_closed(p_.epsilon, spec_.delta);
            }
        } else if (group == "balanced") {
            const auto amps = balanced_pump_amplitudes(p_.epsilon, 3);
            const bool tilde = key.rfind("alpha_tilde_", 0) == 0;
            const int m = key.back() - '1';
            return tilde ? amps[static_cast<std::size_t>(m)].second : amps[static_cast<std::size_t>(m)].first;
        } else if (group == "oracle") {
            const auto& o = oracle();
            if (key == "b_s") return o.moments.b_s;
            if (key == "b_a") return o.moments.b_a;
            if (key == "d_sa_re") return o.moments.d_sa.real();
            if (key == "d_sa_im") return o.moments.d_sa.imag();
            if (key == "max_rel_dev") return moment_deviation(o.moments, moments());
            if (key == "leakage") return o.leakage;
        } else if (group == "regime") {
            return regime_of(p_.epsilon) == Regime::Oscillatory ? 1.0 : 0.0;
        }
        throw ContractError("unknown output " + q);
    }

    std::vector<std::string> warnings;

private:
    struct OracleResult {
        TwoModeMoments moments;
        double leakage = 0.0;
    };

    static double report_field(const MeasureReport& r, const std::string& key) {
        if (key == "g2") return r.g2;
        if (key == "cs_violated") return r.cs_violated ? 1.0 : 0.0;
        if (key == "nrf") return r.nrf;
        if (key == "lambda_sq") return r.lambda_sq;
        if (key == "log_neg") return r.log_neg;
        if (key == "purity") return r.purity;
        if (key == "tau") return r.tau;
        if (key == "steer_s_to_a") return r.steer_s_to_a;
        if (key == "steer_a_to_s") return r.steer_a_to_s;
        throw ContractError("unknown measure " + key);
    }

    const TwoModeMoments& moments() {
        if (!moments_) {
            const std::string& model = spec_.model;
            if (model == "general") moments_ = moments_general(p_, spec_.zfrac);
            else if (model == "lossless") moments_ = moments_lossless(p_, spec_.zfrac);
            else if (model == "thermal") moments_ = moments_thermal(p_, spec_.zfrac);
            else if (model == "asymptotic") moments_ = moments_asymptotic(p_.epsilon, p_.n_T);
            else throw ContractError("unknown model " + model);
        }
        return *moments_;
    }

    const MeasureReport& report() {
        if (!report_) report_ = measure_report(moments(), false);
        return *report_;
    }

    const BellResult& bell() {
        if (!bell_) {
            bell_ = bell_optimize(moments());
            if (!bell_->converged) warnings.push_back("Bell optimizer did not converge");
        }
        return *bell_;
    }

    const TwoModeMoments& spdc_twin() {
        if (!twin_) {
            const auto& m = moments();
            twin_ = spdc_matched(0.5 * (m.b_s + m.b_a)).as_two_mode();
        }
        return *twin_;
    }

    const MeasureReport& spdc_report() {
        if (!spdc_report_) spdc_report_ = measure_report(spdc_twin(), false);
        return *spdc_report_;
    }

    bool paired_model() const { return spec_.model == "general" || spec_.model == "lossless"; }

    const JointPND& small_pnd() {
        if (!small_pnd_) small_pnd_ = pnd_auto(moments(), p_, paired_model(), 3);
        return *small_pnd_;
    }

    const QuasiDistribution& quasi() {
        if (!quasi_) {
            const auto& m = moments();
            const int n_max = pnd_truncation(m.b_s, m.b_a);
            const JointPND d = pnd_auto(m, p_, paired_model(), n_max);
            quasi_ = quasi_distribution(d, spec_.s, default_quasi_grid(m.b_s, m.b_a, 41), DivergencePolicy::Report);
            if (quasi_->divergent) warnings.push_back("quasi-distribution series divergent");
        }
        return *quasi_;
    }

    const OracleResult& oracle() {
        if (!oracle_) {
            FockConfig cfg;
            cfg.params = p_;
            cfg.dim_s = cfg.dim_a = cfg.dim_v = spec_.oracle_dim;
            cfg.max_basis = std::max(cfg.max_basis, spec_.oracle_dim * spec_.oracle_dim);
            cfg.zfrac = spec_.zfrac;
            std::lock_guard<std::mutex> lock(oracle_mutex());
            const FockState st = evolve(cfg);
            oracle_ = OracleResult{extract_moments(st), st.leakage};
            if (st.leakage_flag) warnings.push_back("oracle boundary leakage flagged");
        }
        return *oracle_;
    }

    const ScanSpec& spec_;
    RamanParams p_;
    std::optional<TwoModeMoments> moments_;
    std::optional<MeasureReport> report_;
    std::optional<BellResult> bell_;
    std::optional<TwoModeMoments> twin_;
    std::optional<MeasureReport> spdc_report_;
    std::optional<JointPND> small_pnd_;
    std::optional<QuasiDistribution> quasi_;
    std::optional<OracleResult> oracle_;
};

template <class F>
void parallel_for(std::size_t n, int jobs, F&& body) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
    for (auto& t : pool) t.join();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

}  // namespace

std::size_t ScanAxis::points() const {
    return static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
}

double ScanAxis::value(std::size_t i) const {
    const double x = start + static_cast<double>(i) * step;
    return i + 1 == points() ? std::min(x, std::max(stop, start)) : x;
}

void ScanSpec::validate() const {
    if (axes.empty() || axes.size() > 2) throw ContractError("scan needs one or two axes");
    for (const auto& a : axes) {
        if (std::find(axis_names().begin(), axis_names().end(), a.name) == axis_names().end())
            throw ContractError("unknown axis " + a.name);
        if (!(a.step > 0.0) || !std::isfinite(a.step)) throw ContractError("axis " + a.name + " needs step > 0");
        if (!(a.stop >= a.start)) throw ContractError("axis " + a.name + " has an empty range");
    }
    if (axes.size() == 2 && axes[0].name == axes[1].name) throw ContractError("map axes must differ");
    if (outputs.empty()) throw ContractError("scan requests no outputs");
    expand_outputs(outputs);
    if (model != "general" && model != "lossless" && model != "thermal" && model != "asymptotic")
        throw ContractError("unknown model " + model);
    if (oracle_dim < 2) throw ContractError("oracle_dim must be >= 2");
    if (gamma_ratio && *gamma_ratio < 0.0) throw DomainError("gamma_ratio must be >= 0");
    // Parameters no axis touches are fixed for the whole run; reject them up front.
    RamanParams fixed = params;
    const RamanParams ok;
    for (const auto& a : axes) {
        if (a.name == "epsilon") fixed.epsilon = ok.epsilon;
        else if (a.name == "pump_amp") fixed.pump_amp = ok.pump_amp;
        else if (a.name == "gamma_n") fixed.gamma_n = ok.gamma_n;
        else if (a.name == "n_V") fixed.n_V = ok.n_V;
        else if (a.name == "n_T") fixed.n_T = ok.n_T;
        else if (a.name == "phi_L") fixed.phi_L = ok.phi_L;
    }
    if (gamma_ratio) fixed.gamma_n = ok.gamma_n;
    fixed.validate();
}

ScanSpec ScanSpec::from_json(const json& j) {
    static const std::set<std::string> allowed = {"kind",  "description", "axes", "params",     "zfrac",
                                                  "delta", "s",           "z_s",  "z_a",        "gamma_ratio",
                                                  "model", "oracle_dim",  "outputs"};
    if (!j.is_object()) throw ContractError("scan spec must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ContractError("unknown scan key " + k);
    ScanSpec s;
    if (!j.contains("axes") || !j.at("axes").is_array()) throw ContractError("scan spec needs an axes array");
    for (const auto& a : j.at("axes")) {
        ScanAxis ax;
        if (!a.contains("name") || !a.at("name").is_string()) throw ContractError("axis needs a name");
        ax.name = a.at("name").get<std::string>();
        ax.start = get_number(a, "start", 0.0);
        ax.stop = get_number(a, "stop", ax.start);
        if (a.contains("points")) {
            const int n = a.at("points").get<int>();
            if (n < 1) throw ContractError("axis " + ax.name + " needs points >= 1");
            ax.step = n == 1 ? 1.0 : (ax.stop - ax.start) / (n - 1);
        } else {
            ax.step = get_number(a, "step", 0.0);
        }
        s.axes.push_back(ax);
    }
    s.params = params_from_json(j.value("params", json::object()));
    s.zfrac = get_number(j, "zfrac", s.zfrac);
    s.delta = get_number(j, "delta", s.delta);
    s.s = get_number(j, "s", s.s);
    s.z_s = get_number(j, "z_s", s.z_s);
    s.z_a = get_number(j, "z_a", s.z_a);
    if (j.contains("gamma_ratio") && !j.at("gamma_ratio").is_null()) s.gamma_ratio = get_number(j, "gamma_ratio", 0);
    s.model = j.value("model", s.model);
    s.oracle_dim = j.value("oracle_dim", s.oracle_dim);
    if (j.contains("outputs")) s.outputs = j.at("outputs").get<std::vector<std::string>>();
    s.validate();
    return s;
}

json ScanSpec::to_json() const {
    json ax = json::array();
    for (const auto& a : axes) ax.push_back({{"name", a.name}, {"start", a.start}, {"stop", a.stop}, {"step", a.step}});
    json j = {{"axes", ax},   {"params", params_to_json(params)}, {"zfrac", zfrac}, {"delta", delta},
              {"s", s},       {"z_s", z_s},                       {"z_a", z_a},     {"model", model},
              {"oracle_dim", oracle_dim}, {"outputs", outputs}};
    j["gamma_ratio"] = gamma_ratio ? json(*gamma_ratio) : json(nullptr);
    return j;
}

std::size_t ScanResult::error_count() const {
    return static_cast<std::size_t>(std::count_if(errors.begin(), errors.end(), [](const auto& e) { return !e.empty(); }));
}

const std::vector<std::string>& known_outputs() {
    static const std::vector<std::string> all = [] {
        std::vector<std::string> v;
        for (const auto& [g, keys] : output_groups())
            for (const auto& k : keys) v.push_back(g + "." + k);
        for (const auto& e : extra_outputs()) v.push_back(e);
        return v;
    }();
    return all;
}

std::vector<std::string> expand_outputs(const std::vector<std::string>& requested) {
    std::vector<std::string> out;
    auto add = [&](const std::string& q) {
        if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
    };
    for (const auto& r : requested) {
        auto g = std::find_if(output_groups().begin(), output_groups().end(), [&](const auto& x) { return x.first == r; });
        if (g != output_groups().end()) {
            for (const auto& k : g->second) add(r + "." + k);
        } else if (std::find(known_outputs().begin(), known_outputs().end(), r) != known_outputs().end()) {
            add(r);
        } else {
            throw ContractError("unknown output " + r);
        }
    }
    return out;
}

ScanResult run_scan(const ScanSpec& spec, int jobs) {
    spec.validate();
    const std::vector<std::string> outputs = expand_outputs(spec.outputs);
    const std::size_t n0 = spec.axes[0].points();
    const std::size_t n1 = spec.axes.size() == 2 ? spec.axes[1].points() : 1;
    const std::size_t n = n0 * n1;

    ScanResult r;
    for (const auto& a : spec.axes) r.columns.push_back(a.name);
    for (const auto& q : outputs) r.columns.push_back(q);
    r.rows.assign(n, std::vector<double>(r.columns.size(), kNaN));
    r.errors.assign(n, std::string());
    std::vector<std::vector<std::string>> point_warnings(n);

    parallel_for(n, jobs, [&](std::size_t idx) {
        ScanSpec local = spec;
        RamanParams p = spec.params;
        const std::size_t i0 = idx / n1;
        const std::size_t i1 = idx % n1;
        std::vector<double>& row = r.rows[idx];
        row[0] = spec.axes[0].value(i0);
        set_axis_value(spec.axes[0].name, row[0], p, local);
        if (spec.axes.size() == 2) {
            row[1] = spec.axes[1].value(i1);
            set_axis_value(spec.axes[1].name, row[1], p, local);
        }
        if (spec.gamma_ratio) p.gamma_n = *spec.gamma_ratio * p.pump_amp;
        try {
            p.validate();
            PointEvaluator ev(local, p);
            const std::size_t off = spec.axes.size();
            for (std::size_t k = 0; k < outputs.size(); ++k) row[off + k] = ev.eval(outputs[k]);
            point_warnings[idx] = ev.warnings;
        } catch (const std::exception& e) {
            for (std::size_t k = spec.axes.size(); k < row.size(); ++k) row[k] = kNaN;
            r.errors[idx] = error_tag(e) + ": " + e.what();
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& w : point_warnings[i]) r.warnings.push_back("row " + std::to_string(i) + ": " + w);
        if (!r.errors[i].empty()) r.warnings.push_back("row " + std::to_string(i) + ": " + r.errors[i]);
    }

    const bool eps_swept = std::any_of(spec.axes.begin(), spec.axes.end(), [](const auto& a) { return a.name == "epsilon"; });
    r.metadata = {
        {"code_version", kCodeVersion},
        {"kind", "scan"},
        {"spec", spec.to_json()},
        {"regime", eps_swept ? std::string("mixed") : std::string(regime_name(regime_of(spec.params.epsilon)))},
        {"tolerances", {{"csv_significant_digits", 12}, {"pnd_tail", 1e-10}}},
        {"rows", n},
        {"errors", r.error_count()},
    };
    return r;
}

std::string format_value(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void write_csv(const ScanResult& r, std::ostream& out) {
    for (const auto& c : r.columns) out << c << ',';
    out << "error\n";
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        for (double v : r.rows[i]) out << format_value(v) << ',';
        out << csv_field(r.errors[i]) << '\n';
    }
}

void write_result(const ScanResult& r, const std::filesystem::path& csv_path) {
    if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw ContractError("cannot write " + csv_path.string());
        write_csv(r, out);
    }
    json meta = r.metadata;
    meta["columns"] = r.columns;
    meta["warnings"] = r.warnings;
    std::filesystem::path side = csv_path;
    side.replace_extension(".json");
    std::ofstream out(side, std::ios::binary);
    if (!out) throw ContractError("cannot write " + side.string());
    out << meta.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Figures

namespace {

json axis(const std::string& name, double start, double stop, int points) {
    return {{"name", name}, {"start", start}, {"stop", stop}, {"points", points}};
}

json params_json(double epsilon, double n_V = 0.0, double n_T = 0.0, double gamma_n = 0.0, double pump = 0.0) {
    RamanParams p;
    p.epsilon = epsilon;
    p.n_V = n_V;
    p.n_T = n_T;
    p.gamma_n = gamma_n;
    p.pump_amp = pump;
    return params_to_json(p);
}

const double kOscPumpMax = 3.0 * kPi / std::sqrt(3.0);
const double kAlpha1 = kPi / std::sqrt(3.0);

json fig2_recipe() {
    const json out = {"moments.b_s", "moments.b_a", "moments.b_v"};
    return {{"jobs",
             {{"fig2_exponential", {{"axes", {axis("pump_amp", 0.0, 3.0, 301)}}, {"params", params_json(0.25)}, {"outputs", out}}},
              {"fig2_oscillatory",
               {{"axes", {axis("pump_amp", 0.0, kOscPumpMax, 301)}}, {"params", params_json(4.0)}, {"outputs", out}}}}}};
}

json fig3_recipe() {
    const json out = {"moments.b_s", "moments.b_a", "measures", "measures.bell", "spdc", "spdc.bell"};
    return {{"jobs",
             {{"fig3_exponential", {{"axes", {axis("pump_amp", 0.0, 3.0, 301)}}, {"params", params_json(0.25)}, {"outputs", out}}},
              {"fig3_oscillatory",
               {{"axes", {axis("pump_amp", 0.0, kOscPumpMax, 301)}}, {"params", params_json(4.0)}, {"outputs", out}}}}}};
}

json fig4_recipe() {
    const json curve_out = {"pnd.p10", "pnd.p01", "moments.b_s", "moments.b_a"};
    return {{"jobs",
             {{"fig4a_pnd", {{"kind", "pnd"}, {"params", params_json(4.0, 0, 0, 0, kAlpha1)}, {"n_max", 12}}},
              {"fig4b_pnd", {{"kind", "pnd"}, {"params", params_json(4.0, 0, 0, 0, kAlpha1 / 2)}, {"n_max", 12}}},
              {"fig4c_quasi", {{"kind", "quasi"}, {"params", params_json(4.0, 0, 0, 0, kAlpha1)}, {"s", 0.12}, {"points", 101}}},
              {"fig4d_quasi",
               {{"kind", "quasi"}, {"params", params_json(4.0, 0, 0, 0, kAlpha1 / 2)}, {"s", 0.45}, {"points", 101}}},
              {"fig4e_nv0.1",
               {{"axes", {axis("pump_amp", 0.0, kOscPumpMax, 301)}}, {"params", params_json(4.0, 0.1)}, {"outputs", curve_out}}},
              {"fig4f_nv0.5",
               {{"axes", {axis("pump_amp", 0.0, kOscPumpMax, 301)}},
                {"params", params_json(4.0, 0.5)},
                {"outputs", curve_out}}}}}};
}

json fig5_recipe() {
    return {{"jobs",
             {{"fig5_map",
               {{"axes", {axis("epsilon", 1.05, 10.0, 180), axis("pump_amp", 0.0, 10.0, 201)}},
                {"params", params_json(4.0)},
                {"outputs", {"moments.b_s", "measures.nrf"}}}},
              {"fig5_curves",
               {{"axes", {axis("epsilon", 1.05, 10.0, 180)}}, {"params", params_json(4.0)}, {"outputs", {"balanced"}}}}}}};
}

json fig6_recipe() {
    const json out = {"moments.b_s", "moments.b_a", "measures", "measures.bell"};
    const json ax = {axis("pump_amp", 0.0, kOscPumpMax, 301)};
    return {{"jobs",
             {{"fig6_ideal", {{"axes", ax}, {"params", params_json(4.0)}, {"outputs", out}}},
              {"fig6_thermal", {{"axes", ax}, {"params", params_json(4.0, 0.5)}, {"outputs", out}}},
              {"fig6_damped", {{"axes", ax}, {"params", params_json(4.0, 0.1, 0.1)}, {"gamma_ratio", 1.0}, {"outputs", out}}}}}};
}

json fig7_recipe() {
    const double pump = 5.0 * kPi / std::sqrt(3.0);
    const json ax = {axis("z_s", 0.0, 1.0, 101), axis("z_a", 0.0, 1.0, 101)};
    const json out = {"corr.dd"};
    return {{"jobs",
             {{"fig7a", {{"axes", ax}, {"params", params_json(4.0, 0, 0, 0, pump)}, {"outputs", out}}},
              {"fig7b", {{"axes", ax}, {"params", params_json(4.0, 1, 0, 0, pump)}, {"outputs", out}}},
              {"fig7c", {{"axes", ax}, {"params", params_json(4.0, 10, 0, 0, pump)}, {"outputs", out}}},
              {"fig7d", {{"axes", ax}, {"params", params_json(4.0, 0, 0, 0, pump)}, {"gamma_ratio", 1.0}, {"outputs", out}}}}}};
}

json fig8_recipe() {
    const json dax = {axis("delta", 0.02, 1.98, 99)};
    const json nax = {axis("n_V", 0.0, 2.0, 41)};
    return {{"jobs",
             {{"fig8a_nv0", {{"axes", dax}, {"params", params_json(4.0)}, {"outputs", {"multimode.rm", "multimode.rm_closed"}}}},
              {"fig8a_nv0.5", {{"axes", dax}, {"params", params_json(4.0, 0.5)}, {"outputs", {"multimode.rm"}}}},
              {"fig8b_eps2", {{"axes", nax}, {"params", params_json(2.0)}, {"delta", 0.5}, {"outputs", {"multimode.rm"}}}},
              {"fig8b_eps4", {{"axes", nax}, {"params", params_json(4.0)}, {"delta", 0.5}, {"outputs", {"multimode.rm"}}}}}}};
}

ScanResult run_pnd_job(const json& job) {
    const RamanParams p = params_from_json(job.value("params", json::object()));
    p.validate();
    const double zfrac = get_number(job, "zfrac", 1.0);
    const TwoModeMoments m = moments_general(p, zfrac);
    const int n_max = job.contains("n_max") ? job.at("n_max").get<int>() : pnd_truncation(m.b_s, m.b_a);
    const JointPND d = pnd_auto(m, p, true, n_max);
    ScanResult r;
    r.columns = {"n_s", "n_a", "pnd.p"};
    for (int s = 0; s <= n_max; ++s)
        for (int a = 0; a <= n_max; ++a) r.rows.push_back({double(s), double(a), d.probs(s, a)});
    r.errors.assign(r.rows.size(), std::string());
    r.metadata = {{"code_version", kCodeVersion},
                  {"kind", "pnd"},
                  {"params", params_to_json(p)},
                  {"zfrac", zfrac},
                  {"regime", regime_name(regime_of(p.epsilon))},
                  {"moments", {{"b_s", m.b_s}, {"b_a", m.b_a}, {"d_sa_re", m.d_sa.real()}, {"d_sa_im", m.d_sa.imag()}}},
                  {"n_max", n_max},
                  {"tail_mass", d.tail_mass},
                  {"rows", r.rows.size()},
                  {"errors", 0}};
    return r;
}

ScanResult run_quasi_job(const json& job) {
    const RamanParams p = params_from_json(job.value("params", json::object()));
    p.validate();
    const double zfrac = get_number(job, "zfrac", 1.0);
    const double s = get_number(job, "s", 0.0);
    const int points = job.value("points", 101);
    const std::string policy = job.value("divergence", std::string("report"));
    if (policy != "report" && policy != "throw") throw ContractError("divergence must be report or throw");
    const TwoModeMoments m = moments_general(p, zfrac);
    const int n_max = job.contains("n_max") ? job.at("n_max").get<int>() : pnd_truncation(m.b_s, m.b_a);
    const JointPND d = pnd_auto(m, p, true, n_max);
    const QuasiDistribution q = quasi_distribution(d, s, default_quasi_grid(m.b_s, m.b_a, points),
                                                   policy == "report" ? DivergencePolicy::Report : DivergencePolicy::Throw);
    ScanResult r;
    r.columns = {"w_s", "w_a", "quasi.value"};
    for (std::size_t i = 0; i < q.grid.w_s.size(); ++i)
        for (std::size_t j = 0; j < q.grid.w_a.size(); ++j)
            r.rows.push_back({q.grid.w_s[i], q.grid.w_a[j], q.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
    r.errors.assign(r.rows.size(), std::string());
    const NegativeRegion neg = q.negative_region();
    if (q.divergent) r.warnings.push_back("truncated quasi-distribution series is divergent; values are truncated sums");
    r.metadata = {{"code_version", kCodeVersion},
                  {"kind", "quasi"},
                  {"params", params_to_json(p)},
                  {"zfrac", zfrac},
                  {"s", s},
                  {"regime", regime_name(regime_of(p.epsilon))},
                  {"n_max", n_max},
                  {"tail_estimate", q.tail_estimate},
                  {"divergent", q.divergent},
                  {"negative_region",
                   {{"min_value", neg.min_value},
                    {"argmin_w_s", neg.argmin_w_s},
                    {"argmin_w_a", neg.argmin_w_a},
                    {"area_fraction", neg.area_fraction}}},
                  {"rows", r.rows.size()},
                  {"errors", 0}};
    return r;
}

}  // namespace

const std::vector<std::string>& figure_names() {
    static const std::vector<std::string> names = {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"};
    return names;
}

json figure_recipe(const std::string& name) {
    if (name == "fig2") return fig2_recipe();
    if (name == "fig3") return fig3_recipe();
    if (name == "fig4") return fig4_recipe();
    if (name == "fig5") return fig5_recipe();
    if (name == "fig6") return fig6_recipe();
    if (name == "fig7") return fig7_recipe();
    if (name == "fig8") return fig8_recipe();
    throw ContractError("unknown figure " + name);
}

std::vector<NamedResult> run_figure(const std::string& name, const json& recipe, int jobs) {
    if (!recipe.contains("jobs") || !recipe.at("jobs").is_object()) throw ContractError("figure recipe needs a jobs object");
    std::vector<NamedResult> out;
    for (const auto& [stem, job] : recipe.at("jobs").items()) {
        const std::string kind = job.value("kind", std::string("scan"));
        ScanResult r;
        if (kind == "scan") r = run_scan(ScanSpec::from_json(job), jobs);
        else if (kind == "pnd") r = run_pnd_job(job);
        else if (kind == "quasi") r = run_quasi_job(job);
        else throw ContractError("unknown job kind " + kind);
        r.metadata["figure"] = name;
        r.metadata["job"] = stem;
        out.push_back({stem, std::move(r)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Oracle verification

namespace {

json moments_json(const TwoModeMoments& m) {
    return {{"b_s", m.b_s}, {"b_a", m.b_a}, {"d_sa_re", m.d_sa.real()}, {"d_sa_im", m.d_sa.imag()}};
}

VerifyReport verify_lossless(const VerifyOptions& o) {
    VerifyReport rep;
    rep.subset = "lossless";
    rep.tolerance = o.tolerance.value_or(1e-5);
    // Sector basis n_S = n_A + n_V holds d(d+1)/2 states for per-mode cap d.
    int dim = 2;
    while ((dim + 1) * (dim + 2) / 2 <= o.max_basis) ++dim;
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> eps(0.2, 6.0);
    std::uniform_real_distribution<double> pump(0.0, 1.5);
    rep.details = {{"dim_per_mode", dim}, {"samples", json::array()}};
    for (int i = 0; i < o.samples; ++i) {
        RamanParams p;
        p.epsilon = eps(rng);
        p.pump_amp = pump(rng);
        json sample = {{"epsilon", p.epsilon}, {"pump_amp", p.pump_amp}};
        try {
            FockConfig cfg;
            cfg.params = p;
            cfg.dim_s = cfg.dim_a = cfg.dim_v = dim;
            cfg.max_basis = o.max_basis;
            cfg.tol = 1e-6;
            cfg.method = FockMethod::PureSectors;
            const FockState st = evolve(cfg);
            const TwoModeMoments om = extract_moments(st);
            const TwoModeMoments am = moments_lossless(p);
            const double dev = moment_deviation(om, am);
            rep.max_deviation = std::max(rep.max_deviation, dev);
            sample["deviation"] = dev;
            sample["leakage"] = st.leakage;
            sample["basis_size"] = st.basis_size;
        } catch (const ResourceError& e) {
            rep.complete = false;
            sample["error"] = std::string("resource: ") + e.what();
        } catch (const InconclusiveError& e) {
            rep.complete = false;
            sample["error"] = std::string("inconclusive: ") + e.what();
        }
        rep.details["samples"].push_back(sample);
    }
    rep.passed = rep.complete && rep.max_deviation <= rep.tolerance;
    return rep;
}

VerifyReport verify_thermal(const VerifyOptions& o) {
    VerifyReport rep;
    rep.subset = "thermal";
    rep.tolerance = o.tolerance.value_or(1e-6);
    RamanParams p;
    p.epsilon = 4.0;
    p.n_V = 0.5;
    p.pump_amp = kPi / (2.0 * std::sqrt(3.0));
    FockConfig cfg;
    cfg.params = p;
    cfg.dim_s = cfg.dim_a = cfg.dim_v = 40;
    cfg.max_basis = o.max_basis;
    cfg.method = FockMethod::PureSectors;
    try {
        const FockState st = evolve(cfg);
        const TwoModeMoments om = extract_moments(st);
        const TwoModeMoments am = moments_thermal(p);
        rep.max_deviation = moment_deviation(om, am);
        rep.details = {{"oracle", moments_json(om)},
                       {"closed_form", moments_json(am)},
                       {"leakage", st.leakage},
                       {"initial_tail", st.initial_tail},
                       {"acceptance_target", {{"b_s", 17.0 / 18.0}, {"b_a", 10.0 / 9.0}, {"d_sa_re", -14.0 / 9.0}}}};
    } catch (const ResourceError& e) {
        rep.complete = false;
        rep.details = {{"error", std::string("resource: ") + e.what()}};
    }
    rep.passed = rep.complete && rep.max_deviation <= rep.tolerance;
    return rep;
}

VerifyReport verify_damped(const VerifyOptions& o) {
    VerifyReport rep;
    rep.subset = "damped";
    rep.tolerance = o.tolerance.value_or(0.02);
    RamanParams p;
    p.epsilon = 4.0;
    p.pump_amp = 20.0;
    p.gamma_n = 20.0;
    FockConfig cfg;
    cfg.params = p;
    // Sized for the transient peak (B_S ~ 1.4, B_A ~ 1.2) rather than the final state.
    cfg.dim_s = 19;
    cfg.dim_a = 16;
    cfg.dim_v = 9;
    cfg.max_basis = o.max_basis;
    cfg.method = FockMethod::DensityMatrix;
    cfg.tol = 1e-4;
    cfg.rk_tol = 1e-8;
    try {
        const FockState st = evolve(cfg);
        const TwoModeMoments om = extract_moments(st);
        const TwoModeMoments asym = moments_asymptotic(p.epsilon, p.n_T);
        rep.max_deviation = moment_deviation(om, asym);
        rep.details = {{"oracle", moments_json(om)},
                       {"asymptote", moments_json(asym)},
                       {"closed_form", moments_json(moments_general(p))},
                       {"closed_form_deviation", moment_deviation(om, moments_general(p))},
                       {"leakage", st.leakage},
                       {"basis_size", st.basis_size}};
    } catch (const ResourceError& e) {
        rep.complete = false;
        rep.details = {{"error", std::string("resource: ") + e.what()}};
    } catch (const InconclusiveError& e) {
        rep.complete = false;
        rep.details = {{"error", std::string("inconclusive: ") + e.what()}};
    }
    rep.passed = rep.complete && rep.max_deviation <= rep.tolerance;
    return rep;
}

}  // namespace

VerifyReport verify(const std::string& subset, const VerifyOptions& opts) {
    if (opts.samples < 1) throw ContractError("samples must be >= 1");
    if (subset == "lossless") return verify_lossless(opts);
    if (subset == "thermal") return verify_thermal(opts);
    if (subset == "damped") return verify_damped(opts);
    throw ContractError("unknown verify subset " + subset);
}

// ---------------------------------------------------------------------------
// Closed-form tables

namespace {

void append_report(ScanResult& r, const std::string& prefix, const MeasureReport& m) {
    const std::vector<std::pair<std::string, double>> fields = {
        {"g2", m.g2},         {"nrf", m.nrf}, {"lambda_sq", m.lambda_sq},      {"log_neg", m.log_neg},
        {"purity", m.purity}, {"tau", m.tau}, {"steer_s_to_a", m.steer_s_to_a}, {"steer_a_to_s", m.steer_a_to_s},
        {"bell", m.bell}};
    for (const auto& [k, v] : fields) {
        r.columns.push_back(prefix + "." + k);
        r.rows[0].push_back(v);
    }
}

void append_moments(ScanResult& r, const std::string& prefix, const TwoModeMoments& m) {
    for (const auto& [k, v] : std::vector<std::pair<std::string, double>>{
             {"b_s", m.b_s}, {"b_a", m.b_a}, {"d_sa_re", m.d_sa.real()}, {"d_sa_im", m.d_sa.imag()}}) {
        r.columns.push_back(prefix + "." + k);
        r.rows[0].push_back(v);
    }
}

ScanResult table_start(double epsilon, double n_T) {
    ScanResult r;
    r.columns = {"epsilon", "n_T"};
    r.rows = {{epsilon, n_T}};
    r.errors = {std::string()};
    return r;
}

}  // namespace

std::vector<NamedResult> report_tables(double epsilon, double n_T) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be finite and positive");
    if (!(n_T >= 0.0) || !std::isfinite(n_T)) throw DomainError("n_T must be finite and >= 0");
    std::vector<NamedResult> out;

    ScanResult bal = table_start(epsilon, 0.0);
    try {
        RamanParams p;
        p.epsilon = epsilon;
        p.pump_amp = balanced_pump_amplitudes(epsilon, 1).front().first;
        const TwoModeMoments m = moments_lossless(p);
        bal.columns.push_back("pump_amp");
        bal.rows[0].push_back(p.pump_amp);
        append_moments(bal, "moments", m);
        append_report(bal, "closed", balanced_point_report(epsilon));
        append_report(bal, "generic", measure_report(m, true));
    } catch (const std::exception& e) {
        bal.errors[0] = error_tag(e) + ": " + e.what();
    }
    bal.metadata = {{"code_version", kCodeVersion}, {"kind", "report"}, {"table", "balanced"}, {"epsilon", epsilon}};
    out.push_back({"report_balanced", std::move(bal)});

    ScanResult asy = table_start(epsilon, n_T);
    try {
        const TwoModeMoments m = moments_asymptotic(epsilon, n_T);
        append_moments(asy, "moments", m);
        append_report(asy, "closed", asymptotic_report(epsilon, n_T));
        append_report(asy, "generic", measure_report(m, true));
        asy.columns.push_back("closed.ratio");
        asy.rows[0].push_back(asymptotic_ratio(epsilon, n_T));
        asy.columns.push_back("generic.ratio");
        asy.rows[0].push_back(m.b_a / m.b_s);
    } catch (const std::exception& e) {
        asy.errors[0] = error_tag(e) + ": " + e.what();
    }
    asy.metadata = {{"code_version", kCodeVersion}, {"kind", "report"}, {"table", "asymptotic"},
                    {"epsilon", epsilon},           {"n_T", n_T}};
    out.push_back({"report_asymptotic", std::move(asy)});
    return out;
}

}  // namespace raman

#include "raman/config.hpp"

#include <fstream>
#include <sstream>

#include "raman/errors.hpp"

namespace raman {

json parse_config_text(const std::string& text) {
    try {
        return json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ContractError(std::string("config parse error: ") + e.what());
    }
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ContractError("override must look like key=value: " + assignment);
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ContractError("empty path component in override " + assignment);
        if (!node->is_object() && !node->is_null()) throw ContractError("override path crosses a non-object: " + key);
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

void apply_overrides(json& doc, const std::vector<std::string>& assignments) {
    for (const auto& a : assignments) apply_override(doc, a);
}

RamanParams params_from_json(const json& obj, RamanParams p) {
    if (obj.is_null()) return p;
    if (!obj.is_object()) throw ContractError("params must be an object");
    for (const auto& [k, v] : obj.items()) {
        if (!v.is_number()) throw ContractError("params." + k + " must be a number");
        const double x = v.get<double>();
        if (k == "epsilon") p.epsilon = x;
        else if (k == "pump_amp") p.pump_amp = x;
        else if (k == "gamma_n") p.gamma_n = x;
        else if (k == "n_V") p.n_V = x;
        else if (k == "n_T") p.n_T = x;
        else if (k == "phi_L") p.phi_L = x;
        else throw ContractError("unknown parameter params." + k);
    }
    return p;
}

json params_to_json(const RamanParams& p) {
    return json{{"epsilon", p.epsilon}, {"pump_amp", p.pump_amp}, {"gamma_n", p.gamma_n},
                {"n_V", p.n_V},         {"n_T", p.n_T},           {"phi_L", p.phi_L}};
}

}  // namespace raman

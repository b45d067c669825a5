#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "raman/core_model.hpp"

namespace raman {

using json = nlohmann::json;

// Reads a JSON document in which // and /* */ comments are allowed.
json load_config(const std::string& path);
json parse_config_text(const std::string& text);

// Applies "a.b.c=value"; value is parsed as JSON when possible, else kept as a string.
void apply_override(json& doc, const std::string& assignment);
void apply_overrides(json& doc, const std::vector<std::string>& assignments);

// Reads RamanParams fields present in obj on top of base.
RamanParams params_from_json(const json& obj, RamanParams base = {});
json params_to_json(const RamanParams& p);

}  // namespace raman

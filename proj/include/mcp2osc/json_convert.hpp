#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mcp2osc/osc_types.hpp"

namespace mcp2osc {

using nlohmann::json;

// --- typed form, used on the tool boundary ------------------------------
// {"type":"f","value":0.5}; bare scalars are accepted with type inference
// (integer -> i, fractional -> f, string -> s, bool -> T/F) plus a warning.
json arg_to_typed_json(const OscArgument& arg);
OscArgument arg_from_typed_json(const json& value, std::vector<std::string>* warnings);
json args_to_typed_json(const std::vector<OscArgument>& args);
std::vector<OscArgument> args_from_typed_json(const json& array,
                                              std::vector<std::string>* warnings);

// --- plain form, used in log lines ---------------------------------------
// Values only; the position's type-tag character recovers the type.
json arg_to_plain_json(const OscArgument& arg);
OscArgument arg_from_plain_json(char tag, const json& value);
json args_to_plain_json(const std::vector<OscArgument>& args);
std::vector<OscArgument> args_from_plain_json(const std::string& tags, const json& array);

} // namespace mcp2osc

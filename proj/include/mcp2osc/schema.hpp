#pragma once

#include <optional>
#include <string>

#include <json.hpp>

namespace mcp2osc {

// Validates a value against the JSON-Schema subset the tool contracts use:
// type (single or list), properties/required/additionalProperties, items,
// enum, minimum/maximum, minItems/maxItems, minLength. Returns a human-
// readable violation or nullopt when the value conforms.
std::optional<std::string> schema_violation(const nlohmann::json& schema,
                                            const nlohmann::json& value,
                                            const std::string& where = "arguments");

} // namespace mcp2osc

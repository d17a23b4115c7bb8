#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcp2osc/osc_types.hpp"

namespace mcp2osc {

struct ParameterSpec {
    std::optional<std::string> name;
    char type = 'f'; // one of i f s b
    std::optional<double> min, max;
    nlohmann::json default_value; // null when absent
    std::vector<std::string> enum_values;
};

struct PatternRecord {
    std::string address; // concrete or pattern; unique store key
    std::string description;
    std::vector<ParameterSpec> parameters;
    std::string category;
    std::vector<std::string> tags;
    std::string application;
    std::string created_at, updated_at; // ISO-8601, server-managed
};

nlohmann::json parameter_to_json(const ParameterSpec& p);
nlohmann::json record_to_json(const PatternRecord& r);
// Throws Error(InvalidRecord) naming the offending field.
ParameterSpec parameter_from_json(const nlohmann::json& j);
PatternRecord record_from_json(const nlohmann::json& j);

struct PatternFilter {
    std::optional<std::string> category;
    std::optional<std::string> tag;
    std::optional<std::string> application;
    std::optional<std::string> text;            // case-insensitive substring
    std::optional<std::string> address_pattern; // matched against record addresses
};

struct SaveOutcome {
    std::string address;
    bool inserted = false; // false -> updated existing
};

struct UpdateChanges {
    std::optional<std::string> description, category, application;
    std::optional<std::vector<std::string>> tags;
    std::optional<std::vector<ParameterSpec>> parameters;
    std::optional<double> min, max; // shorthand for the first parameter's range
    std::optional<std::string> new_address;
    std::optional<std::string> address_suffix;
};

struct ArgCheck {
    bool ok = true;
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
    std::optional<std::string> matched_address; // which stored record applied

    nlohmann::json to_json() const;
};

// Persistent CRUD store keyed by address. Single JSON document on disk,
// replaced atomically on every mutation.
class PatternStore {
public:
    explicit PatternStore(std::filesystem::path path);

    std::vector<SaveOutcome> save_patterns(const std::vector<PatternRecord>& records);
    std::vector<PatternRecord> list_patterns(const PatternFilter& filter = {}) const;
    PatternRecord update_pattern(const std::string& address, const UpdateChanges& changes);
    void delete_pattern(const std::string& address);

    // Never throws for bad args; violations are data. Unknown addresses are
    // ok-with-warning. Resolution: exact address, then the matching stored
    // pattern with the fewest wildcards.
    ArgCheck validate_args(const std::string& address,
                           const std::vector<OscArgument>& args) const;

    std::size_t size() const;
    std::optional<PatternRecord> find(const std::string& address) const;
    const std::filesystem::path& path() const { return path_; }

private:
    void load();
    void persist_locked() const;

    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::map<std::string, PatternRecord> records_;
};

} // namespace mcp2osc

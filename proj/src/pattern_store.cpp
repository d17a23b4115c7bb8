#include "mcp2osc/pattern_store.hpp"

#include "mcp2osc/address.hpp"
#include "mcp2osc/codec.hpp"
#include "mcp2osc/error.hpp"
#include "mcp2osc/util.hpp"

#include <algorithm>
#include <fstream>

namespace mcp2osc {

using nlohmann::json;

namespace {

constexpr int kStoreVersion = 1;

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return s;
}

bool contains_ci(const std::string& haystack, const std::string& needle)
{
    return lower(haystack).find(lower(needle)) != std::string::npos;
}

void check_record(const PatternRecord& r)
{
    auto check = validate_address(r.address);
    if (check.invalid())
        raise(ErrorKind::InvalidRecord, "address '" + r.address + "': " + check.reason);
    if (check.pattern()) {
        // stored patterns must at least be well-formed for later matching
        try {
            (void)AddressPattern::parse(r.address);
        } catch (const Error& e) {
            raise(ErrorKind::InvalidRecord, "address '" + r.address + "': " + e.message());
        }
    }
    for (std::size_t i = 0; i < r.parameters.size(); ++i) {
        const auto& p = r.parameters[i];
        std::string where = "parameter " + std::to_string(i) + " of '" + r.address + "'";
        if (std::string("ifsb").find(p.type) == std::string::npos)
            raise(ErrorKind::InvalidRecord,
                  where + ": type must be one of i f s b, got '" + std::string(1, p.type) + "'");
        if (p.min && p.max && *p.min > *p.max)
            raise(ErrorKind::InvalidRecord, where + ": min " + std::to_string(*p.min) +
                                                " exceeds max " + std::to_string(*p.max));
        if (p.min && p.max && p.default_value.is_number()) {
            double d = p.default_value.get<double>();
            if (d < *p.min || d > *p.max)
                raise(ErrorKind::InvalidRecord, where + ": default outside [min,max]");
        }
    }
}

std::size_t wildcard_count(const std::string& s)
{
    return std::size_t(std::count_if(
        s.begin(), s.end(), [](char c) { return std::string_view("?*[]{}").find(c) != std::string_view::npos; }));
}

} // namespace

json parameter_to_json(const ParameterSpec& p)
{
    json j = json::object();
    if (p.name)
        j["name"] = *p.name;
    j["type"] = std::string(1, p.type);
    if (p.min)
        j["min"] = *p.min;
    if (p.max)
        j["max"] = *p.max;
    if (!p.default_value.is_null())
        j["default"] = p.default_value;
    if (!p.enum_values.empty())
        j["enum_values"] = p.enum_values;
    return j;
}

ParameterSpec parameter_from_json(const json& j)
{
    if (!j.is_object())
        raise(ErrorKind::InvalidRecord, "parameter must be an object, got " + j.dump());
    ParameterSpec p;
    if (j.contains("name")) {
        if (!j["name"].is_string())
            raise(ErrorKind::InvalidRecord, "parameter name must be a string");
        p.name = j["name"].get<std::string>();
    }
    if (j.contains("type")) {
        if (!j["type"].is_string() || j["type"].get<std::string>().size() != 1)
            raise(ErrorKind::InvalidRecord, "parameter type must be a 1-char string");
        p.type = j["type"].get<std::string>()[0];
    }
    if (j.contains("min")) {
        if (!j["min"].is_number())
            raise(ErrorKind::InvalidRecord, "parameter min must be a number");
        p.min = j["min"].get<double>();
    }
    if (j.contains("max")) {
        if (!j["max"].is_number())
            raise(ErrorKind::InvalidRecord, "parameter max must be a number");
        p.max = j["max"].get<double>();
    }
    if (j.contains("default"))
        p.default_value = j["default"];
    if (j.contains("enum_values")) {
        if (!j["enum_values"].is_array())
            raise(ErrorKind::InvalidRecord, "enum_values must be an array of strings");
        for (const auto& v : j["enum_values"]) {
            if (!v.is_string())
                raise(ErrorKind::InvalidRecord, "enum_values must be an array of strings");
            p.enum_values.push_back(v.get<std::string>());
        }
    }
    return p;
}

json record_to_json(const PatternRecord& r)
{
    json j = json::object();
    j["address"] = r.address;
    j["description"] = r.description;
    j["parameters"] = json::array();
    for (const auto& p : r.parameters)
        j["parameters"].push_back(parameter_to_json(p));
    j["category"] = r.category;
    j["tags"] = r.tags;
    j["application"] = r.application;
    j["created_at"] = r.created_at;
    j["updated_at"] = r.updated_at;
    return j;
}

PatternRecord record_from_json(const json& j)
{
    if (!j.is_object())
        raise(ErrorKind::InvalidRecord, "record must be an object, got " + j.dump());
    if (!j.contains("address") || !j["address"].is_string())
        raise(ErrorKind::InvalidRecord, "record needs a string \"address\"");
    PatternRecord r;
    r.address = j["address"].get<std::string>();
    if (j.contains("description")) {
        if (!j["description"].is_string())
            raise(ErrorKind::InvalidRecord, "description must be a string");
        r.description = j["description"].get<std::string>();
    }
    if (j.contains("parameters")) {
        if (!j["parameters"].is_array())
            raise(ErrorKind::InvalidRecord, "parameters must be an array");
        for (const auto& p : j["parameters"])
            r.parameters.push_back(parameter_from_json(p));
    }
    if (j.contains("category")) {
        if (!j["category"].is_string())
            raise(ErrorKind::InvalidRecord, "category must be a string");
        r.category = j["category"].get<std::string>();
    }
    if (j.contains("tags")) {
        if (!j["tags"].is_array())
            raise(ErrorKind::InvalidRecord, "tags must be an array of strings");
        for (const auto& t : j["tags"]) {
            if (!t.is_string())
                raise(ErrorKind::InvalidRecord, "tags must be an array of strings");
            r.tags.push_back(t.get<std::string>());
        }
    }
    if (j.contains("application")) {
        if (!j["application"].is_string())
            raise(ErrorKind::InvalidRecord, "application must be a string");
        r.application = j["application"].get<std::string>();
    }
    r.created_at = j.value("created_at", "");
    r.updated_at = j.value("updated_at", "");
    return r;
}

json ArgCheck::to_json() const
{
    json j = json::object();
    j["ok"] = ok;
    j["violations"] = violations;
    j["warnings"] = warnings;
    if (matched_address)
        j["matched_address"] = *matched_address;
    return j;
}

PatternStore::PatternStore(std::filesystem::path path) : path_(std::move(path))
{
    load();
}

void PatternStore::load()
{
    std::ifstream in(path_, std::ios::binary);
    if (!in)
        return; // empty store
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("patterns"))
        raise(ErrorKind::IoError, "pattern store file " + path_.string() + " is not parseable");
    for (const auto& rj : doc["patterns"]) {
        auto r = record_from_json(rj);
        records_[r.address] = std::move(r);
    }
}

void PatternStore::persist_locked() const
{
    json doc = json::object();
    doc["version"] = kStoreVersion;
    doc["patterns"] = json::array();
    for (const auto& [addr, r] : records_)
        doc["patterns"].push_back(record_to_json(r));
    atomic_write_file(path_, doc.dump(2) + "\n");
}

std::vector<SaveOutcome> PatternStore::save_patterns(const std::vector<PatternRecord>& records)
{
    std::lock_guard lock(mutex_);
    for (const auto& r : records)
        check_record(r);
    std::vector<SaveOutcome> outcomes;
    auto now = format_iso8601_ms(WallClock::now());
    for (const auto& r : records) {
        auto it = records_.find(r.address);
        PatternRecord stored = r;
        if (it == records_.end()) {
            stored.created_at = r.created_at.empty() ? now : r.created_at;
            outcomes.push_back({r.address, true});
        } else {
            stored.created_at = it->second.created_at;
            outcomes.push_back({r.address, false});
        }
        stored.updated_at = now;
        records_[r.address] = std::move(stored);
    }
    persist_locked();
    return outcomes;
}

std::vector<PatternRecord> PatternStore::list_patterns(const PatternFilter& filter) const
{
    std::optional<AddressPattern> addr_pattern;
    if (filter.address_pattern)
        addr_pattern = AddressPattern::parse(*filter.address_pattern);

    std::lock_guard lock(mutex_);
    std::vector<PatternRecord> out;
    for (const auto& [addr, r] : records_) {
        if (filter.category && r.category != *filter.category)
            continue;
        if (filter.application && r.application != *filter.application)
            continue;
        if (filter.tag &&
            std::find(r.tags.begin(), r.tags.end(), *filter.tag) == r.tags.end())
            continue;
        if (filter.text) {
            bool hit = contains_ci(r.address, *filter.text) ||
                       contains_ci(r.description, *filter.text);
            for (const auto& t : r.tags)
                hit = hit || contains_ci(t, *filter.text);
            if (!hit)
                continue;
        }
        if (addr_pattern && !match(*addr_pattern, r.address))
            continue;
        out.push_back(r);
    }
    std::stable_sort(out.begin(), out.end(), [](const PatternRecord& a, const PatternRecord& b) {
        if (a.category != b.category)
            return a.category < b.category;
        return a.address < b.address;
    });
    return out;
}

PatternRecord PatternStore::update_pattern(const std::string& address,
                                           const UpdateChanges& changes)
{
    std::lock_guard lock(mutex_);
    auto it = records_.find(address);
    if (it == records_.end())
        raise(ErrorKind::NotFound, "no stored pattern for '" + address + "'");

    PatternRecord updated = it->second;
    if (changes.description)
        updated.description = *changes.description;
    if (changes.category)
        updated.category = *changes.category;
    if (changes.application)
        updated.application = *changes.application;
    if (changes.tags)
        updated.tags = *changes.tags;
    if (changes.parameters)
        updated.parameters = *changes.parameters;
    if (changes.min || changes.max) {
        if (updated.parameters.empty())
            updated.parameters.push_back(ParameterSpec{});
        if (changes.min)
            updated.parameters[0].min = *changes.min;
        if (changes.max)
            updated.parameters[0].max = *changes.max;
    }
    if (changes.new_address)
        updated.address = *changes.new_address;
    if (changes.address_suffix) {
        std::string suffix = *changes.address_suffix;
        if (suffix.empty())
            raise(ErrorKind::InvalidRecord, "address_suffix is empty");
        if (suffix[0] != '/')
            suffix.insert(suffix.begin(), '/');
        updated.address += suffix;
    }

    if (updated.address != address && records_.count(updated.address))
        raise(ErrorKind::Collision,
              "a pattern with address '" + updated.address + "' already exists");
    check_record(updated);
    updated.updated_at = format_iso8601_ms(WallClock::now());

    records_.erase(it);
    records_[updated.address] = updated;
    persist_locked();
    return updated;
}

void PatternStore::delete_pattern(const std::string& address)
{
    std::lock_guard lock(mutex_);
    auto it = records_.find(address);
    if (it == records_.end())
        raise(ErrorKind::NotFound, "no stored pattern for '" + address + "'");
    records_.erase(it);
    persist_locked();
}

ArgCheck PatternStore::validate_args(const std::string& address,
                                     const std::vector<OscArgument>& args) const
{
    ArgCheck out;

    // encodability first, so an "ok" verdict always encodes cleanly
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (const auto* s = std::get_if<std::string>(&args[i])) {
            if (s->find('\0') != std::string::npos) {
                out.violations.push_back("argument " + std::to_string(i) +
                                         ": string contains NUL");
            }
        } else if (const auto* b = std::get_if<OscBlob>(&args[i])) {
            if (b->size() > kMaxBlobBytes)
                out.violations.push_back("argument " + std::to_string(i) + ": blob of " +
                                         std::to_string(b->size()) + " bytes exceeds " +
                                         std::to_string(kMaxBlobBytes));
        }
    }

    const PatternRecord* record = nullptr;
    {
        std::lock_guard lock(mutex_);
        auto it = records_.find(address);
        if (it != records_.end()) {
            record = &it->second;
        } else if (validate_address(address).concrete()) {
            // most specific matching stored pattern: fewest wildcards wins
            std::size_t best_score = SIZE_MAX;
            for (const auto& [addr, r] : records_) {
                if (validate_address(addr).pattern()) {
                    try {
                        if (!match(addr, address))
                            continue;
                    } catch (const Error&) {
                        continue;
                    }
                    auto score = wildcard_count(addr);
                    if (score < best_score ||
                        (record && score == best_score && addr.size() > record->address.size())) {
                        best_score = score;
                        record = &r;
                    }
                }
            }
        }
        if (!record) {
            out.warnings.push_back("no stored pattern for '" + address + "'");
            out.ok = out.violations.empty();
            return out;
        }
        out.matched_address = record->address;

        const auto& params = record->parameters;
        if (params.empty()) {
            if (!args.empty())
                out.warnings.push_back("'" + record->address +
                                       "' declares no parameters; arguments not checked");
            out.ok = out.violations.empty();
            return out;
        }
        if (args.size() != params.size())
            out.violations.push_back("arity mismatch: got " + std::to_string(args.size()) +
                                     " argument(s), expected " + std::to_string(params.size()));

        std::size_t n = std::min(args.size(), params.size());
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = params[i];
            char got = type_tag(args[i]);
            std::string pos = "argument " + std::to_string(i);

            if (got == 's' && (p.type == 'i' || p.type == 'f')) {
                // word value like "/volume low": mapping is the receiver's job
                out.warnings.push_back(pos + ": word value \"" +
                                       std::get<std::string>(args[i]) + "\" sent where '" +
                                       std::string(1, p.type) +
                                       "' is declared; the receiver must map it");
                continue;
            }
            if (got != p.type) {
                out.violations.push_back(pos + ": type mismatch, got '" + std::string(1, got) +
                                         "', expected '" + std::string(1, p.type) + "'");
                continue;
            }
            if (p.type == 'i' || p.type == 'f') {
                double v = p.type == 'i' ? double(std::get<std::int32_t>(args[i]))
                                         : double(std::get<float>(args[i]));
                if (p.min && v < *p.min)
                    out.violations.push_back(pos + ": value " + std::to_string(v) +
                                             " below minimum " + std::to_string(*p.min));
                if (p.max && v > *p.max)
                    out.violations.push_back(pos + ": value " + std::to_string(v) +
                                             " above maximum " + std::to_string(*p.max));
            } else if (p.type == 's' && !p.enum_values.empty()) {
                const auto& s = std::get<std::string>(args[i]);
                if (std::find(p.enum_values.begin(), p.enum_values.end(), s) ==
                    p.enum_values.end())
                    out.violations.push_back(pos + ": \"" + s + "\" is not one of the allowed values");
            }
        }
    }
    out.ok = out.violations.empty();
    return out;
}

std::size_t PatternStore::size() const
{
    std::lock_guard lock(mutex_);
    return records_.size();
}

std::optional<PatternRecord> PatternStore::find(const std::string& address) const
{
    std::lock_guard lock(mutex_);
    auto it = records_.find(address);
    if (it == records_.end())
        return std::nullopt;
    return it->second;
}

} // namespace mcp2osc

#include "mcp2osc/message_log.hpp"

#include "mcp2osc/address.hpp"
#include "mcp2osc/error.hpp"
#include "mcp2osc/json_convert.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace mcp2osc {

const char* to_string(Direction d)
{
    return d == Direction::In ? "in" : "out";
}

namespace {

void flatten(const OscPacket& packet, std::vector<LogEntry>& out, const LogEntry& proto)
{
    if (packet.is_message()) {
        LogEntry e = proto;
        e.address = packet.message().address;
        e.args = packet.message().args;
        out.push_back(std::move(e));
        return;
    }
    const auto& b = packet.bundle();
    if (b.elements.empty()) {
        LogEntry e = proto;
        e.address = "#bundle";
        out.push_back(std::move(e));
        return;
    }
    for (const auto& el : b.elements)
        flatten(el, out, proto);
}

} // namespace

std::vector<LogEntry> entries_for_packet(const OscPacket& packet, Direction dir,
                                         const std::string& endpoint,
                                         WallClock::time_point wall, std::uint64_t mono_ns)
{
    LogEntry proto;
    proto.direction = dir;
    proto.wall_time = wall;
    proto.mono_ns = mono_ns;
    proto.endpoint = endpoint;
    std::vector<LogEntry> out;
    flatten(packet, out, proto);
    return out;
}

json log_entry_to_json(const LogEntry& entry)
{
    json j = json::object();
    j["seq"] = entry.seq;
    j["dir"] = to_string(entry.direction);
    j["t"] = format_iso8601_ms(entry.wall_time);
    j["mono"] = entry.mono_ns;
    j["ep"] = entry.endpoint;
    j["addr"] = entry.address;
    j["tags"] = type_tags(entry.args);
    j["args"] = args_to_plain_json(entry.args);
    if (!entry.decode_error.empty())
        j["err"] = entry.decode_error;
    return j;
}

std::optional<LogEntry> log_entry_from_json(const json& j)
{
    try {
        LogEntry e;
        e.seq = j.at("seq").get<std::uint64_t>();
        std::string dir = j.at("dir").get<std::string>();
        if (dir != "in" && dir != "out")
            return std::nullopt;
        e.direction = dir == "in" ? Direction::In : Direction::Out;
        auto wall = parse_iso8601_ms(j.at("t").get<std::string>());
        if (!wall)
            return std::nullopt;
        e.wall_time = *wall;
        e.mono_ns = j.at("mono").get<std::uint64_t>();
        e.endpoint = j.at("ep").get<std::string>();
        e.address = j.at("addr").get<std::string>();
        e.args = args_from_plain_json(j.at("tags").get<std::string>(), j.at("args"));
        e.decode_error = j.value("err", "");
        return e;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

json StatsSummary::to_json() const
{
    json j = json::object();
    j["total"] = total;
    j["window_s"] = window_s;
    j["per_address"] = json::object();
    for (const auto& [addr, n] : per_address)
        j["per_address"][addr] = n;
    j["sources"] = sources;
    j["first"] = first ? json(format_iso8601_ms(*first)) : json();
    j["last"] = last ? json(format_iso8601_ms(*last)) : json();
    j["rate"] = rate;
    return j;
}

MessageLog::MessageLog(Config config) : config_(std::move(config))
{
    load_existing();
    file_.open(config_.path, std::ios::app | std::ios::binary);
    if (!file_)
        degraded_ = true;
    std::error_code ec;
    auto sz = std::filesystem::file_size(config_.path, ec);
    file_bytes_ = ec ? 0 : sz;
}

MessageLog::~MessageLog() = default;

void MessageLog::load_existing()
{
    std::ifstream in(config_.path, std::ios::binary);
    if (!in)
        return;
    std::string line;
    while (std::getline(in, line)) {
        if (in.eof())
            break; // no trailing '\n': a torn final record is treated as absent
        if (line.empty())
            continue;
        auto parsed = json::parse(line, nullptr, false);
        if (parsed.is_discarded())
            continue;
        auto entry = log_entry_from_json(parsed);
        if (!entry)
            continue;
        seq_ = std::max(seq_, entry->seq);
        mono_high_water_ = std::max(mono_high_water_, entry->mono_ns);
        if (entry->direction == Direction::In)
            ++count_in_;
        else
            ++count_out_;
        if (!entry->decode_error.empty())
            ++count_decode_errors_;
        ring_.push_back(std::move(*entry));
        if (ring_.size() > config_.ring_capacity)
            ring_.pop_front();
    }
}

std::uint64_t MessageLog::append(LogEntry entry)
{
    std::lock_guard lock(mutex_);
    entry.seq = ++seq_;
    if (entry.wall_time == WallClock::time_point{})
        entry.wall_time = WallClock::now();
    // ms precision in the file; keep memory identical so replay is exact
    entry.wall_time = std::chrono::floor<std::chrono::milliseconds>(entry.wall_time);
    if (entry.mono_ns == 0)
        entry.mono_ns = std::uint64_t(
            std::chrono::duration_cast<std::chrono::nanoseconds>(MonoClock::now().time_since_epoch())
                .count());
    entry.mono_ns = std::max(entry.mono_ns, mono_high_water_);
    mono_high_water_ = entry.mono_ns;

    std::string line = log_entry_to_json(entry).dump();

    if (entry.direction == Direction::In)
        ++count_in_;
    else
        ++count_out_;
    if (!entry.decode_error.empty())
        ++count_decode_errors_;

    if (file_) {
        file_ << line << '\n';
        file_.flush();
        if (file_) {
            file_bytes_ += line.size() + 1;
        } else {
            degraded_ = true; // entry still lives in the ring
        }
    } else {
        degraded_ = true;
    }

    if (file_bytes_ >= config_.rotate_bytes)
        rotate_locked();

    ring_.push_back(entry);
    if (ring_.size() > config_.ring_capacity)
        ring_.pop_front();

    if (observer_)
        observer_(entry, line);
    return entry.seq;
}

void MessageLog::rotate_locked()
{
    file_.close();
    auto stamp = format_iso8601_ms(WallClock::now());
    for (char& c : stamp)
        if (c == ':' || c == '.')
            c = '-';
    auto rotated = config_.path;
    rotated.replace_extension();
    rotated += "-" + stamp + config_.path.extension().string();
    std::error_code ec;
    std::filesystem::rename(config_.path, rotated, ec);
    if (ec)
        degraded_ = true;
    file_.open(config_.path, std::ios::trunc | std::ios::binary);
    if (!file_)
        degraded_ = true;
    file_bytes_ = 0;
}

std::vector<LogEntry> MessageLog::query_window(double window_s,
                                               const std::optional<std::string>& address_filter,
                                               std::optional<Direction> direction) const
{
    std::optional<AddressPattern> pattern;
    if (address_filter)
        pattern = AddressPattern::parse(*address_filter);

    auto cutoff = WallClock::now() - std::chrono::duration_cast<WallClock::duration>(
                                         std::chrono::duration<double>(window_s));
    std::lock_guard lock(mutex_);
    std::vector<LogEntry> out;
    for (const auto& e : ring_) {
        if (e.wall_time < cutoff)
            continue;
        if (direction && e.direction != *direction)
            continue;
        if (pattern) {
            if (e.address.empty() || e.address[0] != '/')
                continue;
            if (!match(*pattern, e.address))
                continue;
        }
        out.push_back(e);
    }
    return out;
}

StatsSummary MessageLog::stats(double window_s) const
{
    auto entries = query_window(window_s);
    StatsSummary s;
    s.window_s = window_s;
    s.total = entries.size();
    std::set<std::string> sources;
    for (const auto& e : entries) {
        std::string key = e.address.empty() ? "<decode-error>" : e.address;
        ++s.per_address[key];
        sources.insert(e.endpoint);
        if (!s.first || e.wall_time < *s.first)
            s.first = e.wall_time;
        if (!s.last || e.wall_time > *s.last)
            s.last = e.wall_time;
    }
    s.sources.assign(sources.begin(), sources.end());
    s.rate = window_s > 0 ? double(s.total) / window_s : 0.0;
    return s;
}

namespace {

std::string csv_field(const std::string& value)
{
    if (value.find_first_of(",\"\n\r") == std::string::npos)
        return value;
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"')
            quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

} // namespace

std::string MessageLog::export_window(double window_s, ExportFormat format) const
{
    auto entries = query_window(window_s);
    std::ostringstream out;
    if (format == ExportFormat::Jsonl) {
        for (const auto& e : entries)
            out << log_entry_to_json(e).dump() << '\n';
        return out.str();
    }
    out << "seq,direction,wall_time,endpoint,address,args\n";
    for (const auto& e : entries) {
        std::string args;
        for (std::size_t i = 0; i < e.args.size(); ++i) {
            if (i)
                args += ' ';
            args += to_display(e.args[i]);
        }
        out << e.seq << ',' << to_string(e.direction) << ',' << format_iso8601_ms(e.wall_time)
            << ',' << csv_field(e.endpoint) << ',' << csv_field(e.address) << ','
            << csv_field(args) << '\n';
    }
    return out.str();
}

std::uint64_t MessageLog::count(Direction d) const
{
    std::lock_guard lock(mutex_);
    return d == Direction::In ? count_in_ : count_out_;
}

std::uint64_t MessageLog::decode_error_count() const
{
    std::lock_guard lock(mutex_);
    return count_decode_errors_;
}

std::uint64_t MessageLog::file_size_bytes() const
{
    std::lock_guard lock(mutex_);
    return file_bytes_;
}

bool MessageLog::degraded() const
{
    std::lock_guard lock(mutex_);
    return degraded_;
}

std::uint64_t MessageLog::last_seq() const
{
    std::lock_guard lock(mutex_);
    return seq_;
}

void MessageLog::set_observer(std::function<void(const LogEntry&, const std::string&)> observer)
{
    std::lock_guard lock(mutex_);
    observer_ = std::move(observer);
}

std::vector<LogEntry> MessageLog::tail() const
{
    std::lock_guard lock(mutex_);
    return {ring_.begin(), ring_.end()};
}

} // namespace mcp2osc

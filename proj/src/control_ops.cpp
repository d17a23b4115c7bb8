#include "mcp2osc/control_ops.hpp"

#include "mcp2osc/address.hpp"
#include "mcp2osc/codec.hpp"
#include "mcp2osc/error.hpp"
#include "mcp2osc/json_convert.hpp"

#include <httplib.h>

#include <cmath>
#include <condition_variable>
#include <random>

namespace mcp2osc {

using nlohmann::json;

json BatchReport::to_json() const
{
    json j = json::object();
    j["messages"] = messages;
    j["datagrams"] = datagrams;
    j["total_bytes"] = total_bytes;
    j["warnings"] = warnings;
    return j;
}

json StreamReport::to_json() const
{
    json j = json::object();
    j["stream_id"] = id;
    j["address"] = address;
    j["messages_sent"] = messages_sent;
    j["planned_messages"] = planned;
    j["completed"] = completed;
    j["stopped_early"] = stopped_early;
    j["elapsed_s"] = elapsed_s;
    return j;
}

json TestReport::to_json() const
{
    json j = json::object();
    j["outcome"] = pass ? "pass" : "fail";
    j["probe_address"] = probe_address;
    j["nonce"] = nonce;
    j["round_trip_ms"] = round_trip_ms;
    j["sent_at"] = sent_at;
    if (!received_at.empty())
        j["received_at"] = received_at;
    if (!failure_reason.empty())
        j["failure_reason"] = failure_reason;
    return j;
}

json NamespaceNode::to_json() const
{
    json j = json::object();
    j["full_path"] = full_path;
    if (description)
        j["description"] = *description;
    if (type_signature)
        j["type_signature"] = *type_signature;
    if (!current_value.is_null())
        j["current_value"] = current_value;
    if (access)
        j["access"] = *access;
    if (return_type)
        j["return_type"] = *return_type;
    j["children"] = json::object();
    for (const auto& [name, child] : children)
        j["children"][name] = child.to_json();
    return j;
}

std::size_t NamespaceNode::leaf_count() const
{
    if (children.empty())
        return 1;
    std::size_t n = 0;
    for (const auto& [name, child] : children)
        n += child.leaf_count();
    return n;
}

std::optional<StreamShape> stream_shape_from_string(const std::string& name)
{
    if (name == "linear")
        return StreamShape::Linear;
    if (name == "exponential")
        return StreamShape::Exponential;
    if (name == "ease-in-out")
        return StreamShape::EaseInOut;
    return std::nullopt;
}

// ---------------------------------------------------------------------------

struct ControlOps::StreamState {
    StreamSpec spec;
    int id = 0;
    std::uint64_t planned = 0;
    std::atomic<std::uint64_t> sent{0};
    std::atomic<bool> stop{false};
    std::atomic<bool> finished{false};
    std::atomic<bool> completed{false};
    MonoClock::time_point started;
    std::atomic<double> elapsed_s{0};
    std::thread worker;
    std::mutex join_mutex;
};

ControlOps::ControlOps(Transport& transport, PatternStore& patterns)
    : transport_(transport), patterns_(patterns)
{
}

ControlOps::~ControlOps()
{
    stop_all_streams();
}

BatchReport ControlOps::send_batch(const std::vector<OscMessage>& messages,
                                   const BatchOptions& options)
{
    BatchReport report;
    report.messages = messages.size();

    // structural validity is non-negotiable; store checks can be overridden
    std::vector<std::string> violations;
    std::vector<std::vector<std::uint8_t>> encoded;
    encoded.reserve(messages.size());
    for (std::size_t i = 0; i < messages.size(); ++i) {
        encoded.push_back(encode_message(messages[i])); // throws on invalid message
        auto check = patterns_.validate_args(messages[i].address, messages[i].args);
        for (const auto& v : check.violations)
            violations.push_back("message " + std::to_string(i) + " (" + messages[i].address +
                                 "): " + v);
        for (const auto& w : check.warnings)
            report.warnings.push_back("message " + std::to_string(i) + " (" +
                                      messages[i].address + "): " + w);
    }
    if (!violations.empty()) {
        if (!options.override_validation) {
            std::string joined;
            for (const auto& v : violations) {
                if (!joined.empty())
                    joined += "; ";
                joined += v;
            }
            raise(ErrorKind::ValidationRefused, joined + " (set override_validation to send anyway)");
        }
        for (const auto& v : violations)
            report.warnings.push_back("overridden violation: " + v);
    }

    if (options.requested_timetag && !options.requested_timetag->is_immediate())
        report.warnings.push_back(
            "timetags are not scheduled; the bundle is dispatched immediately with the IMMEDIATE tag");

    if (messages.empty())
        return report;

    const std::size_t max = transport_.config().max_datagram;

    if (!options.as_bundle) {
        for (const auto& m : messages) {
            auto r = transport_.send(OscPacket(m), options.dest);
            ++report.datagrams;
            report.total_bytes += r.bytes;
        }
        return report;
    }

    constexpr std::size_t kBundleHeader = 16; // "#bundle\0" + timetag
    OscBundle current;
    std::size_t current_size = kBundleHeader;
    auto flush = [&] {
        if (current.elements.empty())
            return;
        auto r = transport_.send(OscPacket(current), options.dest);
        ++report.datagrams;
        report.total_bytes += r.bytes;
        current.elements.clear();
        current_size = kBundleHeader;
    };

    for (std::size_t i = 0; i < messages.size(); ++i) {
        std::size_t element = 4 + encoded[i].size();
        if (kBundleHeader + element > max)
            raise(ErrorKind::DatagramTooLarge,
                  "message " + std::to_string(i) + " (" + messages[i].address + ") needs " +
                      std::to_string(kBundleHeader + element) +
                      " bytes as a bundle element, limit " + std::to_string(max));
        if (current_size + element > max)
            flush();
        current.elements.emplace_back(messages[i]);
        current_size += element;
    }
    flush();
    return report;
}

std::uint64_t ControlOps::planned_stream_messages(const StreamSpec& spec)
{
    return std::uint64_t(std::floor(spec.rate_hz * spec.duration_s + 1e-9)) + 1;
}

float ControlOps::stream_value(const StreamSpec& spec, std::uint64_t k, std::uint64_t n)
{
    if (n <= 1 || k + 1 >= n)
        return spec.end_value; // the final message carries exactly end_value
    double u = double(k) / double(n - 1);
    double shaped = u;
    switch (spec.shape) {
    case StreamShape::Linear: shaped = u; break;
    case StreamShape::Exponential: // normalized exp ramp, curvature k=4
        shaped = (std::exp(4.0 * u) - 1.0) / (std::exp(4.0) - 1.0);
        break;
    case StreamShape::EaseInOut: shaped = u * u * (3.0 - 2.0 * u); break;
    }
    return float(spec.start_value + (double(spec.end_value) - spec.start_value) * shaped);
}

int ControlOps::start_stream(const StreamSpec& spec)
{
    if (!validate_address(spec.address).concrete())
        raise(ErrorKind::InvalidSpec, "stream address '" + spec.address +
                                          "' must be a concrete address");
    if (!(spec.duration_s > 0) || spec.duration_s > 600)
        raise(ErrorKind::InvalidSpec, "duration_s must be in (0, 600]");
    if (spec.rate_hz < 1 || spec.rate_hz > 200)
        raise(ErrorKind::InvalidSpec, "rate_hz must be in [1, 200]");

    auto state = std::make_shared<StreamState>();
    state->spec = spec;
    state->planned = planned_stream_messages(spec);

    {
        std::lock_guard lock(streams_mutex_);
        std::size_t active = 0;
        for (const auto& [id, s] : streams_)
            if (!s->finished)
                ++active;
        if (active >= kMaxActiveStreams)
            raise(ErrorKind::TooManyActiveStreams,
                  "already " + std::to_string(active) + " active streams (cap " +
                      std::to_string(kMaxActiveStreams) + ")");
        state->id = next_stream_id_++;
        streams_[state->id] = state;

        // reap long-finished streams so the map stays small
        if (streams_.size() > 64) {
            for (auto it = streams_.begin(); it != streams_.end() && streams_.size() > 64;) {
                if (it->second->finished && it->first != state->id) {
                    std::lock_guard jl(it->second->join_mutex);
                    if (it->second->worker.joinable())
                        it->second->worker.join();
                    it = streams_.erase(it);
                } else {
                    ++it;
                }
            }
        }
    }

    state->started = MonoClock::now();
    state->worker = std::thread([this, state] {
        const auto period = std::chrono::duration_cast<MonoClock::duration>(
            std::chrono::duration<double>(1.0 / state->spec.rate_hz));
        for (std::uint64_t k = 0; k < state->planned; ++k) {
            if (state->stop)
                break;
            std::this_thread::sleep_until(state->started + period * k);
            if (state->stop)
                break;
            float value = stream_value(state->spec, k, state->planned);
            try {
                transport_.send(OscPacket(OscMessage{state->spec.address, {value}}),
                                state->spec.dest);
            } catch (const Error&) {
                break; // network failure aborts the stream
            }
            state->sent.fetch_add(1);
        }
        state->elapsed_s =
            std::chrono::duration<double>(MonoClock::now() - state->started).count();
        state->completed = state->sent.load() == state->planned;
        state->finished = true;
    });
    return state->id;
}

StreamReport ControlOps::stop_stream(int id)
{
    std::shared_ptr<StreamState> state;
    {
        std::lock_guard lock(streams_mutex_);
        auto it = streams_.find(id);
        if (it == streams_.end())
            raise(ErrorKind::UnknownStream, "no stream with id " + std::to_string(id));
        state = it->second;
    }
    state->stop = true;
    {
        std::lock_guard jl(state->join_mutex);
        if (state->worker.joinable())
            state->worker.join();
    }
    StreamReport report;
    report.id = id;
    report.address = state->spec.address;
    report.messages_sent = state->sent.load();
    report.planned = state->planned;
    report.completed = state->completed.load();
    report.stopped_early = !state->completed.load();
    report.elapsed_s = state->elapsed_s.load();
    return report;
}

std::size_t ControlOps::active_stream_count() const
{
    std::lock_guard lock(streams_mutex_);
    std::size_t n = 0;
    for (const auto& [id, s] : streams_)
        if (!s->finished)
            ++n;
    return n;
}

void ControlOps::stop_all_streams()
{
    std::vector<std::shared_ptr<StreamState>> all;
    {
        std::lock_guard lock(streams_mutex_);
        for (auto& [id, s] : streams_)
            all.push_back(s);
    }
    for (auto& s : all) {
        s->stop = true;
        std::lock_guard jl(s->join_mutex);
        if (s->worker.joinable())
            s->worker.join();
    }
}

TestReport ControlOps::run_bidirectional_test(int timeout_ms, const std::string& probe_address)
{
    static std::mutex rng_mutex;
    static std::mt19937 rng{std::random_device{}()};
    std::int32_t nonce;
    {
        std::lock_guard lock(rng_mutex);
        nonce = std::uniform_int_distribution<std::int32_t>(1, INT32_MAX)(rng);
    }

    struct Outcome {
        bool decode_error = false;
        std::string error_text;
        std::int32_t got_nonce = 0;
        bool has_nonce = false;
        std::uint64_t mono_ns = 0;
        WallClock::time_point wall;
    };
    std::mutex mutex;
    std::condition_variable cv;
    std::optional<Outcome> outcome;

    auto listener = transport_.add_listener([&](const ReceivedDatagram& dgram,
                                                const OscPacket* packet,
                                                const std::string& err) {
        std::lock_guard lock(mutex);
        if (outcome)
            return; // first relevant event decides
        if (!packet) {
            Outcome o;
            o.decode_error = true;
            o.error_text = err;
            o.mono_ns = dgram.mono_ns;
            o.wall = dgram.wall_time;
            outcome = o;
            cv.notify_all();
            return;
        }
        if (!packet->is_message() || packet->message().address != "/mcp2osc/pong")
            return;
        Outcome o;
        o.mono_ns = dgram.mono_ns;
        o.wall = dgram.wall_time;
        const auto& args = packet->message().args;
        if (!args.empty())
            if (const auto* n = std::get_if<std::int32_t>(&args[0])) {
                o.got_nonce = *n;
                o.has_nonce = true;
            }
        outcome = o;
        cv.notify_all();
    });

    TestReport report;
    report.probe_address = probe_address;
    report.nonce = nonce;

    auto sent_wall = WallClock::now();
    auto sent_mono = MonoClock::now();
    report.sent_at = format_iso8601_ms(sent_wall);
    try {
        transport_.send(OscPacket(OscMessage{probe_address, {nonce}}));
    } catch (...) {
        transport_.remove_listener(listener);
        throw;
    }

    std::optional<Outcome> result;
    {
        std::unique_lock lock(mutex);
        cv.wait_for(lock, std::chrono::milliseconds(timeout_ms), [&] { return outcome.has_value(); });
        result = outcome;
    }
    transport_.remove_listener(listener);

    auto elapsed_ms = std::chrono::duration<double, std::milli>(MonoClock::now() - sent_mono).count();
    if (!result) {
        report.pass = false;
        report.round_trip_ms = elapsed_ms;
        report.failure_reason = "timeout: no reply on /mcp2osc/pong within " +
                                std::to_string(timeout_ms) + " ms";
        return report;
    }

    auto sent_mono_ns = std::uint64_t(
        std::chrono::duration_cast<std::chrono::nanoseconds>(sent_mono.time_since_epoch()).count());
    report.round_trip_ms = double(result->mono_ns - sent_mono_ns) / 1e6;
    report.received_at = format_iso8601_ms(result->wall);

    if (result->decode_error) {
        report.pass = false;
        report.failure_reason = "decode-error: " + result->error_text;
    } else if (!result->has_nonce) {
        report.pass = false;
        report.failure_reason = "wrong-nonce: pong carried no Int32 nonce";
    } else if (result->got_nonce != nonce) {
        report.pass = false;
        report.failure_reason = "wrong-nonce: expected " + std::to_string(nonce) + ", got " +
                                std::to_string(result->got_nonce);
    } else if (report.round_trip_ms > double(timeout_ms)) {
        report.pass = false;
        report.failure_reason = "timeout: reply arrived after the deadline";
    } else {
        report.pass = true;
    }
    return report;
}

namespace {

NamespaceNode parse_namespace(const json& doc, const std::string& fallback_path, int depth)
{
    if (depth > 32)
        raise(ErrorKind::MalformedNamespace, "namespace nesting exceeds depth 32");
    if (!doc.is_object())
        raise(ErrorKind::MalformedNamespace, "namespace node is not a JSON object");

    NamespaceNode node;
    if (doc.contains("FULL_PATH")) {
        if (!doc["FULL_PATH"].is_string())
            raise(ErrorKind::MalformedNamespace, "FULL_PATH is not a string");
        node.full_path = doc["FULL_PATH"].get<std::string>();
    } else {
        node.full_path = fallback_path;
    }
    if (doc.contains("DESCRIPTION") && doc["DESCRIPTION"].is_string())
        node.description = doc["DESCRIPTION"].get<std::string>();
    if (doc.contains("TYPE")) {
        if (!doc["TYPE"].is_string())
            raise(ErrorKind::MalformedNamespace, "TYPE is not a string");
        node.type_signature = doc["TYPE"].get<std::string>();
    }
    if (doc.contains("VALUE"))
        node.current_value = doc["VALUE"];
    if (doc.contains("ACCESS") && doc["ACCESS"].is_number_integer())
        node.access = doc["ACCESS"].get<int>();
    if (doc.contains("RETURN_TYPE") && doc["RETURN_TYPE"].is_string())
        node.return_type = doc["RETURN_TYPE"].get<std::string>();

    if (doc.contains("CONTENTS")) {
        if (!doc["CONTENTS"].is_object())
            raise(ErrorKind::MalformedNamespace, "CONTENTS is not an object");
        for (const auto& [name, childDoc] : doc["CONTENTS"].items()) {
            std::string child_fallback =
                node.full_path == "/" ? "/" + name : node.full_path + "/" + name;
            auto child = parse_namespace(childDoc, child_fallback, depth + 1);
            // a child path must extend its parent's
            if (node.full_path != "/" && child.full_path.rfind(node.full_path + "/", 0) != 0)
                raise(ErrorKind::MalformedNamespace,
                      "child path '" + child.full_path + "' does not extend '" +
                          node.full_path + "'");
            node.children[name] = std::move(child);
        }
    }
    return node;
}

} // namespace

NamespaceNode ControlOps::discover_namespace(const std::string& host, int port,
                                             const std::string& path)
{
    httplib::Client client(host, port);
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(5, 0);
    auto res = client.Get(path.empty() ? "/" : path);
    if (!res)
        raise(ErrorKind::Unreachable,
              host + ":" + std::to_string(port) + ": " + httplib::to_string(res.error()));
    if (res->status != 200)
        raise(ErrorKind::NotOscQuery,
              "HTTP " + std::to_string(res->status) + " from " + host + ":" +
                  std::to_string(port) + path);
    json doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        raise(ErrorKind::NotOscQuery, "response body is not a JSON object");
    return parse_namespace(doc, path.empty() ? "/" : path, 0);
}

} // namespace mcp2osc

#include "mcp2osc/codec.hpp"

#include "mcp2osc/error.hpp"

#include <bit>
#include <cstring>

namespace mcp2osc {

namespace {

constexpr std::string_view kPatternChars = "#*,?[]{}";

void check_sendable_address(const std::string& addr)
{
    if (addr.empty() || addr[0] != '/')
        raise(ErrorKind::InvalidAddress, "address must begin with '/': '" + addr + "'");
    for (char c : addr) {
        unsigned char uc = static_cast<unsigned char>(c);
        if (uc < 0x20 || uc == 0x7f)
            raise(ErrorKind::InvalidAddress, "address contains a control character");
        if (c == ' ')
            raise(ErrorKind::InvalidAddress, "address contains a space: '" + addr + "'");
        if (kPatternChars.find(c) != std::string_view::npos)
            raise(ErrorKind::InvalidAddress,
                  "address contains pattern character '" + std::string(1, c) + "': '" + addr +
                      "' (patterns are not sendable)");
    }
}

// Inbound addresses may carry pattern characters; spaces and control
// characters are still malformed.
void check_decoded_address(const std::string& addr)
{
    if (addr.empty() || addr[0] != '/')
        raise(ErrorKind::InvalidAddress, "address must begin with '/'");
    for (char c : addr) {
        unsigned char uc = static_cast<unsigned char>(c);
        if (uc < 0x20 || uc == 0x7f || c == ' ')
            raise(ErrorKind::InvalidAddress, "address contains space or control character");
    }
}

class Writer {
public:
    std::vector<std::uint8_t> take() { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

    void u32(std::uint32_t v)
    {
        buf_.push_back(std::uint8_t(v >> 24));
        buf_.push_back(std::uint8_t(v >> 16));
        buf_.push_back(std::uint8_t(v >> 8));
        buf_.push_back(std::uint8_t(v));
    }

    void u64(std::uint64_t v)
    {
        u32(std::uint32_t(v >> 32));
        u32(std::uint32_t(v));
    }

    void padded_string(std::string_view s)
    {
        buf_.insert(buf_.end(), s.begin(), s.end());
        buf_.push_back(0);
        pad();
    }

    void raw(const std::uint8_t* data, std::size_t len)
    {
        buf_.insert(buf_.end(), data, data + len);
    }

    void pad()
    {
        while (buf_.size() % 4 != 0)
            buf_.push_back(0);
    }

private:
    std::vector<std::uint8_t> buf_;
};

void write_argument(Writer& w, const OscArgument& arg)
{
    if (const auto* i = std::get_if<std::int32_t>(&arg)) {
        w.u32(std::uint32_t(*i));
    } else if (const auto* f = std::get_if<float>(&arg)) {
        w.u32(std::bit_cast<std::uint32_t>(*f));
    } else if (const auto* s = std::get_if<std::string>(&arg)) {
        if (s->find('\0') != std::string::npos)
            raise(ErrorKind::UnencodableArgument, "string argument contains NUL");
        w.padded_string(*s);
    } else if (const auto* b = std::get_if<OscBlob>(&arg)) {
        if (b->size() > kMaxBlobBytes)
            raise(ErrorKind::UnencodableArgument,
                  "blob of " + std::to_string(b->size()) + " bytes exceeds the " +
                      std::to_string(kMaxBlobBytes) + "-byte limit");
        w.u32(std::uint32_t(b->size()));
        w.raw(b->data(), b->size());
        w.pad();
    } else if (const auto* t = std::get_if<OscTimetag>(&arg)) {
        w.u32(t->seconds);
        w.u32(t->fraction);
    } else if (const auto* h = std::get_if<std::int64_t>(&arg)) {
        w.u64(std::uint64_t(*h));
    } else if (const auto* d = std::get_if<double>(&arg)) {
        w.u64(std::bit_cast<std::uint64_t>(*d));
    }
    // T F N I encode in the tag string only
}

void encode_bundle_into(Writer& w, const OscBundle& bundle, int depth);

void encode_packet_into(Writer& w, const OscPacket& packet, int depth)
{
    if (packet.is_message()) {
        auto bytes = encode_message(packet.message());
        w.raw(bytes.data(), bytes.size());
    } else {
        encode_bundle_into(w, packet.bundle(), depth);
    }
}

void encode_bundle_into(Writer& w, const OscBundle& bundle, int depth)
{
    if (depth > kMaxBundleDepth)
        raise(ErrorKind::NestingTooDeep,
              "bundle nesting exceeds depth " + std::to_string(kMaxBundleDepth));
    w.padded_string("#bundle");
    w.u32(bundle.timetag.seconds);
    w.u32(bundle.timetag.fraction);
    for (const auto& el : bundle.elements) {
        Writer inner;
        encode_packet_into(inner, el, depth + 1);
        auto bytes = inner.take();
        w.u32(std::uint32_t(bytes.size()));
        w.raw(bytes.data(), bytes.size());
    }
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t remaining() const { return bytes_.size() - pos_; }
    std::size_t pos() const { return pos_; }
    bool done() const { return pos_ == bytes_.size(); }

    std::uint32_t u32()
    {
        need(4, "32-bit value");
        std::uint32_t v = (std::uint32_t(bytes_[pos_]) << 24) |
                          (std::uint32_t(bytes_[pos_ + 1]) << 16) |
                          (std::uint32_t(bytes_[pos_ + 2]) << 8) | std::uint32_t(bytes_[pos_ + 3]);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64()
    {
        std::uint64_t hi = u32();
        return (hi << 32) | u32();
    }

    std::string padded_string(const char* what)
    {
        std::size_t nul = pos_;
        while (nul < bytes_.size() && bytes_[nul] != 0)
            ++nul;
        if (nul == bytes_.size())
            raise(ErrorKind::Truncated, std::string("unterminated ") + what);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), nul - pos_);
        pos_ = nul + 1;
        align();
        return s;
    }

    std::span<const std::uint8_t> raw(std::size_t n, const char* what)
    {
        need(n, what);
        auto out = bytes_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    void align()
    {
        std::size_t aligned = (pos_ + 3) & ~std::size_t(3);
        if (aligned > bytes_.size())
            raise(ErrorKind::Truncated, "input ends inside padding");
        pos_ = aligned;
    }

    void need(std::size_t n, const char* what)
    {
        if (remaining() < n)
            raise(ErrorKind::Truncated, std::string("input ends inside ") + what);
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

OscArgument read_argument(Reader& r, char tag)
{
    switch (tag) {
    case 'i': return std::int32_t(r.u32());
    case 'f': return std::bit_cast<float>(r.u32());
    case 's': return r.padded_string("string argument");
    case 'b': {
        std::uint32_t len = r.u32();
        auto data = r.raw(len, "blob payload");
        OscBlob blob(data.begin(), data.end());
        r.align();
        return blob;
    }
    case 'T': return OscTrue{};
    case 'F': return OscFalse{};
    case 'N': return OscNil{};
    case 'I': return OscImpulse{};
    case 't': return OscTimetag::from_raw(r.u64());
    case 'h': return std::int64_t(r.u64());
    case 'd': return std::bit_cast<double>(r.u64());
    default:
        raise(ErrorKind::UnknownTypeTag, std::string("unsupported type tag '") + tag + "'");
    }
}

OscMessage decode_message_reader(Reader& r)
{
    OscMessage msg;
    msg.address = r.padded_string("address");
    check_decoded_address(msg.address);

    if (r.done())
        raise(ErrorKind::MissingTypeTagString, "message has no type-tag string");
    std::string tags = r.padded_string("type-tag string");
    if (tags.empty() || tags[0] != ',')
        raise(ErrorKind::MissingTypeTagString,
              "type-tag string must begin with ',' (legacy tagless messages are rejected)");

    for (std::size_t i = 1; i < tags.size(); ++i)
        msg.args.push_back(read_argument(r, tags[i]));
    return msg;
}

OscBundle decode_bundle_reader(Reader& r, int depth);

OscPacket decode_packet_reader(Reader& r, std::size_t len, int depth)
{
    // Decode exactly `len` bytes as one element.
    auto slice = r.raw(len, "bundle element");
    if (slice.empty())
        raise(ErrorKind::Truncated, "empty bundle element");
    Reader sub(slice);
    OscPacket out;
    if (slice[0] == '/') {
        out = OscPacket(decode_message_reader(sub));
    } else if (slice[0] == '#') {
        out = OscPacket(decode_bundle_reader(sub, depth));
    } else {
        raise(ErrorKind::UnknownPacketType, "element begins with neither '/' nor '#'");
    }
    if (!sub.done())
        raise(ErrorKind::TrailingGarbage, std::to_string(sub.remaining()) +
                                              " byte(s) left after a complete element");
    return out;
}

OscBundle decode_bundle_reader(Reader& r, int depth)
{
    if (depth > kMaxBundleDepth)
        raise(ErrorKind::NestingTooDeep,
              "bundle nesting exceeds depth " + std::to_string(kMaxBundleDepth));
    auto marker = r.raw(8, "bundle marker");
    if (std::memcmp(marker.data(), "#bundle\0", 8) != 0)
        raise(ErrorKind::UnknownPacketType, "missing '#bundle' marker");
    OscBundle b;
    b.timetag.seconds = r.u32();
    b.timetag.fraction = r.u32();
    while (!r.done()) {
        std::uint32_t len = r.u32();
        if (len % 4 != 0)
            raise(ErrorKind::Truncated, "bundle element size not a multiple of 4");
        b.elements.push_back(decode_packet_reader(r, len, depth + 1));
    }
    return b;
}

} // namespace

std::vector<std::uint8_t> encode_message(const OscMessage& msg)
{
    check_sendable_address(msg.address);
    Writer w;
    w.padded_string(msg.address);
    w.padded_string("," + type_tags(msg.args));
    for (const auto& a : msg.args)
        write_argument(w, a);
    return w.take();
}

std::vector<std::uint8_t> encode_bundle(const OscBundle& bundle)
{
    Writer w;
    encode_bundle_into(w, bundle, 1);
    return w.take();
}

std::vector<std::uint8_t> encode_packet(const OscPacket& packet)
{
    if (packet.is_message())
        return encode_message(packet.message());
    return encode_bundle(packet.bundle());
}

OscMessage decode_message(std::span<const std::uint8_t> bytes)
{
    if (bytes.empty())
        raise(ErrorKind::Truncated, "empty input");
    if (bytes.size() % 4 != 0)
        raise(ErrorKind::Truncated,
              "length " + std::to_string(bytes.size()) + " is not a multiple of 4");
    Reader r(bytes);
    auto msg = decode_message_reader(r);
    if (!r.done())
        raise(ErrorKind::TrailingGarbage,
              std::to_string(r.remaining()) + " byte(s) left after a complete message");
    return msg;
}

OscBundle decode_bundle(std::span<const std::uint8_t> bytes)
{
    if (bytes.empty())
        raise(ErrorKind::Truncated, "empty input");
    if (bytes.size() % 4 != 0)
        raise(ErrorKind::Truncated,
              "length " + std::to_string(bytes.size()) + " is not a multiple of 4");
    Reader r(bytes);
    return decode_bundle_reader(r, 1);
}

OscPacket decode_packet(std::span<const std::uint8_t> bytes)
{
    if (bytes.empty())
        raise(ErrorKind::Truncated, "empty input");
    if (bytes[0] == '/')
        return OscPacket(decode_message(bytes));
    if (bytes[0] == '#')
        return OscPacket(decode_bundle(bytes));
    raise(ErrorKind::UnknownPacketType, "packet begins with neither '/' nor '#'");
}

OscTimetag timetag_from_walltime(std::chrono::system_clock::time_point t)
{
    using namespace std::chrono;
    auto since = t.time_since_epoch();
    if (since < nanoseconds::zero())
        raise(ErrorKind::InvalidSpec, "walltime before the Unix epoch has no timetag");
    std::uint64_t ns_total = std::uint64_t(duration_cast<nanoseconds>(since).count());
    std::uint64_t secs = ns_total / 1'000'000'000ull;
    std::uint64_t ns = ns_total % 1'000'000'000ull;
    // round-to-nearest keeps the inverse within one clock tick
    std::uint64_t frac = ((ns << 32) + 500'000'000ull) / 1'000'000'000ull;
    if (frac >= (1ull << 32)) {
        frac = 0;
        ++secs;
    }
    return {std::uint32_t(secs + kNtpUnixOffsetSeconds), std::uint32_t(frac)};
}

std::chrono::system_clock::time_point timetag_to_walltime(const OscTimetag& tt)
{
    using namespace std::chrono;
    if (tt.is_immediate())
        raise(ErrorKind::ImmediateHasNoWalltime, "the IMMEDIATE timetag has no wall-clock value");
    if (tt.seconds < kNtpUnixOffsetSeconds)
        raise(ErrorKind::InvalidSpec, "timetag predates the Unix epoch");
    std::uint64_t unix_secs = tt.seconds - kNtpUnixOffsetSeconds;
    std::uint64_t ns = ((std::uint64_t(tt.fraction) * 1'000'000'000ull) + (1ull << 31)) >> 32;
    if (ns >= 1'000'000'000ull) {
        ns -= 1'000'000'000ull;
        ++unix_secs;
    }
    return system_clock::time_point(seconds(unix_secs) + nanoseconds(ns));
}

} // namespace mcp2osc

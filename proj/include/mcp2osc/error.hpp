#pragma once

#include <stdexcept>
#include <string>

namespace mcp2osc {

enum class ErrorKind {
    // codec
    InvalidAddress,
    UnencodableArgument,
    Truncated,
    MissingTypeTagString,
    UnknownTypeTag,
    TrailingGarbage,
    UnknownPacketType,
    NestingTooDeep,
    ImmediateHasNoWalltime,
    // address engine
    MalformedPattern,
    CardinalityExceeded,
    UnboundPlaceholder,
    // transport
    AllPortsBusy,
    InvalidConfig,
    DatagramTooLarge,
    NetworkError,
    // message log
    StorageFull,
    IoError,
    // pattern store
    InvalidRecord,
    NotFound,
    Collision,
    // control ops
    ValidationRefused,
    TooManyActiveStreams,
    InvalidSpec,
    UnknownStream,
    Unreachable,
    NotOscQuery,
    MalformedNamespace,
    // peer sim
    PortBusy,
    BadFixture,
    // transcripts
    MatcherFailed,
};

const char* to_string(ErrorKind kind);

// Domain error carrying a stable kind name; the MCP layer surfaces the kind
// verbatim in is_error tool results.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind),
          message_(message) {}

    ErrorKind kind() const { return kind_; }
    const char* kind_name() const { return to_string(kind_); }
    const std::string& message() const { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message)
{
    throw Error(kind, message);
}

} // namespace mcp2osc

#include "mcp2osc/error.hpp"

namespace mcp2osc {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::InvalidAddress: return "InvalidAddress";
    case ErrorKind::UnencodableArgument: return "UnencodableArgument";
    case ErrorKind::Truncated: return "Truncated";
    case ErrorKind::MissingTypeTagString: return "MissingTypeTagString";
    case ErrorKind::UnknownTypeTag: return "UnknownTypeTag";
    case ErrorKind::TrailingGarbage: return "TrailingGarbage";
    case ErrorKind::UnknownPacketType: return "UnknownPacketType";
    case ErrorKind::NestingTooDeep: return "NestingTooDeep";
    case ErrorKind::ImmediateHasNoWalltime: return "ImmediateHasNoWalltime";
    case ErrorKind::MalformedPattern: return "MalformedPattern";
    case ErrorKind::CardinalityExceeded: return "CardinalityExceeded";
    case ErrorKind::UnboundPlaceholder: return "UnboundPlaceholder";
    case ErrorKind::AllPortsBusy: return "AllPortsBusy";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::DatagramTooLarge: return "DatagramTooLarge";
    case ErrorKind::NetworkError: return "NetworkError";
    case ErrorKind::StorageFull: return "StorageFull";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidRecord: return "InvalidRecord";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::Collision: return "Collision";
    case ErrorKind::ValidationRefused: return "ValidationRefused";
    case ErrorKind::TooManyActiveStreams: return "TooManyActiveStreams";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::UnknownStream: return "UnknownStream";
    case ErrorKind::Unreachable: return "Unreachable";
    case ErrorKind::NotOscQuery: return "NotOscQuery";
    case ErrorKind::MalformedNamespace: return "MalformedNamespace";
    case ErrorKind::PortBusy: return "PortBusy";
    case ErrorKind::BadFixture: return "BadFixture";
    case ErrorKind::MatcherFailed: return "MatcherFailed";
    }
    return "Unknown";
}

} // namespace mcp2osc

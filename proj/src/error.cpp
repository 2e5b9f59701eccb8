#include "nfscale/error.hpp"

namespace nfscale {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::AllocationMismatch: return "AllocationMismatch";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::ZeroProbability: return "ZeroProbability";
    case Errc::DuplicateChain: return "DuplicateChain";
    case Errc::UnknownChain: return "UnknownChain";
    case Errc::LastChain: return "LastChain";
    case Errc::NoLiveChains: return "NoLiveChains";
    case Errc::WrongRole: return "WrongRole";
    case Errc::TooManyChains: return "TooManyChains";
    case Errc::SlaveUnreachable: return "SlaveUnreachable";
    case Errc::PeerUnreachable: return "PeerUnreachable";
    case Errc::ConfigMismatch: return "ConfigMismatch";
    case Errc::DuplicateTags: return "DuplicateTags";
    case Errc::BarrierTimeout: return "BarrierTimeout";
    case Errc::HandshakeRequired: return "HandshakeRequired";
    case Errc::EmptyTagStack: return "EmptyTagStack";
    case Errc::NoRoute: return "NoRoute";
    case Errc::QueueOverflow: return "QueueOverflow";
    case Errc::NeverConverged: return "NeverConverged";
    case Errc::ScenarioInvalid: return "ScenarioInvalid";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::Decode: return "Decode";
  }
  return "Unknown";
}

}  // namespace nfscale

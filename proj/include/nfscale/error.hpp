#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nfscale {

enum class Errc {
  InvalidArgument,
  AllocationMismatch,
  EmptyWindow,
  ZeroProbability,
  DuplicateChain,
  UnknownChain,
  LastChain,
  NoLiveChains,
  WrongRole,
  TooManyChains,
  SlaveUnreachable,
  PeerUnreachable,
  ConfigMismatch,
  DuplicateTags,
  BarrierTimeout,
  HandshakeRequired,
  EmptyTagStack,
  NoRoute,
  QueueOverflow,
  NeverConverged,
  ScenarioInvalid,
  ParseError,
  ValidationError,
  Decode,
};

std::string_view errc_name(Errc code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace nfscale

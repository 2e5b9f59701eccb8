#pragma once

// YAML scenario files. The schema is described in docs/scenario-format.md.

#include <string>
#include <vector>

#include "nfscale/netsim.hpp"

namespace nfscale {

struct Interval {
  double from = 0.0;
  double to = 0.0;  // exclusive; 0 means the horizon
};

struct ScenarioFile {
  Scenario scenario;
  std::vector<Interval> steady;  // averaging intervals for the share table
  std::string source;            // path or label used in diagnostics
};

/// Throws ParseError for malformed YAML or wrongly typed values and
/// ValidationError for well-formed files that describe an invalid scenario.
/// Both messages start with "<source>:<line>:".
ScenarioFile parse_scenario(const std::string& path);
ScenarioFile parse_scenario_text(const std::string& text, const std::string& source = "<text>");

}  // namespace nfscale

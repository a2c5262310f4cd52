#pragma once

#include <string>

#include "json.hpp"
#include "loopsum/oracle.hpp"
#include "loopsum/summarize.hpp"
#include "loopsum/verify.hpp"

namespace loopsum {

using Json = nlohmann::ordered_json;

Json to_json(const SummaryCase& c);
Json to_json(const Oscillation& o);
Json to_json(const Summary& s);
Json to_json(const ProgramSummary& ps);
Json to_json(const DiffReport& r);
Json to_json(const AssertionResult& r);
Json to_json(const VerifyReport& r);
Json to_json(const State& s);

/// Two-space indented, trailing newline.
std::string dump(const Json& j);

}  // namespace loopsum

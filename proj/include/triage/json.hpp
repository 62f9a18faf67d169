#pragma once

#include <json.hpp>

namespace triage {

/// Insertion-ordered JSON everywhere, so emitted files are deterministic.
using json = nlohmann::ordered_json;

}  // namespace triage

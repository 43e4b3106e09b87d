#pragma once

// nlohmann/json, vendored as a single header.
#include <json.hpp>

namespace tourrec {
using json = nlohmann::json;
}

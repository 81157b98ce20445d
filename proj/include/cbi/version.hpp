#pragma once

namespace cbi {

inline constexpr const char* kVersion = "cbilab 0.1.0";

}  // namespace cbi

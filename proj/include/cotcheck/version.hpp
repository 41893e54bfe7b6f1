#pragma once

namespace cotcheck {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cotcheck

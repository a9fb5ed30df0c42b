#pragma once

namespace difint {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace difint

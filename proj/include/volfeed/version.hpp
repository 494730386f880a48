#pragma once

namespace volfeed {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace volfeed

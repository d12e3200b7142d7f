#pragma once

namespace iroa {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace iroa

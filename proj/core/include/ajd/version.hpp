#pragma once

namespace ajd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ajd

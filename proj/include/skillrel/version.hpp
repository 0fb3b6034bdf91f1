#pragma once

namespace skillrel {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace skillrel

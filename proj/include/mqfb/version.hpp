#pragma once

namespace mqfb {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mqfb

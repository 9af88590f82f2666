#pragma once

namespace contextox {

inline constexpr const char* kVersion = "0.1.0";

} // namespace contextox

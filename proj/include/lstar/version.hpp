#pragma once

namespace lstar {

inline constexpr const char* kVersion = "0.1.0";

} // namespace lstar

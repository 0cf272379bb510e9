#pragma once

namespace stabcert {

inline constexpr const char* kVersion = "0.1.0";

// Version tag written into every JSON/CSV artifact the tools emit.
inline constexpr int kFormatVersion = 1;

} // namespace stabcert

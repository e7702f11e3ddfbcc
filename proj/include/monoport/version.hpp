#pragma once

namespace monoport {

inline constexpr const char* kVersion = "1.0.0";

/// Version of the netlist / runspec document format.
inline constexpr int kSchemaVersion = 1;

}  // namespace monoport

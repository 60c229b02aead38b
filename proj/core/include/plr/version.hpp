#pragma once

namespace plr {

inline constexpr const char* kToolName = "plr";
inline constexpr const char* kToolVersion = "0.1.0";

// Version of the on-disk report document. Bumped whenever the JSON layout
// changes incompatibly; `plr report` refuses documents with another version.
inline constexpr int kReportSchemaVersion = 1;

}  // namespace plr

#pragma once

namespace frictionlab {

inline constexpr const char* kArtifactName = "frictionlab";
inline constexpr const char* kArtifactVersion = "1.0.0";

// Bumped whenever the TrialRecord/TrialSet wire layout changes.
inline constexpr int kTrialSchemaVersion = 1;

} // namespace frictionlab

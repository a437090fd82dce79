#pragma once

namespace csched {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFile = 3;
inline constexpr int kExitRuntime = 4;

// Output root when --out is not given.
inline constexpr const char* kOutputRootEnv = "CSCHED_OUTPUT_ROOT";

int run_cli(int argc, char** argv);

}  // namespace csched

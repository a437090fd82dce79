#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "csched/policy_net.hpp"
#include "csched/reward.hpp"

namespace csched {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointMeta {
  std::uint64_t seed = 0;
  RewardWeights weights;
  std::string trace_id;
  int episodes = 0;

  friend bool operator==(const CheckpointMeta& a, const CheckpointMeta& b) {
    return a.seed == b.seed && a.weights.w1 == b.weights.w1 && a.trace_id == b.trace_id && a.episodes == b.episodes;
  }
};

struct Checkpoint {
  PolicyNetd policy;
  CheckpointMeta meta;
};

// Text container: magic + version line, architecture line, metadata line, then
// each parameter tensor as "tensor <name> <rows> <cols>" followed by row-major
// values in shortest round-trip decimal, closed by "end".
void write_checkpoint(std::ostream& out, const PolicyNetd& policy, const CheckpointMeta& meta);
// Throws ParseError on malformed or truncated input, LoadError on version or
// architecture mismatch (message names both descriptors).
Checkpoint read_checkpoint(std::istream& in, const std::optional<NetArchitecture>& expected = std::nullopt);

// Written to a temporary file and renamed into place.
void save_checkpoint(const std::string& path, const PolicyNetd& policy, const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::string& path, const std::optional<NetArchitecture>& expected = std::nullopt);

}  // namespace csched

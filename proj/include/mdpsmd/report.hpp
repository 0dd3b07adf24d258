#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdpsmd/linalg.hpp"
#include "mdpsmd/smd.hpp"

namespace mdpsmd {

// Serializable solve summary shared by all CLI tasks.
struct SolveReport {
  std::string mode;  // mixing | discounted | constrained | game | regression
  double eps = 0.0;
  uint64_t seed = 0;
  long long iters = 0;
  long long samples = 0;
  double wall_ms = 0.0;
  std::vector<Checkpoint> checkpoints;
  std::vector<Vec> policy;  // empty for games / regression
  nlohmann::json extras;    // task-specific fields

  // Timing is excluded when byte-stable output is required.
  nlohmann::json to_json(bool include_timing = true) const;
  std::string checkpoint_csv() const;

  void write_json(const std::string& path, bool include_timing = true) const;
  void write_csv(const std::string& path) const;
};

std::string format_double(double v);

}  // namespace mdpsmd

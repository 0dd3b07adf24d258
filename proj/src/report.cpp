#include "mdpsmd/report.hpp"

#include <cstdio>
#include <fstream>

#include "mdpsmd/errors.hpp"

namespace mdpsmd {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json SolveReport::to_json(bool include_timing) const {
  nlohmann::json j;
  j["mode"] = mode;
  j["eps"] = eps;
  j["seed"] = seed;
  j["T"] = iters;
  j["samples"] = samples;
  if (include_timing) j["wall_ms"] = wall_ms;
  nlohmann::json cps = nlohmann::json::array();
  for (const auto& cp : checkpoints) {
    nlohmann::json c;
    c["t"] = cp.t;
    c["samples"] = cp.samples;
    c["gap"] = cp.gap;
    c["subopt"] = cp.subopt ? nlohmann::json(*cp.subopt) : nlohmann::json(nullptr);
    cps.push_back(c);
  }
  j["checkpoints"] = cps;
  j["policy"] = policy.empty() ? nlohmann::json(nullptr) : nlohmann::json(policy);
  for (auto it = extras.begin(); it != extras.end(); ++it) j[it.key()] = it.value();
  return j;
}

std::string SolveReport::checkpoint_csv() const {
  std::string out = "t,samples,gap,subopt\n";
  for (const auto& cp : checkpoints) {
    out += std::to_string(cp.t);
    out += ',';
    out += std::to_string(cp.samples);
    out += ',';
    out += format_double(cp.gap);
    out += ',';
    if (cp.subopt) out += format_double(*cp.subopt);
    out += '\n';
  }
  return out;
}

void SolveReport::write_json(const std::string& path, bool include_timing) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("report: cannot open " + path);
  f << to_json(include_timing).dump(2) << "\n";
}

void SolveReport::write_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("report: cannot open " + path);
  f << checkpoint_csv();
}

}  // namespace mdpsmd

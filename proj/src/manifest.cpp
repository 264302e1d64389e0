#include "phasecell/manifest.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "phasecell/version.hpp"

namespace phasecell {

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("hash_file: cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in) {
    in.read(buf, sizeof buf);
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char out[32];
  std::snprintf(out, sizeof out, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return out;
}

RunManifest::RunManifest() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  timestamp_ = buf;
}

void RunManifest::add_timing(const std::string& task, double ms) {
  timings_.emplace_back(task, ms);
}

void RunManifest::add_output(const std::string& path) {
  outputs_.emplace_back(path, hash_file(path));
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "phasecell";
  j["version"] = kVersion;
  j["timestamp"] = timestamp_;
  j["seed"] = seed_;
  j["config"] = config_;
  nlohmann::ordered_json timings = nlohmann::ordered_json::object();
  for (const auto& [task, ms] : timings_) timings[task] = ms;
  j["timings_ms"] = timings;
  nlohmann::ordered_json outs = nlohmann::ordered_json::array();
  for (const auto& [path, hash] : outputs_) {
    nlohmann::ordered_json o;
    o["path"] = std::filesystem::path(path).filename().string();
    o["hash"] = hash;
    outs.push_back(o);
  }
  j["outputs"] = outs;
  j["csv_schema_version"] = 1;
  return j;
}

void RunManifest::write(const std::string& dir) const {
  for (const auto& [path, hash] : outputs_)
    if (hash_file(path) != hash)
      throw std::runtime_error("manifest: output changed since it was recorded: " + path);
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / "manifest.json");
  if (!out) throw std::runtime_error("manifest: cannot write to " + dir);
  out << to_json().dump(2) << "\n";
}

}  // namespace phasecell

#pragma once

// Run manifest: tool version, timestamp, resolved config echo, master seed,
// per-task timings, and the output files with content hashes. Re-running from
// the echoed config reproduces all listed outputs bit-identically.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace phasecell {

// FNV-1a 64-bit content hash, hex-encoded.
std::string hash_file(const std::string& path);

class RunManifest {
 public:
  RunManifest();

  void set_config(nlohmann::ordered_json config) { config_ = std::move(config); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void add_timing(const std::string& task, double ms);
  // records the file and its content hash; the file must exist
  void add_output(const std::string& path);

  // writes <dir>/manifest.json after re-verifying every listed hash
  void write(const std::string& dir) const;

  nlohmann::ordered_json to_json() const;

 private:
  std::string timestamp_;
  nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
  std::uint64_t seed_ = 0;
  std::vector<std::pair<std::string, double>> timings_;
  std::vector<std::pair<std::string, std::string>> outputs_;  // path, hash
};

}  // namespace phasecell

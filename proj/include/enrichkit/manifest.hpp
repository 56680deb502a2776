#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace enrichkit {

inline constexpr std::string_view kVersion = "0.1.0";

/// Reproducibility record written next to every output: the command, every
/// resolved flag, input digests and the wall-clock duration.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> flags;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;  // path -> fnv1a-64 hex
  std::vector<std::string> notes;
  double duration_seconds = 0.0;

  std::string to_json() const;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string file_digest(const std::string& path);

}  // namespace enrichkit

#include "enrichkit/manifest.hpp"

#include <cstdio>

#include <json.hpp>

#include "enrichkit/dataio.hpp"

namespace enrichkit {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string file_digest(const std::string& path) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(read_file(path))));
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["flags"] = flags;
  j["seed"] = seed;
  j["inputs"] = input_digests;
  j["version"] = std::string(kVersion);
  j["duration_seconds"] = duration_seconds;
  j["notes"] = notes;
  return j.dump(2) + "\n";
}

}  // namespace enrichkit

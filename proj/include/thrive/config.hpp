#pragma once

#include <map>
#include <string>

namespace thrive {

// Line-based key=value config. '#' starts a comment, blank lines are fine,
// whitespace around keys and values is trimmed. Unknown keys are rejected so
// a typoed option fails loudly instead of silently using a default.
struct ServiceConfig {
  std::string listen = "127.0.0.1:7140";
  std::string db_root;
  uint32_t biohash_len = 256;
  uint32_t mu = 0;  // 0 means "derive the default from biohash_len"
  uint64_t skew_secs = 120;
  uint32_t max_sessions = 64;
};

std::map<std::string, std::string> parse_config_text(const std::string& text);

ServiceConfig service_config_from_file(const std::string& path);

bool is_supported_biohash_len(uint32_t len);

}  // namespace thrive

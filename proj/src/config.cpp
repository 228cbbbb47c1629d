#include "thrive/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace thrive {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

uint64_t parse_num(const std::string& key, const std::string& value, uint64_t lo, uint64_t hi) {
  uint64_t v = 0;
  try {
    std::size_t used = 0;
    v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing garbage");
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": '" + value + "'");
  }
  if (v < lo || v > hi) {
    throw std::invalid_argument("config: " + key + " out of range [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
  }
  return v;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    }
    if (!out.emplace(key, value).second) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": duplicate key " + key);
    }
  }
  return out;
}

bool is_supported_biohash_len(uint32_t len) {
  return len == 112 || len == 192 || len == 256 || len == 512 || len == 2048;
}

ServiceConfig service_config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::map<std::string, std::string> kv = parse_config_text(buf.str());

  ServiceConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "listen") {
      cfg.listen = value;
    } else if (key == "db_root") {
      cfg.db_root = value;
    } else if (key == "biohash_len") {
      cfg.biohash_len = static_cast<uint32_t>(parse_num(key, value, 1, 1 << 20));
      if (!is_supported_biohash_len(cfg.biohash_len)) {
        throw std::invalid_argument("config: biohash_len must be one of 112, 192, 256, 512, 2048");
      }
    } else if (key == "mu") {
      cfg.mu = static_cast<uint32_t>(parse_num(key, value, 0, 1 << 20));
    } else if (key == "skew_secs") {
      cfg.skew_secs = parse_num(key, value, 1, 86400);
    } else if (key == "max_sessions") {
      cfg.max_sessions = static_cast<uint32_t>(parse_num(key, value, 1, 4096));
    } else {
      throw std::invalid_argument("config: unknown key " + key);
    }
  }
  if (cfg.db_root.empty()) throw std::invalid_argument("config: db_root is required");
  return cfg;
}

}  // namespace thrive

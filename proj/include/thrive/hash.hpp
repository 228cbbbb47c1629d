#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace thrive {

using Digest = std::array<uint8_t, 32>;

Digest sha256(std::span<const uint8_t> data);
Digest sha256(const std::string& data);

std::string hex_encode(std::span<const uint8_t> bytes);

// First 8 hex chars of the digest; used to keep identifiers out of logs.
std::string redact(const std::string& value);

}  // namespace thrive

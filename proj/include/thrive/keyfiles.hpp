#pragma once

#include <string>

#include "thrive/protocol.hpp"

namespace thrive::store {

// Key files: "THRVKEY" magic, version byte, role byte, then length-prefixed
// fields (4-byte big-endian length + content). Integers are big-endian;
// signed integers carry one sign byte (0 positive, 1 negative) before the
// magnitude. The hash_algo field pins the digest used everywhere (0x01 =
// SHA-256). Roles: 0x01 user credentials, 0x02 verifier's per-user material,
// 0x03 verifier signing key.

constexpr uint8_t kRoleUser = 0x01;
constexpr uint8_t kRoleVerifierUser = 0x02;
constexpr uint8_t kRoleVerifierSigning = 0x03;
constexpr uint8_t kHashSha256 = 0x01;

struct UserKeyFile {
  proto::UserCredentials creds;
  std::string verifier_id;
  bio::UserSecretKey bio_secret;
  uint32_t biohash_len = 0;
};

struct VerifierUserFile {
  proto::VerifierUserEntry entry;
  uint32_t security_bits = 0;
  uint32_t biohash_len = 0;
};

struct VerifierSigningFile {
  proto::VerifierIdentity identity;
};

void save_user_key_file(const std::string& path, const UserKeyFile& f);
UserKeyFile load_user_key_file(const std::string& path);

void save_verifier_user_file(const std::string& path, const VerifierUserFile& f);
VerifierUserFile load_verifier_user_file(const std::string& path);

void save_verifier_signing_file(const std::string& path, const VerifierSigningFile& f);
VerifierSigningFile load_verifier_signing_file(const std::string& path);

}  // namespace thrive::store

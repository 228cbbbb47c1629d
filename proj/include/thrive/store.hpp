#pragma once

#include <map>
#include <optional>
#include <shared_mutex>
#include <string>

#include "thrive/keyfiles.hpp"
#include "thrive/protocol.hpp"

namespace thrive::store {

class StoreError : public std::runtime_error {
 public:
  enum class Kind { Duplicate, Corrupt, Io };
  StoreError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
  Kind kind;
};

// One file per user under the root, named by the hex SHA-256 of the user id.
// Writes land in a temp file first and rename into place, so a record is
// either fully visible or absent; a crash mid-put leaves only a *.tmp file
// the reader never looks at. Reads re-verify the enrollment signature, so a
// corrupted file surfaces as an error rather than as data.
class EnrollmentStore {
 public:
  explicit EnrollmentStore(std::string root_dir);

  void put(const proto::EnrollmentRecord& record, bool overwrite);
  std::optional<proto::EnrollmentRecord> get(const std::string& user_id,
                                             const sig::SigPublicKey& user_sig_pub);
  bool exists(const std::string& user_id) const;
  std::string path_for(const std::string& user_id) const;

 private:
  std::string root_;
  mutable std::shared_mutex mu_;
};

// Verifier-side key material, loaded once at startup from a directory of
// *.verifier.thrvkey files plus verifier.signing.thrvkey. By construction it
// can only hold share index 2; user signing keys never pass through here.
class KeyStore {
 public:
  static KeyStore load(const std::string& key_dir);

  const VerifierUserFile* user(const std::string& user_id) const;
  const proto::VerifierIdentity& identity() const { return identity_; }
  std::size_t user_count() const { return users_.size(); }

 private:
  std::map<std::string, VerifierUserFile> users_;
  proto::VerifierIdentity identity_;
};

}  // namespace thrive::store

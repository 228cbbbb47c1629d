#include "thrive/store.hpp"

#include <filesystem>
#include <fstream>

#include "thrive/hash.hpp"

namespace fs = std::filesystem;

namespace thrive::store {

namespace {

// Records are stored as the canonical enrollment frame with the transport
// flags zeroed, so one codec covers wire and disk.
std::vector<uint8_t> record_bytes(const proto::EnrollmentRecord& r) {
  wire::EnrollMsg msg;
  msg.user_id = r.user_id;
  msg.biohash_len = r.biohash_len;
  msg.flags = 0;
  msg.cts = r.cts;
  msg.sig = r.sig;
  return wire::encode(msg);
}

}  // namespace

EnrollmentStore::EnrollmentStore(std::string root_dir) : root_(std::move(root_dir)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw StoreError(StoreError::Kind::Io, "store: cannot create " + root_);
}

std::string EnrollmentStore::path_for(const std::string& user_id) const {
  Digest d = sha256(user_id);
  return (fs::path(root_) / (hex_encode(d) + ".rec")).string();
}

void EnrollmentStore::put(const proto::EnrollmentRecord& record, bool overwrite) {
  std::unique_lock lock(mu_);
  std::string final_path = path_for(record.user_id);
  if (!overwrite && fs::exists(final_path)) {
    throw StoreError(StoreError::Kind::Duplicate,
                     "store: record already exists for this user");
  }
  std::vector<uint8_t> bytes = record_bytes(record);
  std::string tmp_path = final_path + ".tmp";
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError(StoreError::Kind::Io, "store: cannot write " + tmp_path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<long>(bytes.size()));
    out.flush();
    if (!out) throw StoreError(StoreError::Kind::Io, "store: write failed " + tmp_path);
  }
  std::error_code ec;
  fs::rename(tmp_path, final_path, ec);
  if (ec) {
    fs::remove(tmp_path, ec);
    throw StoreError(StoreError::Kind::Io, "store: rename failed for " + final_path);
  }
}

std::optional<proto::EnrollmentRecord> EnrollmentStore::get(const std::string& user_id,
                                                            const sig::SigPublicKey& user_sig_pub) {
  std::shared_lock lock(mu_);
  std::string path = path_for(user_id);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::vector<uint8_t> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  wire::EnrollMsg msg;
  try {
    wire::Message m = wire::decode(raw);
    if (!std::holds_alternative<wire::EnrollMsg>(m)) {
      throw wire::WireError("record is not an enrollment frame");
    }
    msg = std::get<wire::EnrollMsg>(m);
  } catch (const wire::WireError& e) {
    throw StoreError(StoreError::Kind::Corrupt, std::string("store: undecodable record: ") + e.what());
  }
  if (msg.user_id != user_id || msg.flags != 0) {
    throw StoreError(StoreError::Kind::Corrupt, "store: record fields inconsistent");
  }
  sig::Signature s{msg.sig.value, msg.sig.signer_id};
  if (msg.sig.signer_id != user_id ||
      !sig::verify(user_sig_pub, wire::enroll_signing_bytes(msg.cts), s)) {
    throw StoreError(StoreError::Kind::Corrupt, "store: record signature check failed");
  }
  return proto::EnrollmentRecord{msg.user_id, msg.biohash_len, msg.cts, msg.sig};
}

bool EnrollmentStore::exists(const std::string& user_id) const {
  std::shared_lock lock(mu_);
  return fs::exists(path_for(user_id));
}

KeyStore KeyStore::load(const std::string& key_dir) {
  KeyStore ks;
  fs::path dir(key_dir);
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("keystore: not a directory: " + key_dir);
  }
  bool have_identity = false;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name == "verifier.signing.thrvkey") {
      ks.identity_ = load_verifier_signing_file(entry.path().string()).identity;
      have_identity = true;
    } else if (name.size() > 16 && name.ends_with(".verifier.thrvkey")) {
      VerifierUserFile f = load_verifier_user_file(entry.path().string());
      ks.users_[f.entry.user_id] = std::move(f);
    }
  }
  if (!have_identity) {
    throw std::runtime_error("keystore: verifier.signing.thrvkey missing in " + key_dir);
  }
  return ks;
}

const VerifierUserFile* KeyStore::user(const std::string& user_id) const {
  auto it = users_.find(user_id);
  return it == users_.end() ? nullptr : &it->second;
}

}  // namespace thrive::store

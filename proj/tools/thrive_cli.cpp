#include <csignal>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thrive/bench.hpp"
#include "thrive/config.hpp"
#include "thrive/features.hpp"
#include "thrive/hash.hpp"
#include "thrive/keyfiles.hpp"
#include "thrive/protocol.hpp"
#include "thrive/service.hpp"
#include "thrive/store.hpp"
#include "thrive/transport.hpp"

// Exit codes: 0 success or accept, 1 rejected, 2 protocol error,
// 3 network error, 4 usage or file error.
namespace {

namespace fs = std::filesystem;
using namespace thrive;

constexpr int kOk = 0;
constexpr int kRejected = 1;
constexpr int kProtocolErr = 2;
constexpr int kNetworkErr = 3;
constexpr int kUsageErr = 4;

volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }

bool valid_user_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

int exit_code_for(wire::ErrorClass c) {
  switch (c) {
    case wire::ErrorClass::AuthFailed:
    case wire::ErrorClass::EnrollRejected:
      return kRejected;
    default:
      return kProtocolErr;
  }
}

const char* error_class_name(wire::ErrorClass c) {
  switch (c) {
    case wire::ErrorClass::MalformedFrame: return "malformed frame";
    case wire::ErrorClass::ProtocolViolation: return "protocol violation";
    case wire::ErrorClass::AuthFailed: return "authentication failed";
    case wire::ErrorClass::EnrollRejected: return "enrollment rejected";
    case wire::ErrorClass::Internal: return "internal server error";
  }
  return "unknown";
}

// Fails the run with the server's error class if the reply is an ERROR frame.
struct ServerError {
  wire::ErrorClass cls;
};

wire::Message recv_message(net::FrameChannel& ch) {
  wire::Message msg = wire::decode(ch.recv_frame());
  if (auto* err = std::get_if<wire::ErrorMsg>(&msg)) throw ServerError{err->error_class};
  return msg;
}

// --- projection model persistence -----------------------------------------
// "THRVPCA", version byte, u32 k, u32 d, then k*d row-major doubles for A and
// d doubles for w, each double the big-endian bytes of its IEEE-754 pattern.

constexpr char kPcaMagic[8] = "THRVPCA";
constexpr uint8_t kPcaVersion = 0x01;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

void put_f64(std::vector<uint8_t>& out, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, 8);
  for (int i = 7; i >= 0; --i) out.push_back(uint8_t(bits >> (8 * i)));
}

void save_pca(const std::string& path, const bio::PcaModel& m) {
  std::vector<uint8_t> out;
  out.insert(out.end(), kPcaMagic, kPcaMagic + 7);
  out.push_back(kPcaVersion);
  put_u32(out, uint32_t(m.A.rows()));
  put_u32(out, uint32_t(m.A.cols()));
  for (Eigen::Index r = 0; r < m.A.rows(); ++r)
    for (Eigen::Index c = 0; c < m.A.cols(); ++c) put_f64(out, m.A(r, c));
  for (Eigen::Index i = 0; i < m.w.size(); ++i) put_f64(out, m.w(i));
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(reinterpret_cast<const char*>(out.data()), std::streamsize(out.size()));
  if (!f) throw std::runtime_error("short write to " + path);
}

bio::PcaModel load_pca(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::vector<uint8_t> in((std::istreambuf_iterator<char>(f)),
                          std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (in.size() - pos < n) throw std::runtime_error(path + ": truncated model file");
  };
  need(8);
  if (std::memcmp(in.data(), kPcaMagic, 7) != 0 || in[7] != kPcaVersion)
    throw std::runtime_error(path + ": not a projection model file");
  pos = 8;
  auto get_u32 = [&] {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | in[pos++];
    return v;
  };
  auto get_f64 = [&] {
    need(8);
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits = (bits << 8) | in[pos++];
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
  };
  uint32_t k = get_u32(), d = get_u32();
  if (k == 0 || d == 0 || k > (1u << 16) || d > (1u << 16))
    throw std::runtime_error(path + ": implausible model dimensions");
  bio::PcaModel m;
  m.A.resize(k, d);
  for (uint32_t r = 0; r < k; ++r)
    for (uint32_t c = 0; c < d; ++c) m.A(r, c) = get_f64();
  m.w.resize(d);
  for (uint32_t i = 0; i < d; ++i) m.w(i) = get_f64();
  if (pos != in.size()) throw std::runtime_error(path + ": trailing bytes");
  return m;
}

// PCA when the sample count supports the biohash length, identity otherwise.
bio::PcaModel train_or_identity(const std::vector<bio::FeatureVector>& samples,
                                uint32_t l, int pca_k, std::string& how) {
  auto d = std::size_t(samples.front().size());
  if (d < l)
    throw std::runtime_error("feature dimension " + std::to_string(d) +
                             " is below the biohash length " + std::to_string(l));
  std::size_t max_k = samples.size() >= 2 ? std::min(samples.size() - 1, d) : 0;
  if (max_k >= l) {
    int k = pca_k > 0 ? pca_k : int(max_k);
    if (std::size_t(k) < l || std::size_t(k) > max_k)
      throw std::runtime_error("pca-k must lie in [" + std::to_string(l) + ", " +
                               std::to_string(max_k) + "]");
    how = "pca k=" + std::to_string(k) + " from " + std::to_string(samples.size()) +
          " samples";
    return bio::pca_train(samples, k);
  }
  how = "identity (training needs at least " + std::to_string(l + 1) + " samples)";
  bio::PcaModel m;
  m.A = Eigen::MatrixXd::Identity(Eigen::Index(d), Eigen::Index(d));
  m.w = Eigen::VectorXd::Zero(Eigen::Index(d));
  return m;
}

bio::FeatureVector first_sample(const std::vector<bio::FeatureVector>& samples) {
  if (samples.empty()) throw std::runtime_error("feature file holds no vectors");
  return samples.front();
}

// --- subcommands -----------------------------------------------------------

struct DealerArgs {
  std::string user_id;
  unsigned security = 80;
  std::vector<std::string> toy_primes;
  uint32_t biohash_len = 256;
  std::string out_dir = ".";
  std::string db_root = "verifier-db";
  std::string verifier_id = "verifier-1";
  std::string seed;
  bool force = false;
};

int run_dealer_setup(const DealerArgs& a) {
  if (!valid_user_id(a.user_id)) {
    std::cerr << "user id must be 1..64 chars of [A-Za-z0-9._-]\n";
    return kUsageErr;
  }
  std::unique_ptr<RandomSource> rng;
  if (a.seed.empty())
    rng = std::make_unique<SystemRandom>();
  else
    rng = std::make_unique<HashDrbg>(a.seed);

  gm::DealerOutput dealer;
  if (!a.toy_primes.empty()) {
    dealer = gm::dealer_keygen_from_primes(BigInt(a.toy_primes[0]),
                                           BigInt(a.toy_primes[1]), 0, *rng, true);
  } else {
    unsigned prime_bits = a.security == 128 ? 1536 : a.security == 112 ? 1024 : 512;
    dealer = gm::dealer_keygen(prime_bits, a.security, *rng);
  }

  fs::path user_path = fs::path(a.out_dir) / (a.user_id + ".user.thrvkey");
  fs::path keys_dir = fs::path(a.db_root) / "keys";
  fs::path verifier_path = keys_dir / (a.user_id + ".verifier.thrvkey");
  fs::path signing_path = keys_dir / "verifier.signing.thrvkey";
  if (!a.force && (fs::exists(user_path) || fs::exists(verifier_path))) {
    std::cerr << "key files for " << a.user_id << " already exist (use --force)\n";
    return kUsageErr;
  }
  fs::create_directories(a.out_dir);
  fs::create_directories(keys_dir);

  sig::SigKeyPair user_sig = sig::sig_keygen(1024, *rng);

  proto::VerifierIdentity identity;
  bool reused_signing = fs::exists(signing_path);
  if (reused_signing) {
    identity = store::load_verifier_signing_file(signing_path.string()).identity;
  } else {
    identity.verifier_id = a.verifier_id;
    identity.sig = sig::sig_keygen(1024, *rng);
    store::VerifierSigningFile sf;
    sf.identity = identity;
    store::save_verifier_signing_file(signing_path.string(), sf);
  }

  store::UserKeyFile uf;
  uf.creds = {a.user_id, dealer.pk, dealer.share1, user_sig, identity.sig.pub};
  uf.verifier_id = identity.verifier_id;
  uf.bio_secret = rng->bytes(32);
  uf.biohash_len = a.biohash_len;
  store::save_user_key_file(user_path.string(), uf);

  store::VerifierUserFile vf;
  vf.entry = {a.user_id, dealer.pk, dealer.share2, user_sig.pub};
  vf.security_bits = dealer.pk.security_bits;
  vf.biohash_len = a.biohash_len;
  store::save_verifier_user_file(verifier_path.string(), vf);

  std::cout << "wrote " << user_path.string() << "\n";
  std::cout << "wrote " << verifier_path.string() << "\n";
  std::cout << "verifier signing key: " << signing_path.string()
            << (reused_signing ? " (reused)" : " (new)") << "\n";
  return kOk;
}

struct ClientArgs {
  std::string key_file;
  std::string features;
  std::string connect = "127.0.0.1:7140";
  bool overwrite = false;
  int pca_k = 0;
  bool verbose = false;
};

int run_enroll(const ClientArgs& a) {
  store::UserKeyFile kf = store::load_user_key_file(a.key_file);
  auto samples = bio::load_features_file(a.features);
  std::string how;
  bio::PcaModel model = train_or_identity(samples, kf.biohash_len, a.pca_k, how);
  bio::Biohash b = bio::biohash(model, kf.bio_secret, int(kf.biohash_len),
                                first_sample(samples));

  SystemRandom rng;
  proto::OpCounters ops;
  wire::EnrollMsg msg = proto::enroll_client(kf.creds, b, a.overwrite, rng, ops);
  auto frame = wire::encode(msg);

  net::TcpChannel ch(net::connect_to(a.connect));
  ch.send_frame(frame);
  wire::Message reply = recv_message(ch);
  if (!std::holds_alternative<wire::EnrollAckMsg>(reply)) {
    std::cerr << "unexpected reply type\n";
    return kProtocolErr;
  }
  save_pca(a.key_file + ".pca", model);
  std::cout << "enrolled " << kf.creds.user_id << ": " << kf.biohash_len
            << " bits, projection " << how << "\n";
  if (a.verbose)
    std::cerr << "encryptions=" << ops.encryptions << " sig_gen=" << ops.sig_gen
              << " bytes_sent=" << ch.bytes_sent() << "\n";
  return kOk;
}

int run_authenticate(const ClientArgs& a) {
  store::UserKeyFile kf = store::load_user_key_file(a.key_file);
  std::string model_path = a.key_file + ".pca";
  if (!fs::exists(model_path)) {
    std::cerr << model_path << " not found; enroll first\n";
    return kUsageErr;
  }
  bio::PcaModel model = load_pca(model_path);
  bio::FeatureVector probe = first_sample(bio::load_features_file(a.features));
  if (model.A.cols() != probe.size()) {
    std::cerr << "probe dimension " << probe.size() << " does not match the model ("
              << model.A.cols() << ")\n";
    return kUsageErr;
  }
  bio::Biohash b = bio::biohash(model, kf.bio_secret, int(kf.biohash_len), probe);

  SystemRandom rng;
  proto::ClientAuthState cs;
  net::TcpChannel ch(net::connect_to(a.connect));
  ch.send_frame(wire::encode(proto::auth_round1_user(cs, kf.creds, b, rng)));

  wire::Message m2 = recv_message(ch);
  auto* challenge = std::get_if<wire::AuthChallengeMsg>(&m2);
  if (challenge == nullptr) {
    std::cerr << "unexpected reply type\n";
    return kProtocolErr;
  }
  ch.send_frame(wire::encode(proto::auth_round3_user(cs, kf.creds, *challenge, rng)));

  wire::Message m4 = recv_message(ch);
  auto* decision = std::get_if<wire::DecisionMsg>(&m4);
  if (decision == nullptr) {
    std::cerr << "unexpected reply type\n";
    return kProtocolErr;
  }
  proto::ClientOutcome out = proto::auth_finish_user(cs, kf.creds, *decision);
  if (!out.decision_valid) {
    std::cerr << "decision failed signature or nonce verification\n";
    return kProtocolErr;
  }
  if (a.verbose)
    std::cerr << "encryptions=" << cs.ops.encryptions
              << " share_exps=" << cs.ops.share_exps
              << " bytes=" << ch.bytes_sent() + ch.bytes_received() << "\n";
  std::cout << (out.accept ? "accepted" : "rejected") << "\n";
  return out.accept ? kOk : kRejected;
}

struct ServeArgs {
  std::string config_file;
  std::string listen = "127.0.0.1:7140";
  std::string db_root;
  std::string key_dir;
  uint32_t biohash_len = 256;
  uint32_t mu = 0;
  uint64_t skew = 120;
  uint32_t max_sessions = 64;
};

int run_serve(const ServeArgs& a) {
  ServiceConfig cfg;
  if (!a.config_file.empty()) {
    cfg = service_config_from_file(a.config_file);
  } else {
    if (a.db_root.empty()) {
      std::cerr << "--db-root (or --config) is required\n";
      return kUsageErr;
    }
    if (!is_supported_biohash_len(a.biohash_len)) {
      std::cerr << "biohash-len must be one of 112, 192, 256, 512, 2048\n";
      return kUsageErr;
    }
    cfg.listen = a.listen;
    cfg.db_root = a.db_root;
    cfg.biohash_len = a.biohash_len;
    cfg.mu = a.mu;
    cfg.skew_secs = a.skew;
    cfg.max_sessions = a.max_sessions;
  }
  std::string key_dir = a.key_dir.empty() ? cfg.db_root + "/keys" : a.key_dir;

  svc::VerifierService service(cfg, store::KeyStore::load(key_dir), std::cout);
  service.start();
  std::cout << "listening on " << cfg.listen << " (port " << service.port()
            << "), mu=" << service.protocol_config().mu << "\n";

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) {
    timespec ts{0, 100 * 1000 * 1000};
    nanosleep(&ts, nullptr);
  }
  std::cout << "shutting down\n";
  service.stop();
  return kOk;
}

struct BenchArgs {
  std::vector<uint32_t> lengths;
  uint32_t runs = 3;
  uint32_t prime_bits = 512;
  uint32_t sig_bits = 1024;
  std::string seed = "thrive-bench";
  bool tcp = false;
  std::string csv;
};

int run_bench_cmd(const BenchArgs& a) {
  bench::BenchOptions opts;
  opts.lengths = a.lengths;
  opts.runs = a.runs;
  opts.prime_bits = a.prime_bits;
  opts.sig_bits = a.sig_bits;
  opts.seed = a.seed;
  opts.tcp_parity = a.tcp;
  bench::BenchReport rep = bench::run_bench(opts, std::cerr);
  rep.render_text(std::cout);
  if (!a.csv.empty()) {
    std::ofstream f(a.csv, std::ios::trunc);
    if (!f) {
      std::cerr << "cannot write " << a.csv << "\n";
      return kUsageErr;
    }
    rep.render_csv(f);
  }
  return rep.all_ok ? kOk : kRejected;
}

int run_biohash(const ClientArgs& a) {
  store::UserKeyFile kf = store::load_user_key_file(a.key_file);
  auto samples = bio::load_features_file(a.features);
  std::string model_path = a.key_file + ".pca";
  bio::PcaModel model;
  std::string how;
  if (fs::exists(model_path))
    model = load_pca(model_path);
  else
    model = train_or_identity(samples, kf.biohash_len, a.pca_k, how);
  bio::Biohash b = bio::biohash(model, kf.bio_secret, int(kf.biohash_len),
                                first_sample(samples));
  auto packed = bio::pack_bits(b.bits);
  std::cout << hex_encode({packed.data(), packed.size()}) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"threshold homomorphic biometric verification"};
  app.require_subcommand(1);

  DealerArgs da;
  auto* dealer = app.add_subcommand(
      "dealer-setup", "generate keys for one user and split them between the parties");
  dealer->add_option("--user", da.user_id, "user identifier")->required();
  dealer->add_option("--security", da.security, "security level in bits")
      ->check(CLI::IsMember({80u, 112u, 128u}));
  dealer->add_option("--toy-primes", da.toy_primes,
                     "comma-separated Blum primes p,q for reproducible toy keys")
      ->expected(2)
      ->delimiter(',');
  dealer->add_option("--biohash-len", da.biohash_len, "template length in bits")
      ->check(CLI::Range(8u, 65536u));
  dealer->add_option("--out-dir", da.out_dir, "directory for the user key file");
  dealer->add_option("--db-root", da.db_root, "verifier database root");
  dealer->add_option("--verifier-id", da.verifier_id,
                     "verifier identity when creating its signing key");
  dealer->add_option("--seed", da.seed, "deterministic key generation seed");
  dealer->add_flag("--force", da.force, "replace existing key files");

  ClientArgs ea;
  auto* enroll = app.add_subcommand("enroll", "enroll an encrypted template");
  enroll->add_option("--key-file", ea.key_file, "user key file")->required();
  enroll->add_option("--features", ea.features, "CSV of feature vectors")->required();
  enroll->add_option("--connect", ea.connect, "verifier address host:port");
  enroll->add_flag("--overwrite", ea.overwrite, "replace an existing enrollment");
  enroll->add_option("--pca-k", ea.pca_k, "projection rank override");
  enroll->add_flag("--verbose", ea.verbose, "print operation counts to stderr");

  ClientArgs aa;
  auto* auth = app.add_subcommand("authenticate", "run one authentication");
  auth->add_option("--key-file", aa.key_file, "user key file")->required();
  auth->add_option("--features", aa.features, "CSV with the probe vector")->required();
  auth->add_option("--connect", aa.connect, "verifier address host:port");
  auth->add_flag("--verbose", aa.verbose, "print operation counts to stderr");

  ServeArgs sa;
  auto* serve = app.add_subcommand("serve", "run the verifier service");
  serve->add_option("--config", sa.config_file, "key=value config file");
  serve->add_option("--listen", sa.listen, "bind address host:port");
  serve->add_option("--db-root", sa.db_root, "verifier database root");
  serve->add_option("--key-dir", sa.key_dir, "key directory (default db-root/keys)");
  serve->add_option("--biohash-len", sa.biohash_len, "expected template length");
  serve->add_option("--mu", sa.mu, "acceptance threshold (0 derives length/4)");
  serve->add_option("--skew", sa.skew, "accepted nonce age in seconds");
  serve->add_option("--max-sessions", sa.max_sessions, "concurrent session cap");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "measure bandwidth, ops, and latency");
  bench_cmd->add_option("--lengths", ba.lengths, "biohash lengths to measure")
      ->delimiter(',');
  bench_cmd->add_option("--runs", ba.runs, "measured runs per length")
      ->check(CLI::Range(1u, 1000u));
  bench_cmd->add_option("--prime-bits", ba.prime_bits, "prime size in bits")
      ->check(CLI::Range(16u, 4096u));
  bench_cmd->add_option("--sig-bits", ba.sig_bits, "signature modulus bits")
      ->check(CLI::Range(288u, 8192u));
  bench_cmd->add_option("--seed", ba.seed, "deterministic bench seed");
  bench_cmd->add_flag("--tcp", ba.tcp, "also check byte parity against a live service");
  bench_cmd->add_option("--csv", ba.csv, "write the report as CSV to this file");

  ClientArgs ha;
  auto* bh = app.add_subcommand("biohash", "print the hex biohash for a feature file");
  bh->add_option("--key-file", ha.key_file, "user key file")->required();
  bh->add_option("--features", ha.features, "CSV of feature vectors")->required();
  bh->add_option("--pca-k", ha.pca_k, "projection rank override");

  int rc = kOk;
  dealer->callback([&] { rc = run_dealer_setup(da); });
  enroll->callback([&] { rc = run_enroll(ea); });
  auth->callback([&] { rc = run_authenticate(aa); });
  serve->callback([&] { rc = run_serve(sa); });
  bench_cmd->callback([&] { rc = run_bench_cmd(ba); });
  bh->callback([&] { rc = run_biohash(ha); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsageErr;
  } catch (const ServerError& e) {
    std::cerr << "server error: " << error_class_name(e.cls) << "\n";
    return exit_code_for(e.cls);
  } catch (const net::TransportError& e) {
    std::cerr << "network error: " << e.what() << "\n";
    return kNetworkErr;
  } catch (const proto::ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kProtocolErr;
  } catch (const wire::WireError& e) {
    std::cerr << "malformed reply: " << e.what() << "\n";
    return kProtocolErr;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageErr;
  }
  return rc;
}

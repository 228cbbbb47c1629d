#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "thrive/protocol.hpp"

namespace thrive::bench {

struct BenchOptions {
  std::vector<uint32_t> lengths;  // empty means all supported lengths
  uint32_t runs = 3;              // measured authentications per length
  uint32_t prime_bits = 512;      // 1024-bit modulus, the reference setting
  uint32_t sig_bits = 1024;
  std::string seed = "thrive-bench";
  bool tcp_parity = false;  // re-run one auth against a live TCP service
};

struct BenchRow {
  uint32_t length = 0;
  uint64_t auth_bits = 0;     // bytes on the wire for one authentication, x8
  uint64_t enroll_bits = 0;   // enrollment frame plus ack, informational
  double auth_kbit = 0.0;     // auth_bits / 1000
  double ref_kbit = 0.0;
  double deviation_pct = 0.0;
  bool bandwidth_ok = false;

  proto::OpCounters ops;      // one authentication, both parties
  uint64_t mults_reported = 0;  // ciphertext mults with the combine chain
                                // counted once per run
  bool counters_ok = false;

  double user_ms = 0.0;      // median over runs
  double verifier_ms = 0.0;
  double total_ms = 0.0;
  bool accepted = false;
  bool tcp_match = false;    // only meaningful when tcp_parity was requested
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::string cpu_model;
  uint32_t prime_bits = 0;
  uint32_t runs = 0;
  bool tcp_parity = false;
  bool all_ok = false;

  void render_text(std::ostream& os) const;
  void render_csv(std::ostream& os) const;
};

// Reference bandwidth per authentication in Kbit (1 Kbit = 1000 bits) for a
// 1024-bit modulus, and the tolerance the measurement is held to.
std::optional<double> reference_kbit(uint32_t length);
constexpr double kBandwidthTolerancePct = 2.0;

BenchReport run_bench(const BenchOptions& opts, std::ostream& log);

}  // namespace thrive::bench

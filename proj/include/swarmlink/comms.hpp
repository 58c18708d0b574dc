#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "swarmlink/common.hpp"
#include "swarmlink/dsp.hpp"

namespace swarmlink::comms {

using RobotId = int;
using Bytes = std::vector<std::uint8_t>;
using Rng = std::mt19937_64;

inline constexpr std::size_t kDefaultMtu = 256;

struct ChannelPlan {
  int num_channels = 0;
  std::map<RobotId, int> assignments;

  int channel_of(RobotId id) const;  ///< throws InvalidArgument for unknown robots
  std::optional<RobotId> owner(int channel) const;
  bool contains(RobotId id) const { return assignments.count(id) != 0; }
};

/// Sorted robot ids take channels 0, 1, 2 ... in order.
ChannelPlan assign_channels(std::vector<RobotId> robot_ids, int num_channels);

struct Message {
  RobotId sender = 0;
  Bytes payload;
  double send_time = 0.0;

  friend bool operator==(const Message&, const Message&) = default;
};

// ---------------------------------------------------------------------------
// AES-128

struct CipherKey {
  std::array<std::uint8_t, 16> bytes{};

  static CipherKey from_bytes(std::span<const std::uint8_t> raw);  ///< exactly 16 bytes
  static CipherKey from_hex(const std::string& hex);
  /// Deterministic key for simulations.
  static CipherKey from_seed(std::uint64_t seed);
};

struct Nonce {
  std::uint32_t robot = 0;
  std::uint64_t counter = 0;

  /// Initial counter block: robot (4 bytes BE), counter (8 bytes BE), block index 0 (4 bytes).
  std::array<std::uint8_t, 16> counter_block() const;
};

using Block = std::array<std::uint8_t, 16>;

/// Single-block AES-128 encryption (no chaining).
Block aes128_encrypt_block(const CipherKey& key, const Block& plaintext);
/// Raw AES-128-CTR with a caller-supplied initial counter block.
Bytes aes128_ctr(const CipherKey& key, const Block& initial_counter, std::span<const std::uint8_t> data);

Bytes encrypt(const CipherKey& key, const Nonce& nonce, std::span<const std::uint8_t> plaintext);
Bytes decrypt(const CipherKey& key, const Nonce& nonce, std::span<const std::uint8_t> ciphertext);

/// Frames messages as a clear header (sender, counter, send time, length)
/// followed by the CTR ciphertext. Counters are per sender and never repeat.
class SecureLink {
 public:
  explicit SecureLink(CipherKey key, std::size_t mtu = kDefaultMtu) : key_(key), mtu_(mtu) {}

  static constexpr std::size_t kHeaderBytes = 16;

  Bytes seal(const Message& m);
  /// nullopt when the frame is malformed or not from `expected_sender`.
  std::optional<Message> open(std::span<const std::uint8_t> frame, std::optional<RobotId> expected_sender = {}) const;

  std::size_t mtu() const { return mtu_; }
  std::uint64_t next_counter(RobotId id) const;

 private:
  CipherKey key_;
  std::size_t mtu_;
  std::map<RobotId, std::uint64_t> counters_;
};

// ---------------------------------------------------------------------------
// Loss

struct LossModel {
  enum class Mode { bernoulli, gilbert_elliott };
  Mode mode = Mode::bernoulli;
  double p = 0.0;  ///< bernoulli drop probability
  double p_good_to_bad = 0.0;
  double p_bad_to_good = 1.0;
  double loss_good = 0.0;
  double loss_bad = 1.0;
  double latency = 0.0;

  void validate() const;

  static LossModel bernoulli(double p, double latency = 0.0);
  static LossModel gilbert_elliott(double p_gb, double p_bg, double loss_good, double loss_bad, double latency = 0.0);
  /// Mean burst 2 s, mean good period 20 s, for transitions once per `dt`.
  static LossModel intermittent(double dt);
};

/// Per-link Gilbert-Elliott state (sender, receiver) -> bad.
class LinkTable {
 public:
  /// One Markov transition for every ordered pair of distinct robots in the plan.
  void advance(const ChannelPlan& plan, const LossModel& loss, Rng& rng);
  bool bad(RobotId from, RobotId to) const;
  void reset() { bad_.clear(); }

 private:
  std::map<std::pair<RobotId, RobotId>, bool> bad_;
};

struct Delivery {
  RobotId receiver = 0;
  Message message;
  double deliver_time = 0.0;
};

struct TraceEvent {
  enum class Kind { sent, dropped, delivered };
  Kind kind = Kind::sent;
  double t = 0.0;
  RobotId sender = 0;
  std::optional<RobotId> receiver;
  std::size_t bytes = 0;
};

/// Broadcast each message to every other robot in the plan, dropping per link.
/// Link state must already be advanced for this step. Optionally appends trace events.
std::vector<Delivery> deliver(std::span<const Message> messages, const ChannelPlan& plan, const LossModel& loss,
                              const LinkTable& links, Rng& rng, double t, std::vector<TraceEvent>* trace = nullptr);

std::string trace_jsonl(std::span<const TraceEvent> events);

// ---------------------------------------------------------------------------
// Physical-layer loopback

struct ModemResult {
  std::vector<Message> delivered;
  dsp::IqBuffer last_composite;  ///< wideband signal of the final round
};

/// encrypt -> GMSK -> synthesize -> channelize -> demodulate -> decrypt.
/// Each round carries at most one message per sender; unused channels are not demodulated.
ModemResult modem_roundtrip(std::span<const Message> messages, const ChannelPlan& plan,
                            const dsp::ChannelizerSpec& spec, const dsp::GmskParams& gmsk, SecureLink& link,
                            double sample_rate = 1.0);

}  // namespace swarmlink::comms

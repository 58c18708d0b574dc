#include "swarmlink/comms.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <memory>
#include <json.hpp>
#include <set>

namespace swarmlink::comms {

int ChannelPlan::channel_of(RobotId id) const {
  auto it = assignments.find(id);
  if (it == assignments.end()) throw InvalidArgument("robot " + std::to_string(id) + " has no channel");
  return it->second;
}

std::optional<RobotId> ChannelPlan::owner(int channel) const {
  for (const auto& [id, ch] : assignments)
    if (ch == channel) return id;
  return std::nullopt;
}

ChannelPlan assign_channels(std::vector<RobotId> robot_ids, int num_channels) {
  if (num_channels < 1) throw InvalidArgument("num_channels must be positive");
  std::sort(robot_ids.begin(), robot_ids.end());
  if (std::adjacent_find(robot_ids.begin(), robot_ids.end()) != robot_ids.end()) {
    throw InvalidArgument("duplicate robot id");
  }
  if (robot_ids.size() > static_cast<std::size_t>(num_channels)) {
    throw InvalidArgument(std::to_string(robot_ids.size()) + " robots but only " + std::to_string(num_channels) +
                          " channels");
  }
  ChannelPlan plan;
  plan.num_channels = num_channels;
  for (std::size_t i = 0; i < robot_ids.size(); ++i) plan.assignments[robot_ids[i]] = static_cast<int>(i);
  return plan;
}

// ---------------------------------------------------------------------------

CipherKey CipherKey::from_bytes(std::span<const std::uint8_t> raw) {
  if (raw.size() != 16) throw InvalidArgument("AES-128 key must be 16 bytes, got " + std::to_string(raw.size()));
  CipherKey k;
  std::copy(raw.begin(), raw.end(), k.bytes.begin());
  return k;
}

CipherKey CipherKey::from_hex(const std::string& hex) {
  if (hex.size() != 32) throw InvalidArgument("AES-128 key must be 32 hex digits");
  Bytes raw;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    auto nib = [&](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      throw InvalidArgument("bad hex digit in key");
    };
    raw.push_back(static_cast<std::uint8_t>(nib(hex[i]) * 16 + nib(hex[i + 1])));
  }
  return from_bytes(raw);
}

CipherKey CipherKey::from_seed(std::uint64_t seed) {
  CipherKey k;
  const std::uint64_t a = mix64(seed ^ 0x6b6579ULL);
  const std::uint64_t b = mix64(a);
  for (int i = 0; i < 8; ++i) {
    k.bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(a >> (8 * i));
    k.bytes[static_cast<std::size_t>(8 + i)] = static_cast<std::uint8_t>(b >> (8 * i));
  }
  return k;
}

std::array<std::uint8_t, 16> Nonce::counter_block() const {
  Block b{};
  for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(robot >> (24 - 8 * i));
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(4 + i)] = static_cast<std::uint8_t>(counter >> (56 - 8 * i));
  return b;
}

namespace {

struct CtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};

Bytes run_cipher(const EVP_CIPHER* cipher, const CipherKey& key, const std::uint8_t* iv,
                 std::span<const std::uint8_t> data) {
  std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter> ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), cipher, nullptr, key.bytes.data(), iv) != 1) {
    throw std::runtime_error("AES initialisation failed");
  }
  EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
  Bytes out(data.size() + 16);
  int n = 0;
  int tail = 0;
  if (!data.empty() &&
      EVP_EncryptUpdate(ctx.get(), out.data(), &n, data.data(), static_cast<int>(data.size())) != 1) {
    throw std::runtime_error("AES update failed");
  }
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + n, &tail) != 1) throw std::runtime_error("AES final failed");
  out.resize(static_cast<std::size_t>(n + tail));
  return out;
}

}  // namespace

Block aes128_encrypt_block(const CipherKey& key, const Block& plaintext) {
  const auto out = run_cipher(EVP_aes_128_ecb(), key, nullptr, plaintext);
  Block b{};
  std::copy_n(out.begin(), 16, b.begin());
  return b;
}

Bytes aes128_ctr(const CipherKey& key, const Block& initial_counter, std::span<const std::uint8_t> data) {
  return run_cipher(EVP_aes_128_ctr(), key, initial_counter.data(), data);
}

Bytes encrypt(const CipherKey& key, const Nonce& nonce, std::span<const std::uint8_t> plaintext) {
  return aes128_ctr(key, nonce.counter_block(), plaintext);
}

Bytes decrypt(const CipherKey& key, const Nonce& nonce, std::span<const std::uint8_t> ciphertext) {
  return aes128_ctr(key, nonce.counter_block(), ciphertext);
}

namespace {

template <typename T>
void put_be(Bytes& out, T v) {
  for (int i = static_cast<int>(sizeof(T)) - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get_be(std::span<const std::uint8_t> in, std::size_t at) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v = static_cast<T>((v << 8) | in[at + i]);
  return v;
}

}  // namespace

Bytes SecureLink::seal(const Message& m) {
  if (m.payload.size() > mtu_) throw InvalidArgument("payload exceeds MTU");
  if (m.sender < 0 || m.sender > 0xffff) throw InvalidArgument("sender id out of frame range");
  auto& counter = counters_[m.sender];
  if (counter > 0xffffffffULL) throw InvalidArgument("nonce counter exhausted");
  const Nonce nonce{static_cast<std::uint32_t>(m.sender), counter};
  ++counter;
  Bytes frame;
  frame.reserve(kHeaderBytes + m.payload.size());
  put_be(frame, static_cast<std::uint16_t>(m.sender));
  put_be(frame, static_cast<std::uint32_t>(nonce.counter));
  put_be(frame, std::bit_cast<std::uint64_t>(m.send_time));
  put_be(frame, static_cast<std::uint16_t>(m.payload.size()));
  const auto ct = encrypt(key_, nonce, m.payload);
  frame.insert(frame.end(), ct.begin(), ct.end());
  return frame;
}

std::optional<Message> SecureLink::open(std::span<const std::uint8_t> frame, std::optional<RobotId> expected) const {
  if (frame.size() < kHeaderBytes) return std::nullopt;
  const auto sender = static_cast<RobotId>(get_be<std::uint16_t>(frame, 0));
  const auto counter = get_be<std::uint32_t>(frame, 2);
  const double t = std::bit_cast<double>(get_be<std::uint64_t>(frame, 6));
  const std::size_t len = get_be<std::uint16_t>(frame, 14);
  if (expected && *expected != sender) return std::nullopt;
  if (len > mtu_ || frame.size() < kHeaderBytes + len || !std::isfinite(t)) return std::nullopt;
  Message m;
  m.sender = sender;
  m.send_time = t;
  m.payload = decrypt(key_, {static_cast<std::uint32_t>(sender), counter}, frame.subspan(kHeaderBytes, len));
  return m;
}

std::uint64_t SecureLink::next_counter(RobotId id) const {
  auto it = counters_.find(id);
  return it == counters_.end() ? 0 : it->second;
}

// ---------------------------------------------------------------------------

void LossModel::validate() const {
  auto prob = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(name) + " must be in [0,1]");
  };
  prob(p, "p");
  prob(p_good_to_bad, "p_good_to_bad");
  prob(p_bad_to_good, "p_bad_to_good");
  prob(loss_good, "loss_good");
  prob(loss_bad, "loss_bad");
  if (!(latency >= 0.0) || !std::isfinite(latency)) throw InvalidArgument("latency must be >= 0");
}

LossModel LossModel::bernoulli(double p, double latency) {
  LossModel m;
  m.mode = Mode::bernoulli;
  m.p = p;
  m.latency = latency;
  m.validate();
  return m;
}

LossModel LossModel::gilbert_elliott(double p_gb, double p_bg, double loss_good, double loss_bad, double latency) {
  LossModel m;
  m.mode = Mode::gilbert_elliott;
  m.p_good_to_bad = p_gb;
  m.p_bad_to_good = p_bg;
  m.loss_good = loss_good;
  m.loss_bad = loss_bad;
  m.latency = latency;
  m.validate();
  return m;
}

LossModel LossModel::intermittent(double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  return gilbert_elliott(std::min(1.0, dt / 20.0), std::min(1.0, dt / 2.0), 0.0, 1.0);
}

void LinkTable::advance(const ChannelPlan& plan, const LossModel& loss, Rng& rng) {
  if (loss.mode != LossModel::Mode::gilbert_elliott) return;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& [from, cf] : plan.assignments) {
    for (const auto& [to, ct] : plan.assignments) {
      if (from == to) continue;
      bool& state = bad_[{from, to}];
      const double draw = u(rng);
      state = state ? !(draw < loss.p_bad_to_good) : draw < loss.p_good_to_bad;
    }
  }
}

bool LinkTable::bad(RobotId from, RobotId to) const {
  auto it = bad_.find({from, to});
  return it != bad_.end() && it->second;
}

std::vector<Delivery> deliver(std::span<const Message> messages, const ChannelPlan& plan, const LossModel& loss,
                              const LinkTable& links, Rng& rng, double t, std::vector<TraceEvent>* trace) {
  std::vector<Delivery> out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& m : messages) {
    if (!plan.contains(m.sender)) throw InvalidArgument("unknown sender " + std::to_string(m.sender));
    if (trace) trace->push_back({TraceEvent::Kind::sent, t, m.sender, std::nullopt, m.payload.size()});
    for (const auto& [rx, ch] : plan.assignments) {
      if (rx == m.sender) continue;
      double drop = loss.p;
      if (loss.mode == LossModel::Mode::gilbert_elliott) {
        drop = links.bad(m.sender, rx) ? loss.loss_bad : loss.loss_good;
      }
      // Degenerate probabilities consume no randomness so results do not depend on draw order.
      const bool lost = drop >= 1.0 || (drop > 0.0 && u(rng) < drop);
      if (lost) {
        if (trace) trace->push_back({TraceEvent::Kind::dropped, t, m.sender, rx, m.payload.size()});
        continue;
      }
      out.push_back({rx, m, t + loss.latency});
      if (trace) trace->push_back({TraceEvent::Kind::delivered, t + loss.latency, m.sender, rx, m.payload.size()});
    }
  }
  return out;
}

std::string trace_jsonl(std::span<const TraceEvent> events) {
  std::string out;
  for (const auto& e : events) {
    nlohmann::json j;
    j["t"] = e.t;
    j["event"] = e.kind == TraceEvent::Kind::sent ? "sent" : e.kind == TraceEvent::Kind::dropped ? "dropped" : "delivered";
    j["sender"] = e.sender;
    if (e.receiver) j["receiver"] = *e.receiver;
    j["bytes"] = e.bytes;
    out += j.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

ModemResult modem_roundtrip(std::span<const Message> messages, const ChannelPlan& plan,
                            const dsp::ChannelizerSpec& spec, const dsp::GmskParams& gmsk, SecureLink& link,
                            double sample_rate) {
  spec.validate();
  gmsk.validate();
  if (plan.num_channels != spec.num_channels) throw InvalidArgument("channel plan does not match channelizer");
  ModemResult result;

  // Queue per sender; round k carries each sender's k-th message.
  std::map<RobotId, std::vector<const Message*>> queues;
  for (const auto& m : messages) {
    if (!plan.contains(m.sender)) throw InvalidArgument("unknown sender " + std::to_string(m.sender));
    queues[m.sender].push_back(&m);
  }
  std::size_t rounds = 0;
  for (const auto& [id, q] : queues) rounds = std::max(rounds, q.size());

  const std::size_t m_ch = static_cast<std::size_t>(spec.num_channels);
  for (std::size_t round = 0; round < rounds; ++round) {
    std::vector<dsp::IqBuffer> channels(m_ch);
    std::set<int> used;
    std::size_t longest = 0;
    for (const auto& [id, q] : queues) {
      if (round >= q.size()) continue;
      const int ch = plan.channel_of(id);
      const auto frame = link.seal(*q[round]);
      channels[static_cast<std::size_t>(ch)] =
          dsp::gmsk_modulate(dsp::bytes_to_bits(frame), gmsk, sample_rate / static_cast<double>(m_ch));
      used.insert(ch);
      longest = std::max(longest, channels[static_cast<std::size_t>(ch)].size());
    }
    // Trailing silence lets the filterbank flush its delay line.
    const std::size_t len = longest + static_cast<std::size_t>(spec.roundtrip_delay());
    for (auto& c : channels) {
      c.sample_rate = sample_rate / static_cast<double>(m_ch);
      c.samples.resize(len, dsp::cf64{});
    }
    result.last_composite = dsp::synthesize(channels, spec);
    const auto split = dsp::channelize(result.last_composite, spec);
    for (int ch : used) {
      const auto owner = plan.owner(ch);
      auto bits = dsp::gmsk_demodulate(split[static_cast<std::size_t>(ch)], gmsk);
      auto bytes = dsp::bits_to_bytes(bits);
      if (auto msg = link.open(bytes, owner)) result.delivered.push_back(std::move(*msg));
    }
  }
  return result;
}

}  // namespace swarmlink::comms

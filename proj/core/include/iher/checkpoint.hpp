#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "iher/agent.hpp"
#include "iher/dynamics.hpp"
#include "iher/mlp.hpp"
#include "iher/replay.hpp"

namespace iher {

// Checkpoint files start with the magic string "IHER1" followed by
// length-prefixed named sections:
//   [u32 name_len][name bytes][u64 payload_len][payload bytes] ...
// Payloads are little-endian fixed-width scalars written in a fixed order per
// structure; see checkpoint.cpp. Round-trips are bit-exact.

inline constexpr char kCheckpointMagic[] = "IHER1";

struct ByteWriter {
  std::string buf;

  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(long long v);
  void f64(double v);
  void str(const std::string& s);
  void vec(const std::vector<double>& v);
  void ivec(const std::vector<int>& v);
};

// Throws std::runtime_error("checkpoint truncated ...") on overrun.
struct ByteReader {
  const std::string* buf;
  std::size_t pos = 0;

  explicit ByteReader(const std::string& b) : buf(&b) {}

  std::uint32_t u32();
  std::uint64_t u64();
  long long i64();
  double f64();
  std::string str();
  std::vector<double> vec();
  std::vector<int> ivec();
  bool done() const { return pos == buf->size(); }

 private:
  void need(std::size_t n) const;
};

void write_checkpoint_file(const std::string& path, const std::vector<std::pair<std::string, std::string>>& sections);
std::map<std::string, std::string> read_checkpoint_file(const std::string& path);

// structure serializers, reused by the trainer checkpoint
void put_mlp(ByteWriter& w, const Mlp& net);
Mlp get_mlp(ByteReader& r);
void put_adam(ByteWriter& w, const AdamState& st);
AdamState get_adam(ByteReader& r);
void put_running_normalizer(ByteWriter& w, const RunningNormalizer& n);
RunningNormalizer get_running_normalizer(ByteReader& r);
void put_normalizer(ByteWriter& w, const Normalizer& n);
Normalizer get_normalizer(ByteReader& r);
void put_frozen_policy(ByteWriter& w, const FrozenPolicy& p);
FrozenPolicy get_frozen_policy(ByteReader& r);
void put_episode(ByteWriter& w, const Episode& e);
Episode get_episode(ByteReader& r);
void put_buffer(ByteWriter& w, const EpisodeBuffer& b);
EpisodeBuffer get_buffer(ByteReader& r);

}  // namespace iher

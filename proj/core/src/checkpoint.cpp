#include "iher/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace iher {

namespace {

template <typename T>
void put_raw(std::string& buf, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.append(bytes, sizeof(T));
}

}  // namespace

void ByteWriter::u32(std::uint32_t v) { put_raw(buf, v); }
void ByteWriter::u64(std::uint64_t v) { put_raw(buf, v); }
void ByteWriter::i64(long long v) { put_raw(buf, v); }
void ByteWriter::f64(double v) { put_raw(buf, v); }

void ByteWriter::str(const std::string& s) {
  u64(s.size());
  buf.append(s);
}

void ByteWriter::vec(const std::vector<double>& v) {
  u64(v.size());
  for (double d : v) f64(d);
}

void ByteWriter::ivec(const std::vector<int>& v) {
  u64(v.size());
  for (int d : v) i64(d);
}

void ByteReader::need(std::size_t n) const {
  if (pos + n > buf->size()) throw std::runtime_error("checkpoint truncated: section payload ends early");
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v;
  std::memcpy(&v, buf->data() + pos, 4);
  pos += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v;
  std::memcpy(&v, buf->data() + pos, 8);
  pos += 8;
  return v;
}

long long ByteReader::i64() {
  need(8);
  long long v;
  std::memcpy(&v, buf->data() + pos, 8);
  pos += 8;
  return v;
}

double ByteReader::f64() {
  need(8);
  double v;
  std::memcpy(&v, buf->data() + pos, 8);
  pos += 8;
  return v;
}

std::string ByteReader::str() {
  const std::uint64_t n = u64();
  need(n);
  std::string s(buf->data() + pos, n);
  pos += n;
  return s;
}

std::vector<double> ByteReader::vec() {
  const std::uint64_t n = u64();
  need(n * 8);
  std::vector<double> v(n);
  std::memcpy(v.data(), buf->data() + pos, n * 8);
  pos += n * 8;
  return v;
}

std::vector<int> ByteReader::ivec() {
  const std::uint64_t n = u64();
  std::vector<int> v(n);
  for (std::uint64_t i = 0; i < n; ++i) v[i] = static_cast<int>(i64());
  return v;
}

void write_checkpoint_file(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& sections) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open checkpoint file for writing: " + path);
  f.write(kCheckpointMagic, 5);
  for (const auto& [name, payload] : sections) {
    const std::uint32_t nlen = static_cast<std::uint32_t>(name.size());
    f.write(reinterpret_cast<const char*>(&nlen), 4);
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    const std::uint64_t plen = payload.size();
    f.write(reinterpret_cast<const char*>(&plen), 8);
    f.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  }
  if (!f) throw std::runtime_error("checkpoint write failed: " + path);
}

std::map<std::string, std::string> read_checkpoint_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint file: " + path);
  char magic[5];
  if (!f.read(magic, 5) || std::memcmp(magic, kCheckpointMagic, 5) != 0)
    throw std::runtime_error("not an IHER1 checkpoint (bad magic string): " + path);

  std::map<std::string, std::string> sections;
  while (true) {
    std::uint32_t nlen;
    if (!f.read(reinterpret_cast<char*>(&nlen), 4)) {
      if (f.eof()) break;
      throw std::runtime_error("checkpoint truncated: " + path);
    }
    if (nlen > 64) throw std::runtime_error("checkpoint corrupt: unreasonable section name length");
    std::string name(nlen, '\0');
    if (!f.read(name.data(), nlen)) throw std::runtime_error("checkpoint truncated in section name: " + path);
    std::uint64_t plen;
    if (!f.read(reinterpret_cast<char*>(&plen), 8))
      throw std::runtime_error("checkpoint truncated in section header: " + path);
    std::string payload(plen, '\0');
    if (plen > 0 && !f.read(payload.data(), static_cast<std::streamsize>(plen)))
      throw std::runtime_error("checkpoint truncated in section '" + name + "': " + path);
    sections.emplace(std::move(name), std::move(payload));
  }
  return sections;
}

void put_mlp(ByteWriter& w, const Mlp& net) {
  w.ivec(net.layer_sizes);
  w.i64(static_cast<long long>(net.hidden_activation));
  w.i64(static_cast<long long>(net.output_activation));
  for (const Layer& l : net.layers) {
    w.vec(l.w);
    w.vec(l.b);
  }
}

Mlp get_mlp(ByteReader& r) {
  Mlp net;
  net.layer_sizes = r.ivec();
  net.hidden_activation = static_cast<Activation>(r.i64());
  net.output_activation = static_cast<Activation>(r.i64());
  for (std::size_t i = 0; i + 1 < net.layer_sizes.size(); ++i) {
    Layer l;
    l.in = net.layer_sizes[i];
    l.out = net.layer_sizes[i + 1];
    l.w = r.vec();
    l.b = r.vec();
    if (l.w.size() != static_cast<std::size_t>(l.in) * l.out || l.b.size() != static_cast<std::size_t>(l.out))
      throw std::runtime_error("checkpoint corrupt: layer shape mismatch");
    net.layers.push_back(std::move(l));
  }
  return net;
}

void put_adam(ByteWriter& w, const AdamState& st) {
  w.f64(st.learning_rate);
  w.f64(st.beta1);
  w.f64(st.beta2);
  w.f64(st.epsilon);
  w.i64(st.step_count);
  w.u64(st.first_moment.size());
  for (const std::vector<Layer>* moments : {&st.first_moment, &st.second_moment}) {
    for (const Layer& l : *moments) {
      w.i64(l.in);
      w.i64(l.out);
      w.vec(l.w);
      w.vec(l.b);
    }
  }
}

AdamState get_adam(ByteReader& r) {
  AdamState st;
  st.learning_rate = r.f64();
  st.beta1 = r.f64();
  st.beta2 = r.f64();
  st.epsilon = r.f64();
  st.step_count = r.i64();
  const std::uint64_t n = r.u64();
  for (std::vector<Layer>* moments : {&st.first_moment, &st.second_moment}) {
    moments->resize(n);
    for (Layer& l : *moments) {
      l.in = static_cast<int>(r.i64());
      l.out = static_cast<int>(r.i64());
      l.w = r.vec();
      l.b = r.vec();
    }
  }
  return st;
}

void put_running_normalizer(ByteWriter& w, const RunningNormalizer& n) {
  w.f64(n.clip_range);
  w.i64(n.count);
  w.vec(n.sum);
  w.vec(n.sumsq);
  w.vec(n.mean);
  w.vec(n.stdev);
}

RunningNormalizer get_running_normalizer(ByteReader& r) {
  RunningNormalizer n;
  n.clip_range = r.f64();
  n.count = r.i64();
  n.sum = r.vec();
  n.sumsq = r.vec();
  n.mean = r.vec();
  n.stdev = r.vec();
  return n;
}

void put_normalizer(ByteWriter& w, const Normalizer& n) {
  w.vec(n.mean);
  w.vec(n.stdev);
}

Normalizer get_normalizer(ByteReader& r) {
  Normalizer n;
  n.mean = r.vec();
  n.stdev = r.vec();
  return n;
}

void put_frozen_policy(ByteWriter& w, const FrozenPolicy& p) {
  put_mlp(w, p.actor);
  put_running_normalizer(w, p.obs_norm);
  put_running_normalizer(w, p.goal_norm);
  w.f64(p.noise_std);
  w.f64(p.random_action_prob);
  w.i64(p.id);
  w.i64(p.force_real_bit ? 1 : 0);
}

FrozenPolicy get_frozen_policy(ByteReader& r) {
  FrozenPolicy p;
  p.actor = get_mlp(r);
  p.obs_norm = get_running_normalizer(r);
  p.goal_norm = get_running_normalizer(r);
  p.noise_std = r.f64();
  p.random_action_prob = r.f64();
  p.id = static_cast<int>(r.i64());
  p.force_real_bit = r.i64() != 0;
  return p;
}

void put_episode(ByteWriter& w, const Episode& e) {
  w.i64(e.epoch_collected);
  w.i64(e.policy_id);
  w.i64(e.is_real ? 1 : 0);
  w.u64(e.transitions.size());
  for (const Transition& t : e.transitions) {
    w.vec(t.obs.observation);
    w.vec(t.obs.achieved_goal);
    w.vec(t.obs.desired_goal);
    w.vec(t.action);
    w.vec(t.next_obs.observation);
    w.vec(t.next_obs.achieved_goal);
    w.vec(t.next_obs.desired_goal);
    w.f64(t.extrinsic_reward);
    w.i64(t.is_real ? 1 : 0);
    w.i64(t.epoch_collected);
  }
}

Episode get_episode(ByteReader& r) {
  Episode e;
  e.epoch_collected = static_cast<int>(r.i64());
  e.policy_id = static_cast<int>(r.i64());
  e.is_real = r.i64() != 0;
  const std::uint64_t n = r.u64();
  e.transitions.resize(n);
  for (Transition& t : e.transitions) {
    t.obs.observation = r.vec();
    t.obs.achieved_goal = r.vec();
    t.obs.desired_goal = r.vec();
    t.action = r.vec();
    t.next_obs.observation = r.vec();
    t.next_obs.achieved_goal = r.vec();
    t.next_obs.desired_goal = r.vec();
    t.extrinsic_reward = r.f64();
    t.is_real = r.i64() != 0;
    t.epoch_collected = static_cast<int>(r.i64());
  }
  return e;
}

void put_buffer(ByteWriter& w, const EpisodeBuffer& b) {
  w.u64(b.capacity());
  w.i64(b.episode_length());
  w.u64(b.lifetime_stored());
  w.u64(b.episode_count());
  for (std::size_t i = 0; i < b.episode_count(); ++i) put_episode(w, b.episode(i));
}

EpisodeBuffer get_buffer(ByteReader& r) {
  const std::size_t capacity = r.u64();
  const int episode_length = static_cast<int>(r.i64());
  const unsigned long long lifetime = r.u64();
  EpisodeBuffer b(capacity, episode_length);
  const std::uint64_t n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) b.store_episode(get_episode(r), /*count_lifetime=*/false);
  b.set_lifetime(lifetime);
  return b;
}

}  // namespace iher

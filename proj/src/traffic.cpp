#include "ici/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ici/topology.hpp"

namespace ici {

const char* to_string(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::kUniform: return "uniform";
    case WorkloadKind::kIncastTree: return "incast";
    case WorkloadKind::kMessageMix: return "message_mix";
    case WorkloadKind::kTrace: return "trace";
  }
  return "?";
}

std::uint16_t message_src_port(std::uint64_t msg_id) {
  return static_cast<std::uint16_t>(1024 + msg_id % 60000);
}

NodeRoles assign_roles(std::uint32_t terminals, double incast_fraction, std::uint32_t root_count,
                       std::uint64_t seed) {
  if (incast_fraction < 0 || incast_fraction >= 1)
    throw ConfigError("workload: incast_fraction must be in [0, 1)");
  std::vector<std::uint32_t> order(terminals);
  for (std::uint32_t i = 0; i < terminals; ++i) order[i] = i;
  std::mt19937_64 rng(seed ^ 0x5eed0f01e5ull);
  std::shuffle(order.begin(), order.end(), rng);

  NodeRoles roles;
  const auto senders = static_cast<std::uint32_t>(std::lround(terminals * incast_fraction));
  if (senders + root_count > terminals) throw ConfigError("workload: not enough terminals for roots");
  roles.incast_senders.assign(order.begin(), order.begin() + senders);
  roles.background.assign(order.begin() + senders, order.end());
  roles.roots.assign(order.begin() + senders, order.begin() + senders + root_count);
  std::sort(roles.incast_senders.begin(), roles.incast_senders.end());
  std::sort(roles.background.begin(), roles.background.end());
  return roles;
}

FlowSizeCdf::FlowSizeCdf(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
  if (points_.empty()) throw ConfigError("cdf: no points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto [s, p] = points_[i];
    if (s <= 0 || p <= 0 || p > 1) throw ConfigError("cdf: sizes must be > 0 and probabilities in (0, 1]");
    if (i > 0 && (s <= points_[i - 1].first || p <= points_[i - 1].second))
      throw ConfigError("cdf: sizes and probabilities must be strictly increasing");
  }
  if (std::abs(points_.back().second - 1.0) > 1e-12) throw ConfigError("cdf: last probability must be 1.0");
  points_.back().second = 1.0;
}

FlowSizeCdf FlowSizeCdf::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<double, double>> pts;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    double size, prob;
    std::string extra;
    if (!(ls >> size) || !(ls >> prob) || (ls >> extra)) {
      std::ostringstream os;
      os << origin << ":" << lineno << ": expected '<size_bytes> <cumulative_probability>'";
      throw ConfigError(os.str());
    }
    if (!pts.empty() && (size <= pts.back().first || prob <= pts.back().second)) {
      std::ostringstream os;
      os << origin << ":" << lineno << ": size and probability must strictly increase";
      throw ConfigError(os.str());
    }
    pts.emplace_back(size, prob);
  }
  try {
    return FlowSizeCdf(std::move(pts));
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

FlowSizeCdf FlowSizeCdf::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cdf: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

std::uint64_t FlowSizeCdf::sample(double u) const {
  if (u <= points_.front().second) return static_cast<std::uint64_t>(std::llround(points_.front().first));
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (u <= points_[i].second) {
      const auto [s0, p0] = points_[i - 1];
      const auto [s1, p1] = points_[i];
      const double s = s0 + (s1 - s0) * (u - p0) / (p1 - p0);
      return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(s)));
    }
  }
  return static_cast<std::uint64_t>(std::llround(points_.back().first));
}

double FlowSizeCdf::analytic_mean() const {
  double mean = points_.front().first * points_.front().second;
  for (std::size_t i = 1; i < points_.size(); ++i)
    mean += (points_[i].second - points_[i - 1].second) * (points_[i].first + points_[i - 1].first) / 2.0;
  return mean;
}

std::uint64_t sample_message(const FlowSizeCdf& cdf, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return cdf.sample(u(rng));
}

namespace {

using TimedSource = std::pair<SimTime, std::uint32_t>;
using MinHeap = std::priority_queue<TimedSource, std::vector<TimedSource>, std::greater<>>;

class UniformStream final : public InjectionStream {
 public:
  UniformStream(const WorkloadSpec& spec, std::vector<std::uint32_t> participants,
                std::uint32_t terminals, BitsPerSecond link_rate, std::uint64_t seed)
      : spec_(spec), terminals_(terminals), rng_(seed) {
    mean_gap_ps_ = static_cast<double>(serialization_time(kMtuBytes, link_rate)) / spec.rate;
    for (auto node : participants) heap_.push({spec.start + draw_gap(), node});
  }

  std::optional<Injection> next() override {
    while (!heap_.empty()) {
      auto [t, node] = heap_.top();
      heap_.pop();
      if (t >= spec_.start + spec_.duration) continue;
      heap_.push({t + draw_gap(), node});
      std::uniform_int_distribution<std::uint32_t> pick(0, terminals_ - 2);
      std::uint32_t dst = pick(rng_);
      if (dst >= node) ++dst;
      Injection inj;
      inj.time = t;
      inj.src = node;
      inj.dst = dst;
      inj.size = kMtuBytes;
      inj.traffic = TrafficClass::kUniform;
      inj.vl = spec_.vl;
      inj.src_port = kUniformSrcPort;
      return inj;
    }
    return std::nullopt;
  }

 private:
  SimTime draw_gap() {
    std::exponential_distribution<double> exp(1.0);
    return static_cast<SimTime>(std::llround(exp(rng_) * mean_gap_ps_));
  }

  WorkloadSpec spec_;
  std::uint32_t terminals_;
  std::mt19937_64 rng_;
  double mean_gap_ps_ = 0;
  MinHeap heap_;
};

class IncastStream final : public InjectionStream {
 public:
  IncastStream(const WorkloadSpec& spec, std::vector<std::uint32_t> senders,
               std::vector<std::uint32_t> roots, BitsPerSecond link_rate)
      : spec_(spec), senders_(std::move(senders)), roots_(std::move(roots)) {
    gap_ = static_cast<SimTime>(std::llround(
        static_cast<double>(serialization_time(kMtuBytes, link_rate)) / spec.rate));
    sent_.assign(senders_.size(), 0);
    start_burst(0);
  }

  std::optional<Injection> next() override {
    while (true) {
      if (heap_.empty()) {
        if (spec_.bursts > 1 && burst_ + 1 < spec_.bursts) {
          start_burst(burst_ + 1);
          continue;
        }
        return std::nullopt;
      }
      auto [t, idx] = heap_.top();
      heap_.pop();
      const SimTime burst_start = spec_.start + static_cast<SimTime>(burst_) * spec_.stagger;
      const bool sustained = spec_.burst_size == 0;
      if (sustained && t >= burst_start + spec_.duration) continue;
      if (!sustained && sent_[idx] >= spec_.burst_size) continue;
      ++sent_[idx];
      heap_.push({t + gap_, idx});
      Injection inj;
      inj.time = t;
      inj.src = senders_[idx];
      inj.dst = spec_.bursts > 1 ? roots_[burst_ % roots_.size()] : roots_[idx % roots_.size()];
      inj.size = kMtuBytes;
      inj.traffic = TrafficClass::kIncast;
      inj.vl = spec_.vl;
      inj.src_port = kIncastSrcPort;
      return inj;
    }
  }

 private:
  void start_burst(std::uint32_t b) {
    burst_ = b;
    std::fill(sent_.begin(), sent_.end(), 0);
    const SimTime t0 = spec_.start + static_cast<SimTime>(b) * spec_.stagger;
    for (std::uint32_t i = 0; i < senders_.size(); ++i) heap_.push({t0, i});
  }

  WorkloadSpec spec_;
  std::vector<std::uint32_t> senders_;
  std::vector<std::uint32_t> roots_;
  SimTime gap_ = 0;
  std::uint32_t burst_ = 0;
  std::vector<std::uint64_t> sent_;
  MinHeap heap_;
};

class MessageMixStream final : public InjectionStream {
 public:
  MessageMixStream(const WorkloadSpec& spec, FlowSizeCdf cdf, std::vector<std::uint32_t> senders,
                   std::vector<std::uint32_t> pool, BitsPerSecond link_rate, std::uint64_t seed,
                   std::uint64_t first_msg_id)
      : spec_(spec),
        cdf_(std::move(cdf)),
        senders_(std::move(senders)),
        pool_(std::move(pool)),
        rng_(seed),
        next_id_(first_msg_id),
        now_(spec.start) {
    const double bits_per_msg = cdf_.analytic_mean() * 8.0;
    const double per_sender = spec.load * static_cast<double>(link_rate) / bits_per_msg;
    mean_gap_ps_ = 1e12 / (per_sender * static_cast<double>(senders_.size()));
  }

  std::optional<Injection> next() override {
    if (emitted_ >= spec_.messages || senders_.empty()) return std::nullopt;
    std::exponential_distribution<double> exp(1.0);
    now_ += static_cast<SimTime>(std::llround(exp(rng_) * mean_gap_ps_));
    std::uniform_int_distribution<std::size_t> pick_src(0, senders_.size() - 1);
    const std::uint32_t src = senders_[pick_src(rng_)];
    std::uint32_t dst;
    std::uniform_int_distribution<std::size_t> pick_dst(0, pool_.size() - 1);
    do {
      dst = pool_[pick_dst(rng_)];
    } while (dst == src);
    Injection inj;
    inj.time = now_;
    inj.src = src;
    inj.dst = dst;
    inj.size = sample_message(cdf_, rng_);
    inj.traffic = TrafficClass::kMessage;
    inj.vl = spec_.vl;
    inj.msg_id = next_id_++;
    inj.src_port = message_src_port(inj.msg_id);
    ++emitted_;
    return inj;
  }

 private:
  WorkloadSpec spec_;
  FlowSizeCdf cdf_;
  std::vector<std::uint32_t> senders_;
  std::vector<std::uint32_t> pool_;
  std::mt19937_64 rng_;
  std::uint64_t next_id_;
  SimTime now_;
  double mean_gap_ps_ = 0;
  std::uint64_t emitted_ = 0;
};

class VectorStream final : public InjectionStream {
 public:
  explicit VectorStream(std::vector<Injection> items) : items_(std::move(items)) {}
  std::optional<Injection> next() override {
    if (pos_ >= items_.size()) return std::nullopt;
    return items_[pos_++];
  }

 private:
  std::vector<Injection> items_;
  std::size_t pos_ = 0;
};

}  // namespace

std::unique_ptr<InjectionStream> gen_uniform(const WorkloadSpec& spec,
                                             std::vector<std::uint32_t> participants,
                                             std::uint32_t terminals, BitsPerSecond link_rate,
                                             std::uint64_t seed) {
  if (!(spec.rate > 0 && spec.rate <= 1)) throw ConfigError("uniform: rate must be in (0, 1]");
  if (terminals < 2) throw ConfigError("uniform: need at least two terminals");
  return std::make_unique<UniformStream>(spec, std::move(participants), terminals, link_rate, seed);
}

std::unique_ptr<InjectionStream> gen_incast_tree(const WorkloadSpec& spec,
                                                 const std::vector<std::uint32_t>& senders,
                                                 const std::vector<std::uint32_t>& roots,
                                                 BitsPerSecond link_rate) {
  if (roots.empty()) throw ConfigError("incast: root list is empty");
  if (!(spec.rate > 0 && spec.rate <= 1)) throw ConfigError("incast: rate must be in (0, 1]");
  if (spec.bursts == 0) throw ConfigError("incast: bursts must be >= 1");
  for (auto s : senders) {
    if (std::find(roots.begin(), roots.end(), s) != roots.end()) {
      std::ostringstream os;
      os << "incast: node " << s << " is both a sender and a root";
      throw ConfigError(os.str());
    }
  }
  return std::make_unique<IncastStream>(spec, senders, roots, link_rate);
}

std::unique_ptr<InjectionStream> gen_message_mix(const WorkloadSpec& spec, FlowSizeCdf cdf,
                                                 std::vector<std::uint32_t> senders,
                                                 std::uint32_t terminals,
                                                 const std::vector<std::uint32_t>& excluded,
                                                 BitsPerSecond link_rate, std::uint64_t seed,
                                                 std::uint64_t first_msg_id) {
  if (!(spec.load > 0 && spec.load <= 1)) throw ConfigError("message_mix: load must be in (0, 1]");
  std::vector<std::uint32_t> pool;
  for (std::uint32_t t = 0; t < terminals; ++t)
    if (std::find(excluded.begin(), excluded.end(), t) == excluded.end()) pool.push_back(t);
  if (pool.size() < 2) throw ConfigError("message_mix: destination pool too small");
  return std::make_unique<MessageMixStream>(spec, std::move(cdf), std::move(senders), std::move(pool),
                                            link_rate, seed, first_msg_id);
}

std::unique_ptr<InjectionStream> parse_trace(const std::string& text, double dilation,
                                             std::uint32_t terminals, std::uint64_t first_msg_id,
                                             const std::string& origin) {
  if (!(dilation > 0)) throw ConfigError("trace: dilation must be positive");
  std::istringstream in(text);
  std::string line;
  std::vector<Injection> items;
  int lineno = 0;
  double last_ns = -1;
  std::uint64_t id = first_msg_id;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    double t_ns;
    long long src, dst, size;
    std::string extra;
    auto fail = [&](const std::string& why) {
      std::ostringstream os;
      os << origin << ":" << lineno << ": " << why;
      throw ConfigError(os.str());
    };
    if (!(ls >> t_ns >> src >> dst >> size) || (ls >> extra))
      fail("expected '<time_ns> <src_node> <dst_node> <size_bytes>'");
    if (t_ns < 0 || t_ns < last_ns) fail("timestamps must be non-negative and non-decreasing");
    if (src < 0 || dst < 0 || src >= terminals || dst >= terminals || src == dst)
      fail("src/dst must be distinct terminals");
    if (size <= 0) fail("size must be positive");
    last_ns = t_ns;
    Injection inj;
    inj.time = static_cast<SimTime>(std::llround(t_ns * dilation * kNanosecond));
    inj.src = static_cast<std::uint32_t>(src);
    inj.dst = static_cast<std::uint32_t>(dst);
    inj.size = static_cast<std::uint64_t>(size);
    inj.traffic = TrafficClass::kTrace;
    inj.msg_id = id++;
    inj.src_port = message_src_port(inj.msg_id);
    items.push_back(inj);
  }
  return std::make_unique<VectorStream>(std::move(items));
}

std::unique_ptr<InjectionStream> load_trace(const std::string& path, double dilation,
                                            std::uint32_t terminals, std::uint64_t first_msg_id) {
  std::ifstream f(path);
  if (!f) throw ConfigError("trace: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_trace(ss.str(), dilation, terminals, first_msg_id, path);
}

}  // namespace ici

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ici/packet.hpp"
#include "ici/units.hpp"

namespace ici {

// One injection: a single packet (uniform, incast) or a whole message that
// the NIC segments into MTU-sized packets sharing msg_id.
struct Injection {
  SimTime time = 0;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::uint64_t size = kMtuBytes;
  TrafficClass traffic = TrafficClass::kUniform;
  std::uint8_t vl = 0;
  std::uint16_t src_port = 0;
  std::uint64_t msg_id = 0;
};

class InjectionStream {
 public:
  virtual ~InjectionStream() = default;
  // Next injection in non-decreasing time order, or nullopt when exhausted.
  virtual std::optional<Injection> next() = 0;
};

enum class WorkloadKind : std::uint8_t { kUniform, kIncastTree, kMessageMix, kTrace };

const char* to_string(WorkloadKind k);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::kUniform;
  double rate = 1.0;          // fraction of line rate per node (uniform, incast)
  double load = 0.5;          // offered load per sender (message mix)
  SimTime start = 0;
  SimTime duration = kMillisecond;
  std::uint32_t roots = 1;    // incast destinations
  std::uint64_t burst_size = 0;  // packets per sender per burst; 0 = sustained
  std::uint32_t bursts = 1;   // >1: sequential bursts, burst b targets root b
  SimTime stagger = 250 * kMicrosecond;
  std::uint64_t messages = 0;
  std::string cdf_path;
  std::string trace_path;
  double dilation = 1.0;
  std::uint8_t vl = 0;
};

// Which terminals play which part. Incast senders and roots are disjoint;
// background nodes are everything that is not an incast sender.
struct NodeRoles {
  std::vector<std::uint32_t> background;
  std::vector<std::uint32_t> incast_senders;
  std::vector<std::uint32_t> roots;
};

NodeRoles assign_roles(std::uint32_t terminals, double incast_fraction, std::uint32_t root_count,
                       std::uint64_t seed);

// Piecewise-linear flow-size CDF loaded from `<size_bytes> <cum_prob>` lines.
class FlowSizeCdf {
 public:
  FlowSizeCdf() = default;
  // Throws ConfigError when points are not strictly increasing in both
  // coordinates or the last probability is not 1.
  explicit FlowSizeCdf(std::vector<std::pair<double, double>> points);

  // Throws ConfigError with the offending line number.
  static FlowSizeCdf load(const std::string& path);
  static FlowSizeCdf parse(const std::string& text, const std::string& origin = "<cdf>");

  // Inverse transform for u in [0,1): mass at the first point, linear
  // interpolation between later points.
  std::uint64_t sample(double u) const;
  double analytic_mean() const;
  const std::vector<std::pair<double, double>>& points() const { return points_; }

 private:
  std::vector<std::pair<double, double>> points_;
};

std::uint64_t sample_message(const FlowSizeCdf& cdf, std::mt19937_64& rng);

// Exponential inter-arrivals at `rate` of line rate per participant; MTU
// packets to destinations uniform over all other terminals.
std::unique_ptr<InjectionStream> gen_uniform(const WorkloadSpec& spec,
                                             std::vector<std::uint32_t> participants,
                                             std::uint32_t terminals, BitsPerSecond link_rate,
                                             std::uint64_t seed);

// Line-rate incast from each sender. With bursts == 1 senders are split
// evenly over the roots; with bursts > 1 every sender fires burst b at
// roots[b % roots] starting at start + b * stagger.
std::unique_ptr<InjectionStream> gen_incast_tree(const WorkloadSpec& spec,
                                                 const std::vector<std::uint32_t>& senders,
                                                 const std::vector<std::uint32_t>& roots,
                                                 BitsPerSecond link_rate);

// Poisson message arrivals sized from `cdf`; destinations exclude the
// sender and every node in `excluded`.
std::unique_ptr<InjectionStream> gen_message_mix(const WorkloadSpec& spec, FlowSizeCdf cdf,
                                                 std::vector<std::uint32_t> senders,
                                                 std::uint32_t terminals,
                                                 const std::vector<std::uint32_t>& excluded,
                                                 BitsPerSecond link_rate, std::uint64_t seed,
                                                 std::uint64_t first_msg_id);

// Replays `<time_ns> <src> <dst> <size_bytes>` lines scaled by dilation.
// Throws ConfigError on malformed or non-monotone input.
std::unique_ptr<InjectionStream> load_trace(const std::string& path, double dilation,
                                            std::uint32_t terminals, std::uint64_t first_msg_id);
std::unique_ptr<InjectionStream> parse_trace(const std::string& text, double dilation,
                                             std::uint32_t terminals, std::uint64_t first_msg_id,
                                             const std::string& origin = "<trace>");

// Flow tuple source-port conventions per traffic class.
inline constexpr std::uint16_t kRoceDstPort = 4791;
inline constexpr std::uint16_t kUniformSrcPort = 100;
inline constexpr std::uint16_t kIncastSrcPort = 200;
std::uint16_t message_src_port(std::uint64_t msg_id);

}  // namespace ici

#include "ici/topology.hpp"

#include <cstdlib>
#include <map>
#include <sstream>

namespace ici {

namespace {

std::uint32_t ipow(std::uint32_t base, std::uint32_t exp) {
  std::uint32_t r = 1;
  while (exp--) r *= base;
  return r;
}

std::uint32_t set_digit(std::uint32_t value, std::uint32_t position, std::uint32_t k,
                        std::uint32_t d) {
  const std::uint32_t p = ipow(k, position);
  const std::uint32_t old = (value / p) % k;
  return value - old * p + d * p;
}

std::uint32_t nearest_valid(std::uint32_t radix, std::uint32_t terminals) {
  std::vector<std::uint32_t> sizes{radix};
  const std::uint32_t k = radix / 2;
  if (k >= 2) {
    for (std::uint64_t t = std::uint64_t{k} * k; t <= (1u << 24); t *= k)
      sizes.push_back(static_cast<std::uint32_t>(t));
  }
  std::uint32_t best = sizes.front();
  for (auto s : sizes) {
    const auto d = std::llabs(static_cast<long long>(s) - terminals);
    const auto bd = std::llabs(static_cast<long long>(best) - terminals);
    if (d < bd) best = s;
  }
  return best;
}

}  // namespace

std::uint32_t MinTopology::digit(std::uint32_t value, std::uint32_t position) const {
  return (value / ipow(arity_, position)) % arity_;
}

MinTopology build_min(const MinParams& params) {
  if (params.radix < 2) throw ConfigError("topology: radix must be >= 2");
  if (params.oversubscription == 0) throw ConfigError("topology: oversubscription must be >= 1");
  if (params.link_rate <= 0) throw ConfigError("topology: link rate must be positive");

  MinTopology topo;
  topo.radix_ = params.radix;
  topo.terminals_ = params.terminals;
  topo.oversubscription_ = params.oversubscription;
  topo.link_rate_ = params.link_rate;
  topo.link_delay_ = params.link_delay;

  if (params.terminals == params.radix) {
    if (params.oversubscription != 1)
      throw ConfigError("topology: a single-switch network cannot be oversubscribed");
    topo.arity_ = params.radix;
    topo.stages_ = 1;
    SwitchNode sw;
    sw.down_ports = params.terminals;
    sw.ports.resize(params.terminals);
    for (std::uint32_t t = 0; t < params.terminals; ++t) {
      sw.ports[t] = LinkEnd{NodeRef{NodeType::kTerminal, t}, 0};
      topo.terminal_links_.push_back(LinkEnd{NodeRef{NodeType::kSwitch, 0}, t});
    }
    topo.switches_.push_back(std::move(sw));
    return topo;
  }

  const std::uint32_t k = params.radix / 2;
  std::uint32_t n = 0;
  if (k >= 2) {
    std::uint64_t t = 1;
    while (t < params.terminals) {
      t *= k;
      ++n;
    }
    if (t != params.terminals || n < 2) n = 0;
  }
  if (params.radix % 2 != 0 || n == 0) {
    std::ostringstream os;
    os << "topology: no k-ary n-tree with radix " << params.radix << " has " << params.terminals
       << " terminals; nearest valid size is " << nearest_valid(params.radix, params.terminals);
    throw ConfigError(os.str());
  }
  if (k % params.oversubscription != 0) {
    std::ostringstream os;
    os << "topology: oversubscription " << params.oversubscription
       << " must divide the edge down-link count " << k;
    throw ConfigError(os.str());
  }
  topo.arity_ = k;
  topo.stages_ = n;
  const std::uint32_t edge_up = k / params.oversubscription;
  const std::uint32_t labels = ipow(k, n - 1);

  // index[stage][label] -> switch id, absent labels pruned by oversubscription.
  std::vector<std::vector<int>> index(n, std::vector<int>(labels, -1));
  for (std::uint32_t s = 0; s < n; ++s) {
    for (std::uint32_t w = 0; w < labels; ++w) {
      if (s > 0 && (w % k) >= edge_up) continue;
      SwitchNode sw;
      sw.stage = s;
      sw.label = w;
      sw.down_ports = k;
      sw.up_ports = (s + 1 == n) ? 0 : (s == 0 ? edge_up : k);
      sw.ports.resize(sw.down_ports + sw.up_ports);
      index[s][w] = static_cast<int>(topo.switches_.size());
      topo.switches_.push_back(std::move(sw));
    }
  }

  topo.terminal_links_.resize(params.terminals);
  for (std::uint32_t t = 0; t < params.terminals; ++t) {
    const auto sw_id = static_cast<std::uint32_t>(index[0][t / k]);
    topo.switches_[sw_id].ports[t % k] = LinkEnd{NodeRef{NodeType::kTerminal, t}, 0};
    topo.terminal_links_[t] = LinkEnd{NodeRef{NodeType::kSwitch, sw_id}, t % k};
  }

  // Up port j at stage s replaces label digit s with j; the upper switch
  // sees the link on down port equal to the replaced digit.
  for (std::uint32_t s = 0; s + 1 < n; ++s) {
    for (std::uint32_t w = 0; w < labels; ++w) {
      if (index[s][w] < 0) continue;
      auto& lower = topo.switches_[static_cast<std::size_t>(index[s][w])];
      for (std::uint32_t j = 0; j < lower.up_ports; ++j) {
        const std::uint32_t upper_label = set_digit(w, s, k, j);
        const int upper_id = index[s + 1][upper_label];
        if (upper_id < 0) throw std::logic_error("topology: dangling up-link");
        const std::uint32_t down_port = (w / ipow(k, s)) % k;
        lower.ports[lower.down_ports + j] =
            LinkEnd{NodeRef{NodeType::kSwitch, static_cast<std::uint32_t>(upper_id)}, down_port};
        topo.switches_[static_cast<std::size_t>(upper_id)].ports[down_port] = LinkEnd{
            NodeRef{NodeType::kSwitch, static_cast<std::uint32_t>(index[s][w])}, lower.down_ports + j};
      }
    }
  }
  return topo;
}

std::uint32_t MinTopology::route(std::uint32_t current_switch, std::uint32_t dst) const {
  if (dst >= terminals_) throw std::logic_error("topology: route to unknown terminal");
  if (current_switch >= switches_.size()) throw std::logic_error("topology: unknown switch");
  const SwitchNode& sw = switches_[current_switch];
  if (stages_ == 1) return dst;

  bool below = true;
  for (std::uint32_t pos = sw.stage; pos + 1 < stages_; ++pos) {
    if (digit(sw.label, pos) != digit(dst, pos + 1)) {
      below = false;
      break;
    }
  }
  if (below) return digit(dst, sw.stage);
  if (sw.up_ports == 0) throw std::logic_error("topology: destination unreachable from top stage");
  // D-mod-K: the up-link is chosen by the destination id alone.
  const std::uint32_t up = sw.stage == 0 ? dst % sw.up_ports : digit(dst, sw.stage) % sw.up_ports;
  return sw.down_ports + up;
}

std::size_t MinTopology::links_above_stage(std::uint32_t stage) const {
  std::size_t n = 0;
  for (const auto& sw : switches_)
    if (sw.stage == stage) n += sw.up_ports;
  return n;
}

std::string MinTopology::summary() const {
  std::ostringstream os;
  os << "# min radix=" << radix_ << " arity=" << arity_ << " stages=" << stages_
     << " terminals=" << terminals_ << " switches=" << switches_.size()
     << " oversubscription=" << oversubscription_ << " link_bps=" << link_rate_
     << " link_delay_ps=" << link_delay_ << '\n';
  for (std::uint32_t t = 0; t < terminals_; ++t) {
    const auto& l = terminal_links_[t];
    os << "link terminal " << t << " <-> switch " << l.peer.id << " port " << l.peer_port << '\n';
  }
  for (std::uint32_t id = 0; id < switches_.size(); ++id) {
    const auto& sw = switches_[id];
    os << "switch " << id << " stage " << sw.stage << " label " << sw.label << " down "
       << sw.down_ports << " up " << sw.up_ports << '\n';
    for (std::uint32_t p = sw.down_ports; p < sw.ports.size(); ++p) {
      os << "link switch " << id << " port " << p << " <-> switch " << sw.ports[p].peer.id
         << " port " << sw.ports[p].peer_port << '\n';
    }
  }
  return os.str();
}

}  // namespace ici

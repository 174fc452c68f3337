#pragma once

// Deterministic discrete-event simulation of a region-partitioned sensor
// field reporting to a sink.
//
// AES: one boundary node per region relays traffic and is the only node that
// ever turns its radio on in steady state; it wakes per transmission and
// sleeps otherwise. Every other node samples its environment once per beacon
// interval and follows the detection automaton into passive (harvesting) or
// sleep mode. Baselines keep every node on its protocol's duty cycle with the
// radio drawing communication power whenever it is awake.
//
// Energy is integrated exactly between events: each node's draw is piecewise
// constant, depletion instants are scheduled analytically and all durations
// are booked into per-mode ledgers so that the totals can be re-derived.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <vector>

#include "aes/detection.hpp"
#include "aes/energy.hpp"
#include "aes/error.hpp"
#include "aes/scenario.hpp"
#include "aes/topology.hpp"

namespace aes {

enum class Environment : std::uint8_t { Indoor, Outdoor };

/// Ground-truth indoor/outdoor labelling: inside any indoor zone is indoor,
/// everything else in the field is outdoor.
struct EnvironmentField {
  std::vector<Rect> indoor_zones;
  double pc = 0.0;

  Environment label(Point p) const {
    for (const auto& z : indoor_zones) {
      if (z.contains(p)) return Environment::Indoor;
    }
    return Environment::Outdoor;
  }
};

struct DetectionInputs {
  const detection::SampleCountDistribution* dist = nullptr;
  const detection::RocModel* roc = nullptr;
  const detection::ThresholdSolution* solution = nullptr;
  double epsilon = 0.05;
};

/// One sensing round for a node. Draws the sample count k, reads the
/// indoor branch f_k(UE^k) or the outdoor false-alarm branch UE^k, pushes it
/// through the noisy channel and forms IOE = E(PD) + fused decision, then
/// classifies Di = IOE - E(PD). Depleted nodes make no decision.
template <class Engine>
std::optional<detection::ModeDecision> sense_and_decide(Point pos, bool depleted, const EnvironmentField& env,
                                                        const DetectionInputs& in, Engine& rng) {
  if (depleted) return std::nullopt;
  const std::size_t k = in.dist->sample(unit_uniform(rng));
  const double ue_k = in.solution->ue.at(k);
  const double branch = env.label(pos) == Environment::Indoor ? in.roc->value(k, ue_k) : ue_k;
  const double ioe = in.solution->expected_pd + detection::fuse_pd(branch, env.pc);
  const double di = detection::compute_di(ioe, in.solution->expected_pd);
  return detection::decide_mode(di, in.epsilon);
}

/// Per-node time and energy books. Mode seconds (active + passive + sleep)
/// always add up to the simulated time; `depleted_s` is the part of
/// `sleep_s` spent with an empty battery (no draw).
struct NodeLedger {
  double active_s = 0.0;
  double passive_s = 0.0;
  double sleep_s = 0.0;
  double sense_s = 0.0;
  double depleted_s = 0.0;
  double consumed_j = 0.0;
  double harvested_j = 0.0;
  std::optional<double> depleted_at;

  double energy_j() const noexcept { return consumed_j - harvested_j; }
};

struct SimReport {
  Protocol protocol = Protocol::AES;
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  double total_energy_j = 0.0;
  std::vector<double> per_node_energy_j;
  double sink_energy_j = 0.0;
  std::uint64_t packets_generated = 0;
  std::uint64_t packets_delivered = 0;
  std::uint64_t packets_dropped = 0;
  std::uint64_t packets_in_flight = 0;
  double active_s = 0.0;
  double passive_s = 0.0;
  double sleep_s = 0.0;
  double lifetime_s = 0.0;
  std::optional<double> savings_pct;

  std::vector<NodeLedger> ledgers;
  std::vector<NodeId> sources;
  std::size_t max_active_per_region = 0;
  std::uint64_t sleeping_transmissions = 0;
  std::uint64_t decisions_active = 0;
  std::uint64_t decisions_passive = 0;
  std::uint64_t decisions_sleep = 0;

  double mean_node_energy_j() const {
    return per_node_energy_j.empty() ? 0.0 : total_energy_j / static_cast<double>(per_node_energy_j.size());
  }
};

// 100 * (baseline - aes) / baseline
inline double compute_savings(double aes_total, double baseline_total) {
  if (!(baseline_total > 0.0)) throw InvalidArgument("compute_savings: baseline total must be positive");
  return 100.0 * (baseline_total - aes_total) / baseline_total;
}

class Simulation {
 public:
  Simulation(ScenarioConfig cfg, Protocol protocol, std::uint64_t seed)
      : cfg_(std::move(cfg)),
        kind_(cfg_.baseline(protocol)),
        seed_(seed),
        topo_(generate_topology(cfg_, seed)),
        env_{cfg_.indoor_zones, cfg_.detection.pc},
        dist_(cfg_.detection.distribution()),
        roc_(cfg_.detection.roc()),
        decision_rng_(seed ^ 0x9E3779B97F4A7C15ULL) {
    if (is_aes()) {
      solution_ = detection::solve_thresholds(roc_, dist_, cfg_.detection.alpha, {cfg_.detection.solver_tol, 200});
    }
  }

  const Topology& topology() const noexcept { return topo_; }

  SimReport run() {
    init_nodes();
    if (cfg_.sim_duration_s > 0.0) {
      schedule_initial_events();
      while (!events_.empty()) {
        const Event ev = events_.top();
        if (ev.time > cfg_.sim_duration_s) break;
        events_.pop();
        now_ = ev.time;
        dispatch(ev);
      }
    }
    now_ = cfg_.sim_duration_s;
    return finish();
  }

 private:
  enum class Activity : std::uint8_t { Sleep, Passive, Listen, Transmit, Duty, Dead };

  enum class EventType : std::uint8_t { InitEnd, Depletion, TxComplete, ListenTimeout, SenseEpoch, PacketGen };

  struct Event {
    double time;
    EventType type;
    std::size_t key;  // node id or flow index
    std::uint64_t token;
    std::uint64_t seq;

    bool operator>(const Event& o) const {
      if (time != o.time) return time > o.time;
      if (type != o.type) return type > o.type;
      if (key != o.key) return key > o.key;
      return seq > o.seq;
    }
  };

  struct Packet {
    std::uint32_t bytes;
  };

  struct NodeState {
    Activity act = Activity::Sleep;
    double last_t = 0.0;
    double residual = 0.0;
    NodeLedger ledger;
    std::deque<std::size_t> queue;
    bool stalled = false;
    std::uint64_t version = 0;
    std::uint64_t tx_token = 0;
    Hop tx_next;
    double listen_until = 0.0;
  };

  struct Flow {
    std::size_t region = 0;
    NodeId source = 0;  // boundary node of `region` when the flow was opened
    std::uint64_t bytes_left = 0;
    std::uint64_t packets_left = 0;
    double interval = 0.0;
    double next_time = 0.0;
  };

  bool is_aes() const noexcept { return kind_.kind == Protocol::AES; }
  bool alive(NodeId id) const noexcept { return state_[id].act != Activity::Dead; }
  double capacity() const noexcept { return cfg_.initial_battery_j; }

  void push(double t, EventType type, std::size_t key, std::uint64_t token = 0) {
    events_.push(Event{t, type, key, token, seq_++});
  }

  double draw_w(const NodeState& s) const {
    const auto& e = cfg_.energy;
    switch (s.act) {
      case Activity::Sleep: return e.sleep_w();
      case Activity::Passive: return 0.0;
      case Activity::Listen:
      case Activity::Transmit: return e.comm_w();
      case Activity::Duty: {
        const double d = kind_.effective_duty();
        return d * e.comm_w() + (1.0 - d) * e.sleep_w();
      }
      case Activity::Dead: return 0.0;
    }
    return 0.0;
  }

  // Book [last_t, t) into the node's ledger.
  void advance(NodeId id, double t) {
    auto& s = state_[id];
    const double dt = t - s.last_t;
    if (dt <= 0.0) return;
    auto& l = s.ledger;
    const auto& e = cfg_.energy;
    switch (s.act) {
      case Activity::Sleep:
        l.sleep_s += dt;
        l.consumed_j += e.sleep_w() * dt;
        break;
      case Activity::Passive: {
        l.passive_s += dt;
        const double gain = std::min(e.harvest_w() * dt, std::max(0.0, capacity() - s.residual));
        l.harvested_j += gain;
        break;
      }
      case Activity::Listen:
      case Activity::Transmit:
        l.active_s += dt;
        l.consumed_j += e.comm_w() * dt;
        break;
      case Activity::Duty: {
        const double d = kind_.effective_duty();
        l.active_s += d * dt;
        l.sleep_s += (1.0 - d) * dt;
        l.consumed_j += d * e.comm_w() * dt + (1.0 - d) * e.sleep_w() * dt;
        break;
      }
      case Activity::Dead:
        l.sleep_s += dt;
        l.depleted_s += dt;
        break;
    }
    s.residual = capacity() - l.consumed_j + l.harvested_j;
    s.last_t = t;
  }

  static bool radio_on(Activity a) { return a == Activity::Listen || a == Activity::Transmit; }

  void set_activity(NodeId id, Activity act) {
    advance(id, now_);
    auto& s = state_[id];
    const std::size_t region = topo_.nodes[id].region;
    if (radio_on(s.act)) --active_in_region_[region];
    s.act = act;
    if (radio_on(act)) {
      ++active_in_region_[region];
      if (is_aes() && now_ > cfg_.init_phase_s) {
        max_active_ = std::max(max_active_, active_in_region_[region]);
      }
    }
    ++s.version;
    const double w = draw_w(s);
    if (act != Activity::Dead && w > 0.0) {
      push(now_ + std::max(0.0, s.residual) / w, EventType::Depletion, id, s.version);
    }
  }

  void init_nodes() {
    const std::size_t n = topo_.nodes.size();
    state_.assign(n, NodeState{});
    active_in_region_.assign(topo_.regions.size(), 0);
    for (NodeId id = 0; id < n; ++id) {
      state_[id].residual = capacity();
      state_[id].act = Activity::Sleep;
    }
    lifetime_ = cfg_.sim_duration_s;
    build_flows();
  }

  void build_flows() {
    std::vector<std::size_t> regions;
    for (const auto& r : topo_.regions) {
      if (r.boundary) regions.push_back(r.id);
    }
    flows_.clear();
    if (regions.empty() || cfg_.connections == 0 || cfg_.data_total_bytes == 0) return;

    // Fisher-Yates on a stream independent of placement and decisions.
    std::mt19937_64 rng(seed_ + 0xD1B54A32D192ED03ULL);
    for (std::size_t i = regions.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(i));
      std::swap(regions[i - 1], regions[std::min(j, i - 1)]);
    }

    const std::uint64_t c = cfg_.connections;
    const double window = cfg_.sim_duration_s - cfg_.init_phase_s;
    for (std::uint64_t f = 0; f < c; ++f) {
      Flow fl;
      fl.region = regions[f % regions.size()];
      fl.bytes_left = cfg_.data_total_bytes / c + (f < cfg_.data_total_bytes % c ? 1 : 0);
      fl.packets_left = (fl.bytes_left + cfg_.packet_bytes - 1) / cfg_.packet_bytes;
      if (fl.packets_left == 0) continue;
      fl.source = *topo_.regions[fl.region].boundary;
      fl.interval = window / static_cast<double>(fl.packets_left);
      fl.next_time = cfg_.init_phase_s + fl.interval * static_cast<double>(f) / static_cast<double>(c);
      flows_.push_back(fl);
      if (std::find(sources_.begin(), sources_.end(), fl.source) == sources_.end()) sources_.push_back(fl.source);
    }
  }

  void schedule_initial_events() {
    now_ = 0.0;
    // Initialisation: only nodes around the sink keep their radios on.
    for (NodeId id = 0; id < topo_.nodes.size(); ++id) {
      const bool near_sink = distance(topo_.nodes[id].pos, topo_.sink) <= cfg_.radio_range_m;
      set_activity(id, (near_sink && cfg_.init_phase_s > 0.0) ? Activity::Listen : Activity::Sleep);
    }
    push(cfg_.init_phase_s, EventType::InitEnd, 0);
    if (is_aes()) push(cfg_.init_phase_s, EventType::SenseEpoch, 0);
    for (std::size_t f = 0; f < flows_.size(); ++f) push(flows_[f].next_time, EventType::PacketGen, f);
  }

  void dispatch(const Event& ev) {
    switch (ev.type) {
      case EventType::InitEnd: on_init_end(); break;
      case EventType::Depletion:
        if (alive(ev.key) && state_[ev.key].version == ev.token) deplete(ev.key);
        break;
      case EventType::TxComplete: on_tx_complete(ev.key, ev.token); break;
      case EventType::ListenTimeout: on_listen_timeout(ev.key, ev.token); break;
      case EventType::SenseEpoch: on_sense_epoch(); break;
      case EventType::PacketGen: on_packet_gen(ev.key); break;
    }
  }

  Activity idle_activity() const {
    if (now_ < cfg_.init_phase_s) return Activity::Sleep;
    if (!is_aes()) return Activity::Duty;
    return Activity::Sleep;
  }

  void on_init_end() {
    steady_ = true;
    for (NodeId id = 0; id < topo_.nodes.size(); ++id) {
      auto& s = state_[id];
      if (!alive(id) || s.act == Activity::Transmit) continue;
      set_activity(id, idle_activity());
    }
  }

  bool is_boundary(NodeId id) const {
    const auto& b = topo_.regions[topo_.nodes[id].region].boundary;
    return b && *b == id;
  }

  void on_sense_epoch() {
    const double lump_w = cfg_.energy.sense_w();
    const DetectionInputs in{&dist_, &roc_, &*solution_, cfg_.detection.epsilon_mode};
    for (NodeId id = 0; id < topo_.nodes.size(); ++id) {
      if (!alive(id) || is_boundary(id)) continue;
      auto& s = state_[id];
      advance(id, now_);
      // Sensing window: sensor hardware on for sense_window_s at sensing power.
      const double want = lump_w * cfg_.sense_window_s;
      if (want > 0.0) {
        if (s.residual <= want) {
          const double used = std::max(0.0, s.residual);
          s.ledger.consumed_j += used;
          s.ledger.sense_s += used / lump_w;
          s.residual = capacity() - s.ledger.consumed_j + s.ledger.harvested_j;
          deplete(id);
          continue;
        }
        s.ledger.consumed_j += want;
        s.ledger.sense_s += cfg_.sense_window_s;
        s.residual -= want;
      }
      const auto decision = sense_and_decide(topo_.nodes[id].pos, false, env_, in, decision_rng_);
      Activity next = Activity::Sleep;
      switch (decision->mode) {
        case detection::Mode::Passive:
          ++decisions_passive_;
          next = Activity::Passive;
          break;
        case detection::Mode::Active:
          // The region's single active slot belongs to its boundary node.
          ++decisions_active_;
          break;
        case detection::Mode::Sleep: ++decisions_sleep_; break;
      }
      if (s.act != next) {
        set_activity(id, next);
      } else {
        ++s.version;
        reschedule_depletion(id);
      }
    }
    const double next = now_ + cfg_.beacon_interval_s;
    if (next < cfg_.sim_duration_s) push(next, EventType::SenseEpoch, 0);
  }

  void reschedule_depletion(NodeId id) {
    auto& s = state_[id];
    const double w = draw_w(s);
    if (alive(id) && w > 0.0) push(now_ + std::max(0.0, s.residual) / w, EventType::Depletion, id, s.version);
  }

  void on_packet_gen(std::size_t f) {
    auto& fl = flows_[f];
    const auto bytes = static_cast<std::uint32_t>(std::min<std::uint64_t>(fl.bytes_left, cfg_.packet_bytes));
    fl.bytes_left -= bytes;
    --fl.packets_left;
    ++generated_;
    const std::size_t pid = packets_.size();
    packets_.push_back(Packet{bytes});

    // A flow belongs to the sensor that opened it; it ends when that sensor dies.
    if (alive(fl.source)) {
      state_[fl.source].queue.push_back(pid);
      try_send(fl.source);
    } else {
      ++dropped_;
    }
    if (fl.packets_left > 0) {
      fl.next_time += fl.interval;
      if (fl.next_time <= cfg_.sim_duration_s) push(fl.next_time, EventType::PacketGen, f);
    }
  }

  double airtime(const Packet& p) const {
    const double service = static_cast<double>(p.bytes) * cfg_.byte_service_time_s;
    const double wire = static_cast<double>(p.bytes) * 8.0 / (cfg_.bandwidth_kbps * 1000.0);
    return std::max(service, wire) * (is_aes() ? 1.0 : kind_.overhead_factor);
  }

  void try_send(NodeId id) {
    auto& s = state_[id];
    if (!alive(id) || s.act == Activity::Transmit || s.queue.empty()) return;
    const auto relays = topo_.boundary_nodes();
    const auto hop = plan_next_hop(id, topo_, relays, cfg_.radio_range_m);
    if (!hop) {
      s.stalled = true;
      return;
    }
    s.stalled = false;
    s.tx_next = *hop;
    ++s.tx_token;
    set_activity(id, Activity::Transmit);
    push(now_ + airtime(packets_[s.queue.front()]), EventType::TxComplete, id, s.tx_token);
  }

  void on_tx_complete(NodeId id, std::uint64_t token) {
    auto& s = state_[id];
    if (!alive(id) || s.tx_token != token) return;
    if (s.act != Activity::Transmit) {
      // Left the transmitting state mid-packet; never expected.
      ++sleeping_tx_;
      return;
    }
    const std::size_t pid = s.queue.front();
    s.queue.pop_front();
    if (kind_.adaptive_timeout_s > 0.0 && !is_aes()) {
      s.listen_until = now_ + kind_.adaptive_timeout_s;
      set_activity(id, Activity::Listen);
      push(s.listen_until, EventType::ListenTimeout, id, s.tx_token);
    } else {
      set_activity(id, idle_activity());
    }

    const Hop hop = s.tx_next;
    if (hop.to_sink) {
      ++delivered_;
    } else if (alive(hop.node)) {
      state_[hop.node].queue.push_back(pid);
      try_send(hop.node);
    } else {
      ++dropped_;
    }
    try_send(id);
  }

  void on_listen_timeout(NodeId id, std::uint64_t token) {
    auto& s = state_[id];
    if (!alive(id) || s.tx_token != token || s.act != Activity::Listen) return;
    set_activity(id, idle_activity());
  }

  void deplete(NodeId id) {
    advance(id, now_);
    auto& s = state_[id];
    dropped_ += s.queue.size();
    s.queue.clear();
    s.stalled = false;
    s.ledger.depleted_at = now_;
    set_activity(id, Activity::Dead);
    lifetime_ = std::min(lifetime_, now_);

    auto& region = topo_.regions[topo_.nodes[id].region];
    if (region.boundary && *region.boundary == id) {
      topo_.nodes[id].role = Role::Member;
      region.boundary.reset();
      const bool any_alive = std::any_of(region.members.begin(), region.members.end(),
                                         [&](NodeId m) { return alive(m); });
      if (cfg_.reelect_boundary && any_alive) {
        const NodeId nb = elect_boundary(region, topo_.nodes, topo_.sink, [&](NodeId m) { return alive(m); });
        region.boundary = nb;
        topo_.nodes[nb].role = Role::Boundary;
        if (steady_ && is_aes() && state_[nb].act == Activity::Passive) set_activity(nb, Activity::Sleep);
      }
    }
    // Topology changed: stalled queues may have a route now.
    for (NodeId other = 0; other < state_.size(); ++other) {
      if (state_[other].stalled) try_send(other);
    }
  }

  SimReport finish() {
    for (NodeId id = 0; id < state_.size(); ++id) advance(id, now_);

    SimReport r;
    r.protocol = kind_.kind;
    r.seed = seed_;
    r.duration_s = cfg_.sim_duration_s;
    r.packets_generated = generated_;
    r.packets_delivered = delivered_;
    std::uint64_t dropped = dropped_;
    std::uint64_t in_flight = 0;
    for (const auto& s : state_) {
      if (s.queue.empty()) continue;
      // Packets still waiting for a route are given up at the end of the run.
      if (s.stalled) dropped += s.queue.size();
      else in_flight += s.queue.size();
    }
    r.packets_dropped = dropped;
    r.packets_in_flight = in_flight;

    r.per_node_energy_j.reserve(state_.size());
    r.ledgers.reserve(state_.size());
    for (const auto& s : state_) {
      r.per_node_energy_j.push_back(s.ledger.energy_j());
      r.ledgers.push_back(s.ledger);
      r.active_s += s.ledger.active_s;
      r.passive_s += s.ledger.passive_s;
      r.sleep_s += s.ledger.sleep_s;
    }
    double total = 0.0;
    for (double e : r.per_node_energy_j) total += e;
    if (cfg_.include_sink_energy) {
      r.sink_energy_j = cfg_.energy.comm_w() * cfg_.sim_duration_s;
      total += r.sink_energy_j;
    }
    r.total_energy_j = total;
    r.lifetime_s = lifetime_;
    r.sources = sources_;
    r.max_active_per_region = max_active_;
    r.sleeping_transmissions = sleeping_tx_;
    r.decisions_active = decisions_active_;
    r.decisions_passive = decisions_passive_;
    r.decisions_sleep = decisions_sleep_;
    return r;
  }

  ScenarioConfig cfg_;
  BaselineKind kind_;
  std::uint64_t seed_;
  Topology topo_;
  EnvironmentField env_;
  detection::SampleCountDistribution dist_;
  detection::RocModel roc_;
  std::optional<detection::ThresholdSolution> solution_;
  std::mt19937_64 decision_rng_;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  bool steady_ = false;

  std::vector<NodeState> state_;
  std::vector<std::size_t> active_in_region_;
  std::vector<Flow> flows_;
  std::vector<Packet> packets_;
  std::vector<NodeId> sources_;

  std::uint64_t generated_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t dropped_ = 0;
  std::uint64_t sleeping_tx_ = 0;
  std::uint64_t decisions_active_ = 0;
  std::uint64_t decisions_passive_ = 0;
  std::uint64_t decisions_sleep_ = 0;
  std::size_t max_active_ = 0;
  double lifetime_ = 0.0;
};

inline SimReport run(const ScenarioConfig& cfg, Protocol protocol, std::uint64_t seed) {
  cfg.validate();
  return Simulation(cfg, protocol, seed).run();
}

}  // namespace aes

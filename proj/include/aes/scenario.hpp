#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aes/detection.hpp"
#include "aes/energy.hpp"
#include "aes/error.hpp"

namespace aes {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Half-open on the upper edges, except that callers clamp the field edge.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool contains(Point p) const noexcept { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  double area() const noexcept { return (x1 - x0) * (y1 - y0); }

  friend bool operator==(const Rect&, const Rect&) = default;
};

enum class Protocol : std::uint8_t { AES, SMAC, TMAC, TRAMA, MMAC, CMAC };

inline constexpr std::array<Protocol, 6> kAllProtocols{Protocol::AES,   Protocol::SMAC,
                                                       Protocol::TMAC,  Protocol::TRAMA,
                                                       Protocol::MMAC,  Protocol::CMAC};

inline constexpr std::string_view protocol_name(Protocol p) {
  constexpr std::array<std::string_view, 6> names{"AES", "SMAC", "TMAC", "TRAMA", "MMAC", "CMAC"};
  return names[static_cast<std::size_t>(p)];
}

// Case-insensitive; accepts "S-MAC" style spellings too.
inline std::optional<Protocol> parse_protocol(std::string_view s) {
  std::string norm;
  for (char c : s) {
    if (c == '-' || c == '.' || c == '_') continue;
    norm.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  for (Protocol p : kAllProtocols) {
    if (norm == protocol_name(p)) return p;
  }
  return std::nullopt;
}

/// Energy envelope of a MAC protocol. Baselines are duty-cycle models, not
/// protocol implementations: a node keeps its radio on for
/// `duty_cycle_fraction` of the time (plus schedule upkeep for
/// schedule-based kinds), and every transmission occupies the radio for
/// `overhead_factor` times the bare airtime. A positive `adaptive_timeout_s`
/// keeps the radio listening that long after each transmission.
struct BaselineKind {
  Protocol kind = Protocol::AES;
  double duty_cycle_fraction = 1.0;
  double overhead_factor = 1.0;
  bool schedule_based = false;
  double schedule_surcharge = 0.0;
  double adaptive_timeout_s = 0.0;

  double effective_duty() const noexcept {
    const double d = duty_cycle_fraction + (schedule_based ? schedule_surcharge : 0.0);
    return d > 1.0 ? 1.0 : d;
  }

  void validate() const {
    const std::string who(protocol_name(kind));
    detail::require(duty_cycle_fraction > 0.0 && duty_cycle_fraction <= 1.0,
                    who + ": duty_cycle_fraction must lie in (0,1]");
    detail::require(overhead_factor >= 1.0, who + ": overhead_factor must be >= 1");
    detail::require(schedule_surcharge >= 0.0 && schedule_surcharge <= 1.0,
                    who + ": schedule_surcharge must lie in [0,1]");
    detail::require(adaptive_timeout_s >= 0.0, who + ": adaptive_timeout_s must be non-negative");
  }

  friend bool operator==(const BaselineKind&, const BaselineKind&) = default;
};

inline BaselineKind default_baseline(Protocol p) {
  switch (p) {
    case Protocol::AES: return {p, 1.0, 1.0, false, 0.0, 0.0};
    case Protocol::SMAC: return {p, 0.5, 1.5, false, 0.0, 0.0};
    case Protocol::TMAC: return {p, 0.2, 1.5, false, 0.0, 0.015};
    case Protocol::TRAMA: return {p, 0.4, 1.0, true, 0.05, 0.0};
    case Protocol::MMAC: return {p, 0.4, 1.0, true, 0.05, 0.0};
    case Protocol::CMAC: return {p, 0.3, 1.2, false, 0.0, 0.0};
  }
  return {};
}

struct DetectionSettings {
  double alpha = 0.05;
  double roc_s = 100.0;
  std::size_t k_offset = 0;
  std::vector<double> pk{0.1, 0.3, 0.6};
  double pc = 0.01;
  double epsilon_mode = 0.05;
  double solver_tol = 1e-9;

  detection::RocModel roc() const {
    return detection::RocModel::power_law(roc_s, pk.empty() ? 0 : pk.size() - 1, k_offset);
  }
  detection::SampleCountDistribution distribution() const {
    return detection::SampleCountDistribution(pk);
  }

  void validate() const {
    detail::require(alpha > 0.0 && alpha < 1.0, "detection: alpha must lie in (0,1)");
    detail::require(roc_s > 0.0, "detection: roc_s must be positive");
    detail::require(detail::is_probability(pc), "detection: pc must lie in [0,1]");
    detail::require(epsilon_mode > 0.0 && epsilon_mode < 0.5,
                    "detection: epsilon_mode must lie in (0,0.5)");
    detail::require(solver_tol > 0.0, "detection: solver_tol must be positive");
    (void)distribution();
  }

  friend bool operator==(const DetectionSettings&, const DetectionSettings&) = default;
};

/// Every experiment parameter in one record. Defaults reproduce the
/// 105-node, 200 m x 200 m deployment with the sink at (140, 60).
struct ScenarioConfig {
  double field_width_m = 200.0;
  double field_height_m = 200.0;
  double region_size_m = 40.0;
  std::size_t node_count = 105;
  Point sink{140.0, 60.0};
  double bandwidth_kbps = 50.0;
  double sim_duration_s = 2400.0;
  double init_phase_s = 30.0;
  std::size_t connections = 30;
  std::uint64_t data_total_bytes = 30'000'000;
  double byte_service_time_s = 3.77e-4;
  std::size_t packet_bytes = 1000;
  std::size_t runs = 12;
  double initial_battery_j = 25.0;
  std::uint64_t seed = 1;
  double beacon_interval_s = 0.5;
  double sense_window_s = 0.005;
  double radio_range_m = 40.0;
  std::vector<Rect> indoor_zones{{0.0, 0.0, 100.0, 50.0}, {100.0, 150.0, 200.0, 200.0}};
  bool reelect_boundary = true;
  bool include_sink_energy = false;
  std::size_t plot_transmitters = 14;

  energy::EnergyParams energy;
  DetectionSettings detection;
  std::array<BaselineKind, 6> baselines{default_baseline(Protocol::AES),
                                        default_baseline(Protocol::SMAC),
                                        default_baseline(Protocol::TMAC),
                                        default_baseline(Protocol::TRAMA),
                                        default_baseline(Protocol::MMAC),
                                        default_baseline(Protocol::CMAC)};

  const BaselineKind& baseline(Protocol p) const { return baselines[static_cast<std::size_t>(p)]; }
  BaselineKind& baseline(Protocol p) { return baselines[static_cast<std::size_t>(p)]; }

  std::size_t region_cols() const { return static_cast<std::size_t>(std::llround(field_width_m / region_size_m)); }
  std::size_t region_rows() const { return static_cast<std::size_t>(std::llround(field_height_m / region_size_m)); }

  void validate() const {
    detail::require(field_width_m > 0.0 && field_height_m > 0.0, "simulation: field dimensions must be positive");
    detail::require(region_size_m > 0.0, "simulation: region_size_m must be positive");
    auto divides = [&](double dim) {
      const double q = dim / region_size_m;
      return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q) && std::round(q) >= 1.0;
    };
    detail::require(divides(field_width_m) && divides(field_height_m),
                    "simulation: region_size_m must divide both field dimensions");
    detail::require(sink.x >= 0.0 && sink.x <= field_width_m && sink.y >= 0.0 && sink.y <= field_height_m,
                    "simulation: sink must lie inside the field");
    detail::require(bandwidth_kbps > 0.0, "simulation: bandwidth_kbps must be positive");
    detail::require(sim_duration_s >= 0.0, "simulation: sim_duration_s must be non-negative");
    detail::require(init_phase_s >= 0.0, "simulation: init_phase_s must be non-negative");
    detail::require(sim_duration_s == 0.0 || init_phase_s < sim_duration_s,
                    "simulation: init_phase_s must be shorter than sim_duration_s");
    detail::require(byte_service_time_s > 0.0, "simulation: byte_service_time_s must be positive");
    detail::require(packet_bytes > 0, "simulation: packet_bytes must be positive");
    detail::require(runs > 0, "simulation: runs must be positive");
    detail::require(initial_battery_j > 0.0, "simulation: initial_battery_j must be positive");
    detail::require(beacon_interval_s > 0.0, "simulation: beacon_interval_s must be positive");
    detail::require(sense_window_s >= 0.0 && sense_window_s <= beacon_interval_s,
                    "simulation: sense_window_s must lie in [0, beacon_interval_s]");
    detail::require(radio_range_m > 0.0, "simulation: radio_range_m must be positive");
    for (const auto& z : indoor_zones) {
      detail::require(z.x0 < z.x1 && z.y0 < z.y1, "simulation: indoor zone must have positive extent");
    }
    energy.validate();
    detection.validate();
    for (std::size_t i = 0; i < baselines.size(); ++i) {
      detail::require(baselines[i].kind == kAllProtocols[i], "baselines: table out of order");
      baselines[i].validate();
    }
  }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

}  // namespace aes

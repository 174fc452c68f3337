#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>

#include "aes/error.hpp"

namespace aes::energy {

/// Radio and battery parameters. Powers are in milliwatts, energies in joules.
struct EnergyParams {
  double power_comm_mw = 160.0;
  double power_sense_mw = 12.0;
  double power_sleep_mw = 0.5;
  double tx_power_min_dbm = -20.0;
  double tx_power_max_dbm = 12.0;
  double e_min_j = 1e-6;
  double path_loss_n = 2.0;
  // Solar credit while passive; the battery model caps it at capacity.
  double harvest_rate_mw = 0.5;

  double comm_w() const noexcept { return power_comm_mw * 1e-3; }
  double sense_w() const noexcept { return power_sense_mw * 1e-3; }
  double sleep_w() const noexcept { return power_sleep_mw * 1e-3; }
  double harvest_w() const noexcept { return harvest_rate_mw * 1e-3; }

  void validate() const {
    detail::require(power_comm_mw > 0.0 && power_sense_mw > 0.0 && power_sleep_mw > 0.0,
                    "energy: powers must be positive");
    detail::require(power_sleep_mw < power_sense_mw && power_sense_mw < power_comm_mw,
                    "energy: require power_sleep < power_sense < power_comm");
    detail::require(tx_power_min_dbm <= tx_power_max_dbm,
                    "energy: tx_power_min_dbm must not exceed tx_power_max_dbm");
    detail::require(e_min_j > 0.0, "energy: e_min_j must be positive");
    detail::require(path_loss_n >= 1.0, "energy: path_loss_n must be >= 1");
    detail::require(harvest_rate_mw >= 0.0, "energy: harvest_rate_mw must be non-negative");
  }

  friend bool operator==(const EnergyParams&, const EnergyParams&) = default;
};

// EN = sum_i E(i) * a_i
inline double network_energy(std::span<const double> node_energies,
                             std::span<const std::uint8_t> indicators) {
  detail::require(node_energies.size() == indicators.size(),
                  "network_energy: energy and indicator lists differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < node_energies.size(); ++i) {
    detail::require(node_energies[i] >= 0.0, "network_energy: negative node energy");
    detail::require(indicators[i] <= 1, "network_energy: indicators must be 0 or 1");
    if (indicators[i]) total += node_energies[i];
  }
  return total;
}

/// A link i -> j is admitted when the received energy beats the floor
/// (1 + min r^n) * e_min, where r is the distance to each candidate next hop
/// normalised by the radio range.
inline bool link_admissible(double e_ij, std::span<const double> r_candidates, double n,
                            double e_min) {
  detail::require(!r_candidates.empty(), "link_admissible: empty candidate list");
  detail::require(e_min > 0.0, "link_admissible: e_min must be positive");
  detail::require(n >= 1.0, "link_admissible: path-loss exponent must be >= 1");
  double min_rn = INFINITY;
  for (double r : r_candidates) {
    detail::require(r > 0.0 && r <= 1.0, "link_admissible: normalised distance outside (0,1]");
    min_rn = std::min(min_rn, std::pow(r, n));
  }
  return e_ij > (1.0 + min_rn) * e_min;
}

enum class PowerState : std::uint8_t { ActiveComm, ActiveSense, Passive, Sleep };

// Energy drawn in joules. Passive draws nothing and is credited with the
// harvest rate, so the result is negative; capping at battery capacity is the
// battery's concern.
inline double mode_energy(PowerState state, double duration_s, const EnergyParams& params) {
  detail::require(duration_s >= 0.0, "mode_energy: negative duration");
  switch (state) {
    case PowerState::ActiveComm: return params.comm_w() * duration_s;
    case PowerState::ActiveSense: return params.sense_w() * duration_s;
    case PowerState::Sleep: return params.sleep_w() * duration_s;
    case PowerState::Passive: return -params.harvest_w() * duration_s;
  }
  return 0.0;
}

/// Ring around the sink between `inner` (= r + t/2) and `outer_radius`.
struct AnnulusParams {
  double lambda = 105.0 / (200.0 * 200.0);
  double outer_radius = 100.0;
  double inner = 20.0;
  double td = 1.0;
  double ds = 1.0;
  double vj = 1.0;

  void validate() const {
    detail::require(lambda > 0.0, "annulus: lambda must be positive");
    detail::require(inner >= 0.0, "annulus: inner radius must be non-negative");
    detail::require(inner <= outer_radius, "annulus: inner radius exceeds outer radius");
  }
};

struct AnnulusTotals {
  double transmission = 0.0;
  double generation = 0.0;
  double consumption = 0.0;
  double total = 0.0;
};

// Node mass in the ring: 2*pi * integral_inner^R lambda x dx.
inline double annulus_node_mass(const AnnulusParams& p) {
  p.validate();
  return 2.0 * std::numbers::pi * p.lambda * 0.5 *
         (p.outer_radius * p.outer_radius - p.inner * p.inner);
}

inline AnnulusTotals annulus_totals(const AnnulusParams& p) {
  if (p.inner > p.outer_radius) throw InvalidArgument("annulus: inner radius exceeds outer radius");
  const double mass = annulus_node_mass(p);
  AnnulusTotals t;
  t.transmission = mass * p.td;
  t.generation = mass * p.ds;
  t.consumption = mass * p.vj;
  t.total = t.consumption + t.generation + t.transmission;
  return t;
}

}  // namespace aes::energy

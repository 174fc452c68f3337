#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "aes/simulator.hpp"

using namespace aes;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ScenarioConfig short_config(double duration = 120.0) {
  ScenarioConfig cfg;
  cfg.sim_duration_s = duration;
  cfg.init_phase_s = 10.0;
  cfg.data_total_bytes = 1'500'000;
  return cfg;
}

// One node, alone in a single region that also holds the sink.
ScenarioConfig single_node() {
  ScenarioConfig cfg;
  cfg.field_width_m = 40.0;
  cfg.field_height_m = 40.0;
  cfg.region_size_m = 40.0;
  cfg.node_count = 1;
  cfg.sink = {20.0, 20.0};
  cfg.connections = 1;
  cfg.data_total_bytes = 1000;
  cfg.init_phase_s = 0.0;
  cfg.sim_duration_s = 10.0;
  cfg.indoor_zones.clear();
  return cfg;
}

}  // namespace

TEST_CASE("savings examples", "[savings]") {
  CHECK_THAT(compute_savings(64.0, 500.0), WithinAbs(87.2, 1e-12));
  CHECK_THAT(compute_savings(151.0, 400.0), WithinAbs(62.25, 1e-12));
  CHECK(compute_savings(10.0, 10.0) == 0.0);
  CHECK(compute_savings(20.0, 10.0) < 0.0);
  CHECK_THROWS_AS(compute_savings(1.0, 0.0), InvalidArgument);
}

TEST_CASE("sensing round: separable curve indoors picks passive", "[decide]") {
  // Indoor branch reads 1 at the threshold, outdoor branch reads the threshold.
  const auto roc = detection::RocModel::tabulated({{{0.0, 0.0}, {0.02, 1.0}, {1.0, 1.0}}});
  const auto dist = detection::SampleCountDistribution::point_mass(0);
  detection::ThresholdSolution sol;
  sol.ue = {0.02};
  sol.expected_ue = 0.02;
  sol.expected_pd = 1.0;
  const DetectionInputs in{&dist, &roc, &sol, 0.05};
  std::mt19937_64 rng(1);

  EnvironmentField env{{{0.0, 0.0, 10.0, 10.0}}, 0.0};
  auto indoor = sense_and_decide({5.0, 5.0}, false, env, in, rng);
  REQUIRE(indoor);
  CHECK_THAT(indoor->di, WithinAbs(1.0, 1e-15));
  CHECK(indoor->mode == detection::Mode::Passive);

  auto outdoor = sense_and_decide({50.0, 50.0}, false, env, in, rng);
  REQUIRE(outdoor);
  CHECK_THAT(outdoor->di, WithinAbs(0.02, 1e-15));
  CHECK(outdoor->mode == detection::Mode::Active);

  env.pc = 0.5;
  auto noisy = sense_and_decide({5.0, 5.0}, false, env, in, rng);
  REQUIRE(noisy);
  CHECK_THAT(noisy->di, WithinAbs(0.5, 1e-15));
  CHECK(noisy->mode == detection::Mode::Sleep);

  CHECK_FALSE(sense_and_decide({5.0, 5.0}, true, env, in, rng).has_value());
}

TEST_CASE("zero duration yields an empty report", "[run]") {
  auto cfg = short_config();
  cfg.sim_duration_s = 0.0;
  cfg.init_phase_s = 0.0;
  for (Protocol p : kAllProtocols) {
    const auto r = run(cfg, p, 3);
    CHECK(r.total_energy_j == 0.0);
    CHECK(r.packets_generated == 0);
    CHECK(r.packets_delivered == 0);
    CHECK(r.active_s == 0.0);
    CHECK(r.sleep_s == 0.0);
    CHECK(r.lifetime_s == 0.0);
  }
}

TEST_CASE("single node sending one packet straight to the sink", "[run]") {
  const auto cfg = single_node();
  const auto r = run(cfg, Protocol::AES, 1);
  REQUIRE(r.per_node_energy_j.size() == 1);
  CHECK(r.packets_generated == 1);
  CHECK(r.packets_delivered == 1);
  CHECK(r.packets_dropped == 0);
  const double airtime = 1000 * 3.77e-4;
  CHECK_THAT(r.active_s, WithinAbs(airtime, 1e-12));
  CHECK_THAT(r.sleep_s, WithinAbs(10.0 - airtime, 1e-12));
  CHECK_THAT(r.total_energy_j, WithinRel(0.160 * airtime + 0.0005 * (10.0 - airtime), 1e-12));
  CHECK(r.lifetime_s == 10.0);
}

TEST_CASE("run invariants across protocols and seeds", "[run][property]") {
  const auto cfg = short_config();
  for (Protocol p : kAllProtocols) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      INFO(protocol_name(p) << " seed " << seed);
      const auto r = run(cfg, p, seed);
      REQUIRE(r.ledgers.size() == cfg.node_count);

      double sum = 0.0;
      for (std::size_t i = 0; i < r.ledgers.size(); ++i) {
        const auto& l = r.ledgers[i];
        CHECK_THAT(l.active_s + l.passive_s + l.sleep_s, WithinAbs(cfg.sim_duration_s, 1e-6));
        CHECK(l.depleted_s <= l.sleep_s + 1e-9);
        CHECK(l.consumed_j >= 0.0);
        CHECK(l.harvested_j >= 0.0);
        CHECK(l.consumed_j <= cfg.initial_battery_j + l.harvested_j + 1e-9);
        CHECK_THAT(r.per_node_energy_j[i], WithinAbs(l.consumed_j - l.harvested_j, 1e-12));
        sum += r.per_node_energy_j[i];
      }
      CHECK_THAT(r.total_energy_j, WithinRel(sum, 1e-12));
      CHECK(r.packets_delivered + r.packets_in_flight + r.packets_dropped == r.packets_generated);
      CHECK(r.packets_generated > 0);
      CHECK(r.sleeping_transmissions == 0);
      CHECK(r.lifetime_s <= cfg.sim_duration_s);
      if (p == Protocol::AES) {
        CHECK(r.max_active_per_region <= 1);
        CHECK(r.decisions_active + r.decisions_passive + r.decisions_sleep > 0);
      } else {
        CHECK(r.passive_s == 0.0);
      }
    }
  }
}

TEST_CASE("all three modes occur under the default detection settings", "[run]") {
  const auto r = run(short_config(), Protocol::AES, 1);
  CHECK(r.decisions_active > 0);
  CHECK(r.decisions_passive > 0);
  CHECK(r.decisions_sleep > 0);
  CHECK(r.passive_s > 0.0);
}

TEST_CASE("runs are deterministic per seed", "[run]") {
  const auto cfg = short_config();
  for (Protocol p : {Protocol::AES, Protocol::TMAC}) {
    const auto a = run(cfg, p, 9);
    const auto b = run(cfg, p, 9);
    CHECK(a.per_node_energy_j == b.per_node_energy_j);
    CHECK(a.packets_delivered == b.packets_delivered);
    CHECK(a.lifetime_s == b.lifetime_s);
  }
  CHECK(run(cfg, Protocol::AES, 9).total_energy_j != run(cfg, Protocol::AES, 10).total_energy_j);
}

TEST_CASE("baseline energy grows with the duty cycle", "[run][property]") {
  auto cfg = short_config();
  double prev = 0.0;
  for (double d : {0.1, 0.3, 0.6, 1.0}) {
    cfg.baseline(Protocol::SMAC).duty_cycle_fraction = d;
    const double e = run(cfg, Protocol::SMAC, 4).total_energy_j;
    INFO("duty " << d);
    CHECK(e > prev);
    prev = e;
  }
}

TEST_CASE("sink energy is optional and excluded by default", "[run]") {
  auto cfg = short_config();
  const auto without = run(cfg, Protocol::AES, 5);
  cfg.include_sink_energy = true;
  const auto with = run(cfg, Protocol::AES, 5);
  CHECK(without.sink_energy_j == 0.0);
  CHECK_THAT(with.sink_energy_j, WithinRel(0.160 * cfg.sim_duration_s, 1e-12));
  CHECK_THAT(with.total_energy_j, WithinRel(without.total_energy_j + with.sink_energy_j, 1e-12));
}

TEST_CASE("invalid configurations are rejected before running", "[run]") {
  auto cfg = short_config();
  cfg.detection.alpha = 1.0;
  CHECK_THROWS_AS(run(cfg, Protocol::AES, 1), InvalidArgument);
  cfg = short_config();
  cfg.init_phase_s = cfg.sim_duration_s;
  CHECK_THROWS_AS(run(cfg, Protocol::AES, 1), InvalidArgument);
}

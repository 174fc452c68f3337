#include <catch_amalgamated.hpp>

#include <sstream>
#include <vector>

#include "aes/campaign.hpp"
#include "aes/report_io.hpp"

using namespace aes;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ScenarioConfig short_config() {
  ScenarioConfig cfg;
  cfg.sim_duration_s = 60.0;
  cfg.init_phase_s = 5.0;
  cfg.data_total_bytes = 600'000;
  return cfg;
}

}  // namespace

TEST_CASE("summary statistics use the sample standard deviation", "[summary]") {
  const std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
  const auto s = summarize(xs);
  CHECK(s.mean == 5.0);
  CHECK_THAT(s.sd, WithinRel(std::sqrt(32.0 / 7.0), 1e-15));
  CHECK(summarize(std::vector{3.5}).sd == 0.0);
  CHECK(summarize(std::vector<double>{}).mean == 0.0);
}

TEST_CASE("seed ranges are consecutive", "[seeds]") {
  CHECK(seed_range(7, 3) == std::vector<std::uint64_t>{7, 8, 9});
  CHECK(seed_range(1, 0).empty());
}

TEST_CASE("one protocol and one seed reproduces the single run", "[campaign]") {
  const auto cfg = short_config();
  const std::vector<Protocol> kinds{Protocol::TMAC};
  const std::vector<std::uint64_t> seeds{4};
  const auto c = run_campaign(cfg, kinds, seeds);
  const auto r = run(cfg, Protocol::TMAC, 4);
  REQUIRE(c.runs.size() == 1);
  REQUIRE(c.summary.size() == 1);
  CHECK(c.runs[0].total_energy_j == r.total_energy_j);
  CHECK(c.summary[0].total_energy_j.mean == r.total_energy_j);
  CHECK(c.summary[0].total_energy_j.sd == 0.0);
  CHECK(c.summary[0].lifetime_s.mean == r.lifetime_s);
  CHECK_FALSE(c.summary[0].savings_pct);
  CHECK_FALSE(c.savings_vs_mean_baseline());
}

TEST_CASE("results are sorted by protocol then seed", "[campaign]") {
  const std::vector<Protocol> kinds{Protocol::CMAC, Protocol::AES, Protocol::SMAC};
  const std::vector<std::uint64_t> seeds{5, 6};
  const auto c = run_campaign(short_config(), kinds, seeds);
  REQUIRE(c.runs.size() == 6);
  const Protocol order[] = {Protocol::AES, Protocol::AES, Protocol::SMAC, Protocol::SMAC, Protocol::CMAC,
                            Protocol::CMAC};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(c.runs[i].protocol == order[i]);
    CHECK(c.runs[i].seed == seeds[i % 2]);
  }
}

TEST_CASE("repeated protocols give identical rows", "[campaign]") {
  const std::vector<Protocol> kinds{Protocol::SMAC, Protocol::SMAC};
  const std::vector<std::uint64_t> seeds{1, 2};
  const auto c = run_campaign(short_config(), kinds, seeds);
  REQUIRE(c.summary.size() == 2);
  CHECK(c.summary[0].total_energy_j.mean == c.summary[1].total_energy_j.mean);
  CHECK(c.summary[0].total_energy_j.sd == c.summary[1].total_energy_j.sd);
}

TEST_CASE("parallel and serial campaigns agree exactly", "[campaign]") {
  const auto cfg = short_config();
  const std::vector<Protocol> kinds(kAllProtocols.begin(), kAllProtocols.end());
  const auto seeds = seed_range(1, 3);
  const auto serial = run_campaign(cfg, kinds, seeds, 1);
  const auto parallel = run_campaign(cfg, kinds, seeds, 4);
  std::ostringstream a;
  std::ostringstream b;
  io::write_runs_csv(a, serial.runs);
  io::write_summary_csv(a, serial.summary);
  io::write_runs_csv(b, parallel.runs);
  io::write_summary_csv(b, parallel.summary);
  CHECK(a.str() == b.str());
}

TEST_CASE("savings are taken against the AES run with the same seed", "[campaign]") {
  const std::vector<Protocol> kinds{Protocol::AES, Protocol::SMAC};
  const auto seeds = seed_range(1, 2);
  const auto c = run_campaign(short_config(), kinds, seeds);
  REQUIRE(c.runs.size() == 4);
  CHECK_FALSE(c.runs[0].savings_pct);
  for (std::size_t i = 0; i < 2; ++i) {
    REQUIRE(c.runs[2 + i].savings_pct);
    CHECK_THAT(*c.runs[2 + i].savings_pct,
               WithinAbs(compute_savings(c.runs[i].total_energy_j, c.runs[2 + i].total_energy_j), 1e-12));
  }
  const auto* aes_row = c.row(Protocol::AES);
  const auto* smac_row = c.row(Protocol::SMAC);
  REQUIRE(aes_row);
  REQUIRE(smac_row);
  CHECK_FALSE(aes_row->savings_pct);
  REQUIRE(smac_row->savings_pct);
  CHECK_THAT(*smac_row->savings_pct,
             WithinAbs(compute_savings(aes_row->total_energy_j.mean, smac_row->total_energy_j.mean), 1e-12));
  CHECK_THAT(*c.savings_vs_mean_baseline(), WithinAbs(*smac_row->savings_pct, 1e-12));
  CHECK(*smac_row->savings_pct > 0.0);
}

TEST_CASE("campaign argument errors", "[campaign]") {
  const std::vector<std::uint64_t> seeds{1};
  CHECK_THROWS_AS(run_campaign(short_config(), std::vector<Protocol>{}, seeds), InvalidArgument);
  CHECK_THROWS_AS(run_campaign(short_config(), std::vector{Protocol::AES}, std::vector<std::uint64_t>{}),
                  InvalidArgument);
  auto bad = short_config();
  bad.detection.pc = 2.0;
  CHECK_THROWS_AS(run_campaign(bad, std::vector{Protocol::AES}, seeds, 2), InvalidArgument);
}

TEST_CASE("csv writers", "[io]") {
  CHECK(io::fmt_real(-0.0) == "0");
  CHECK(io::fmt_real(1071.8812) == "1071.88");
  CHECK(io::fmt_real(1e-7) == "1e-07");

  const auto c = run_campaign(short_config(), std::vector{Protocol::AES, Protocol::TMAC}, seed_range(1, 2));
  std::ostringstream runs;
  io::write_runs_csv(runs, c.runs);
  std::istringstream lines(runs.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == io::kRunsHeader);
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(line.starts_with(std::to_string(rows) + ","));
  }
  CHECK(rows == 4);

  std::ostringstream summary;
  io::write_summary_csv(summary, c.summary);
  const auto text = summary.str();
  CHECK(text.starts_with("protocol,runs,total_energy_j_mean,total_energy_j_sd,"));
  CHECK(text.find("\nAES,2,") != std::string::npos);
  CHECK(text.find("\nTMAC,2,") != std::string::npos);

  std::ostringstream lifetime;
  io::write_lifetime_vs_protocol(lifetime, c.summary);
  CHECK(lifetime.str().starts_with("# "));
}

#pragma once

// Multi-seed, multi-protocol campaigns. Runs are independent and may execute
// on several threads; results are always returned sorted by (protocol, seed)
// so the output does not depend on scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "aes/error.hpp"
#include "aes/scenario.hpp"
#include "aes/simulator.hpp"

namespace aes {

struct MetricStats {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single run
};

inline MetricStats summarize(std::span<const double> xs) {
  MetricStats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

struct SummaryRow {
  Protocol protocol = Protocol::AES;
  std::size_t runs = 0;
  MetricStats total_energy_j;
  MetricStats mean_node_energy_j;
  MetricStats packets_generated;
  MetricStats packets_delivered;
  MetricStats active_s;
  MetricStats passive_s;
  MetricStats sleep_s;
  MetricStats lifetime_s;
  std::optional<double> savings_pct;  // AES mean against this row's mean
};

struct CampaignResult {
  std::vector<SimReport> runs;
  std::vector<SummaryRow> summary;

  const SummaryRow* row(Protocol p) const {
    for (const auto& r : summary) {
      if (r.protocol == p) return &r;
    }
    return nullptr;
  }

  // Saving of the AES mean against the mean of all baseline means.
  std::optional<double> savings_vs_mean_baseline() const {
    const auto* aes_row = row(Protocol::AES);
    if (!aes_row) return std::nullopt;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : summary) {
      if (r.protocol == Protocol::AES) continue;
      sum += r.total_energy_j.mean;
      ++n;
    }
    if (n == 0 || !(sum > 0.0)) return std::nullopt;
    return compute_savings(aes_row->total_energy_j.mean, sum / static_cast<double>(n));
  }
};

inline std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t n) {
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t i = 0; i < n; ++i) seeds[i] = base + i;
  return seeds;
}

namespace detail {

template <class Get>
MetricStats stat_of(std::span<const SimReport> runs, Get get) {
  std::vector<double> xs;
  xs.reserve(runs.size());
  for (const auto& r : runs) xs.push_back(static_cast<double>(get(r)));
  return summarize(xs);
}

inline SummaryRow summary_row(Protocol p, std::span<const SimReport> runs) {
  SummaryRow row;
  row.protocol = p;
  row.runs = runs.size();
  row.total_energy_j = stat_of(runs, [](const SimReport& r) { return r.total_energy_j; });
  row.mean_node_energy_j = stat_of(runs, [](const SimReport& r) { return r.mean_node_energy_j(); });
  row.packets_generated = stat_of(runs, [](const SimReport& r) { return r.packets_generated; });
  row.packets_delivered = stat_of(runs, [](const SimReport& r) { return r.packets_delivered; });
  row.active_s = stat_of(runs, [](const SimReport& r) { return r.active_s; });
  row.passive_s = stat_of(runs, [](const SimReport& r) { return r.passive_s; });
  row.sleep_s = stat_of(runs, [](const SimReport& r) { return r.sleep_s; });
  row.lifetime_s = stat_of(runs, [](const SimReport& r) { return r.lifetime_s; });
  return row;
}

}  // namespace detail

/// Run every (protocol, seed) pair. Protocols are ordered by their enum
/// value; repeated protocols are kept and yield identical rows. `jobs` = 0
/// means one worker per hardware thread.
inline CampaignResult run_campaign(const ScenarioConfig& cfg, std::span<const Protocol> protocols,
                                   std::span<const std::uint64_t> seeds, std::size_t jobs = 1) {
  detail::require(!protocols.empty(), "run_campaign: protocol list is empty");
  detail::require(!seeds.empty(), "run_campaign: seed list is empty");
  cfg.validate();

  std::vector<Protocol> kinds(protocols.begin(), protocols.end());
  std::stable_sort(kinds.begin(), kinds.end());

  struct Job {
    Protocol protocol;
    std::uint64_t seed;
  };
  std::vector<Job> work;
  for (Protocol p : kinds) {
    for (std::uint64_t s : seeds) work.push_back({p, s});
  }

  std::vector<SimReport> reports(work.size());
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, work.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      try {
        reports[i] = run(cfg, work[i].protocol, work[i].seed);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Per-run savings against the AES run with the same seed.
  for (auto& r : reports) {
    if (r.protocol == Protocol::AES) continue;
    for (const auto& a : reports) {
      if (a.protocol == Protocol::AES && a.seed == r.seed) {
        if (r.total_energy_j > 0.0) r.savings_pct = compute_savings(a.total_energy_j, r.total_energy_j);
        break;
      }
    }
  }

  CampaignResult result;
  const std::size_t per_kind = seeds.size();
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    std::span<const SimReport> block(reports.data() + k * per_kind, per_kind);
    result.summary.push_back(detail::summary_row(kinds[k], block));
  }
  if (const auto* aes_row = result.row(Protocol::AES)) {
    const double aes_mean = aes_row->total_energy_j.mean;
    for (auto& row : result.summary) {
      if (row.protocol != Protocol::AES && row.total_energy_j.mean > 0.0) {
        row.savings_pct = compute_savings(aes_mean, row.total_energy_j.mean);
      }
    }
  }
  result.runs = std::move(reports);
  return result;
}

}  // namespace aes

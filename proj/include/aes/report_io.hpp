#pragma once

// CSV and plot-data writers. Reals are printed with 6 significant digits,
// counts as integers; no timestamps, so identical campaigns give identical
// bytes.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aes/campaign.hpp"
#include "aes/error.hpp"
#include "aes/simulator.hpp"

namespace aes::io {

inline std::string fmt_real(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline constexpr const char* kRunsHeader =
    "run_id,seed,protocol,total_energy_j,mean_node_energy_j,packets_generated,packets_delivered,"
    "active_s,passive_s,sleep_s,lifetime_s";

inline void write_runs_csv(std::ostream& os, const std::vector<SimReport>& runs) {
  os << kRunsHeader << '\n';
  std::size_t id = 1;
  for (const auto& r : runs) {
    os << id++ << ',' << r.seed << ',' << protocol_name(r.protocol) << ',' << fmt_real(r.total_energy_j) << ','
       << fmt_real(r.mean_node_energy_j()) << ',' << r.packets_generated << ',' << r.packets_delivered << ','
       << fmt_real(r.active_s) << ',' << fmt_real(r.passive_s) << ',' << fmt_real(r.sleep_s) << ','
       << fmt_real(r.lifetime_s) << '\n';
  }
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "protocol,runs";
  for (const char* m : {"total_energy_j", "mean_node_energy_j", "packets_generated", "packets_delivered",
                        "active_s", "passive_s", "sleep_s", "lifetime_s"}) {
    os << ',' << m << "_mean," << m << "_sd";
  }
  os << ",savings_pct\n";
  for (const auto& r : rows) {
    os << protocol_name(r.protocol) << ',' << r.runs;
    for (const MetricStats* s : {&r.total_energy_j, &r.mean_node_energy_j, &r.packets_generated,
                                 &r.packets_delivered, &r.active_s, &r.passive_s, &r.sleep_s, &r.lifetime_s}) {
      os << ',' << fmt_real(s->mean) << ',' << fmt_real(s->sd);
    }
    os << ',' << (r.savings_pct ? fmt_real(*r.savings_pct) : std::string()) << '\n';
  }
}

namespace detail {

// Runs grouped per protocol in campaign order.
inline std::vector<std::vector<const SimReport*>> by_protocol(const std::vector<SimReport>& runs) {
  std::vector<std::vector<const SimReport*>> groups;
  for (const auto& r : runs) {
    if (groups.empty() || groups.back().front()->protocol != r.protocol) groups.emplace_back();
    groups.back().push_back(&r);
  }
  return groups;
}

// Mean over runs of the energy spent by the first n nodes, n = 1..N.
inline std::vector<double> cumulative_energy(const std::vector<const SimReport*>& group) {
  std::size_t n = 0;
  for (const auto* r : group) n = std::max(n, r->per_node_energy_j.size());
  std::vector<double> acc(n, 0.0);
  for (const auto* r : group) {
    double run = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i < r->per_node_energy_j.size()) run += r->per_node_energy_j[i];
      acc[i] += run;
    }
  }
  for (double& v : acc) v /= static_cast<double>(group.size());
  return acc;
}

inline void point(std::ostream& os, double x, double y) { os << fmt_real(x) << ' ' << fmt_real(y) << '\n'; }

}  // namespace detail

// Energy of the first n sensors against n, one block per protocol.
inline void write_energy_vs_nodes(std::ostream& os, const std::vector<SimReport>& runs) {
  os << "# nodes total_energy_j (mean over seeds)\n";
  bool first = true;
  for (const auto& g : detail::by_protocol(runs)) {
    if (!first) os << "\n\n";
    first = false;
    os << "# " << protocol_name(g.front()->protocol) << '\n';
    const auto cum = detail::cumulative_energy(g);
    for (std::size_t i = 0; i < cum.size(); ++i) detail::point(os, static_cast<double>(i + 1), cum[i]);
  }
}

// AES saving against each baseline as the node count grows.
inline void write_savings_vs_nodes(std::ostream& os, const std::vector<SimReport>& runs) {
  os << "# nodes savings_pct (AES vs baseline, mean energies over seeds)\n";
  const auto groups = detail::by_protocol(runs);
  const auto aes_it = std::find_if(groups.begin(), groups.end(),
                                   [](const auto& g) { return g.front()->protocol == Protocol::AES; });
  if (aes_it == groups.end()) return;
  const auto aes_cum = detail::cumulative_energy(*aes_it);
  bool first = true;
  for (const auto& g : groups) {
    if (g.front()->protocol == Protocol::AES) continue;
    if (!first) os << "\n\n";
    first = false;
    os << "# " << protocol_name(g.front()->protocol) << '\n';
    const auto cum = detail::cumulative_energy(g);
    for (std::size_t i = 0; i < std::min(cum.size(), aes_cum.size()); ++i) {
      if (cum[i] > 0.0) detail::point(os, static_cast<double>(i + 1), compute_savings(aes_cum[i], cum[i]));
    }
  }
}

// Energy of each of the first `limit` traffic sources, mean over seeds.
inline void write_node_energy_vs_transmitters(std::ostream& os, const std::vector<SimReport>& runs,
                                              std::size_t limit) {
  os << "# transmitter node_energy_j (mean over seeds)\n";
  bool first = true;
  for (const auto& g : detail::by_protocol(runs)) {
    if (!first) os << "\n\n";
    first = false;
    os << "# " << protocol_name(g.front()->protocol) << '\n';
    std::size_t n = limit;
    for (const auto* r : g) n = std::min(n, r->sources.size());
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (const auto* r : g) sum += r->per_node_energy_j.at(r->sources[i]);
      detail::point(os, static_cast<double>(i + 1), sum / static_cast<double>(g.size()));
    }
  }
}

// x is the protocol's position in the campaign; the legend is in the comments.
inline void write_lifetime_vs_protocol(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "# protocol_index lifetime_s (mean over seeds)\n";
  for (std::size_t i = 0; i < rows.size(); ++i) os << "# " << i << ' ' << protocol_name(rows[i].protocol) << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) detail::point(os, static_cast<double>(i), rows[i].lifetime_s.mean);
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << content;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace aes::io

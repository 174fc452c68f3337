#pragma once

// Scenario files: `key = value` lines grouped under [simulation],
// [detection], [energy] and [baselines.<kind>]. `#` starts a comment.
// Unknown sections or keys are errors; anything not mentioned keeps its
// default. dump_config writes every key and re-parses to the same config.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "aes/error.hpp"
#include "aes/scenario.hpp"

namespace aes::config {

inline constexpr const char* kSeedEnvVar = "AES_SEED";

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

inline double to_real(std::string_view s, const std::string& key) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(key + ": expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

inline std::uint64_t to_count(std::string_view s, const std::string& key) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

inline bool to_bool(std::string_view s, const std::string& key) {
  s = trim(s);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + std::string(s) + "'");
}

// Shortest text that parses back to exactly `v`.
inline std::string real_str(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Binding {
  std::string key;
  std::function<void(ScenarioConfig&, std::string_view)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

// `field` maps a config (const or not) to the bound member.
template <class Field>
Binding real(std::string key, Field field) {
  return {key, [field, key](ScenarioConfig& c, std::string_view v) { field(c) = to_real(v, key); },
          [field](const ScenarioConfig& c) { return real_str(field(c)); }};
}

template <class Field>
Binding count(std::string key, Field field) {
  return {key,
          [field, key](ScenarioConfig& c, std::string_view v) {
            using T = std::remove_reference_t<decltype(field(c))>;
            field(c) = static_cast<T>(to_count(v, key));
          },
          [field](const ScenarioConfig& c) { return std::to_string(field(c)); }};
}

template <class Field>
Binding flag(std::string key, Field field) {
  return {key, [field, key](ScenarioConfig& c, std::string_view v) { field(c) = to_bool(v, key); },
          [field](const ScenarioConfig& c) { return std::string(field(c) ? "true" : "false"); }};
}

#define AES_FIELD(expr) [](auto& c) -> auto& { return c.expr; }

inline std::vector<Binding> simulation_bindings() {
  std::vector<Binding> b{
      real("field_width_m", AES_FIELD(field_width_m)),
      real("field_height_m", AES_FIELD(field_height_m)),
      real("region_size_m", AES_FIELD(region_size_m)),
      count("node_count", AES_FIELD(node_count)),
      real("sink_x", AES_FIELD(sink.x)),
      real("sink_y", AES_FIELD(sink.y)),
      real("bandwidth_kbps", AES_FIELD(bandwidth_kbps)),
      real("sim_duration_s", AES_FIELD(sim_duration_s)),
      real("init_phase_s", AES_FIELD(init_phase_s)),
      count("connections", AES_FIELD(connections)),
      count("data_total_bytes", AES_FIELD(data_total_bytes)),
      real("byte_service_time_s", AES_FIELD(byte_service_time_s)),
      count("packet_bytes", AES_FIELD(packet_bytes)),
      count("runs", AES_FIELD(runs)),
      real("initial_battery_j", AES_FIELD(initial_battery_j)),
      count("seed", AES_FIELD(seed)),
      real("beacon_interval_s", AES_FIELD(beacon_interval_s)),
      real("sense_window_s", AES_FIELD(sense_window_s)),
      real("radio_range_m", AES_FIELD(radio_range_m)),
      flag("reelect_boundary", AES_FIELD(reelect_boundary)),
      flag("include_sink_energy", AES_FIELD(include_sink_energy)),
      count("plot_transmitters", AES_FIELD(plot_transmitters)),
  };
  b.push_back({"indoor_zones",
               [](ScenarioConfig& c, std::string_view v) {
                 c.indoor_zones.clear();
                 if (trim(v).empty()) return;
                 for (auto zone : split(v, ';')) {
                   const auto parts = split(zone, ',');
                   if (parts.size() != 4) {
                     throw ConfigError("indoor_zones: each zone needs x0,y0,x1,y1, got '" + std::string(zone) + "'");
                   }
                   c.indoor_zones.push_back({to_real(parts[0], "indoor_zones"), to_real(parts[1], "indoor_zones"),
                                             to_real(parts[2], "indoor_zones"), to_real(parts[3], "indoor_zones")});
                 }
               },
               [](const ScenarioConfig& c) {
                 std::string s;
                 for (std::size_t i = 0; i < c.indoor_zones.size(); ++i) {
                   const auto& z = c.indoor_zones[i];
                   if (i) s += "; ";
                   s += real_str(z.x0) + "," + real_str(z.y0) + "," + real_str(z.x1) + "," + real_str(z.y1);
                 }
                 return s;
               }});
  return b;
}

inline std::vector<Binding> detection_bindings() {
  std::vector<Binding> b{
      real("alpha", AES_FIELD(detection.alpha)),
      real("roc_s", AES_FIELD(detection.roc_s)),
      count("k_offset", AES_FIELD(detection.k_offset)),
      real("pc", AES_FIELD(detection.pc)),
      real("epsilon_mode", AES_FIELD(detection.epsilon_mode)),
      real("solver_tol", AES_FIELD(detection.solver_tol)),
  };
  b.push_back({"pk",
               [](ScenarioConfig& c, std::string_view v) {
                 c.detection.pk.clear();
                 for (auto p : split(v, ',')) c.detection.pk.push_back(to_real(p, "pk"));
               },
               [](const ScenarioConfig& c) {
                 std::string s;
                 for (std::size_t i = 0; i < c.detection.pk.size(); ++i) {
                   if (i) s += ", ";
                   s += real_str(c.detection.pk[i]);
                 }
                 return s;
               }});
  return b;
}

inline std::vector<Binding> energy_bindings() {
  return {
      real("power_comm_mw", AES_FIELD(energy.power_comm_mw)),
      real("power_sense_mw", AES_FIELD(energy.power_sense_mw)),
      real("power_sleep_mw", AES_FIELD(energy.power_sleep_mw)),
      real("tx_power_min_dbm", AES_FIELD(energy.tx_power_min_dbm)),
      real("tx_power_max_dbm", AES_FIELD(energy.tx_power_max_dbm)),
      real("e_min_j", AES_FIELD(energy.e_min_j)),
      real("path_loss_n", AES_FIELD(energy.path_loss_n)),
      real("harvest_rate_mw", AES_FIELD(energy.harvest_rate_mw)),
  };
}

inline std::vector<Binding> baseline_bindings(Protocol p) {
  const auto i = static_cast<std::size_t>(p);
  auto at = [i](auto member) {
    return [i, member](auto& c) -> auto& { return c.baselines[i].*member; };
  };
  return {
      real("duty_cycle_fraction", at(&BaselineKind::duty_cycle_fraction)),
      real("overhead_factor", at(&BaselineKind::overhead_factor)),
      flag("schedule_based", at(&BaselineKind::schedule_based)),
      real("schedule_surcharge", at(&BaselineKind::schedule_surcharge)),
      real("adaptive_timeout_s", at(&BaselineKind::adaptive_timeout_s)),
  };
}

#undef AES_FIELD

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

inline std::optional<std::vector<Binding>> bindings_for(std::string_view section) {
  if (section == "simulation") return simulation_bindings();
  if (section == "detection") return detection_bindings();
  if (section == "energy") return energy_bindings();
  constexpr std::string_view prefix = "baselines.";
  if (section.starts_with(prefix)) {
    if (const auto p = parse_protocol(section.substr(prefix.size()))) return baseline_bindings(*p);
  }
  return std::nullopt;
}

}  // namespace detail

/// Parse a scenario file. `origin` prefixes diagnostics (usually the path).
inline ScenarioConfig parse_config(std::istream& in, const std::string& origin = "config") {
  ScenarioConfig cfg;
  std::optional<std::vector<detail::Binding>> section;
  std::string section_name;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  auto where = [&] { return origin + ":" + std::to_string(lineno) + ": "; };

  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(where() + "malformed section header '" + std::string(s) + "'");
      section_name = detail::lower(detail::trim(s.substr(1, s.size() - 2)));
      section = detail::bindings_for(section_name);
      if (!section) throw ConfigError(where() + "unknown section [" + section_name + "]");
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where() + "expected 'key = value', got '" + std::string(s) + "'");
    const std::string key(detail::trim(s.substr(0, eq)));
    const std::string_view value = detail::trim(s.substr(eq + 1));
    if (!section) throw ConfigError(where() + "key '" + key + "' appears before any section");

    const auto it = std::find_if(section->begin(), section->end(), [&](const auto& b) { return b.key == key; });
    if (it == section->end()) throw ConfigError(where() + "unknown key '" + key + "' in [" + section_name + "]");
    if (!seen.insert(section_name + "." + key).second) {
      throw ConfigError(where() + "duplicate key '" + key + "' in [" + section_name + "]");
    }
    try {
      it->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where() + e.what());
    }
  }

  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  return parse_config(f, path.string());
}

/// Every key with its effective value; reals in shortest round-trip form.
inline std::string dump_config(const ScenarioConfig& cfg) {
  std::ostringstream os;
  auto section = [&](const std::string& name, const std::vector<detail::Binding>& bs) {
    os << '[' << name << "]\n";
    for (const auto& b : bs) os << b.key << " = " << b.get(cfg) << '\n';
  };
  section("simulation", detail::simulation_bindings());
  os << '\n';
  section("detection", detail::detection_bindings());
  os << '\n';
  section("energy", detail::energy_bindings());
  for (Protocol p : kAllProtocols) {
    os << '\n';
    section("baselines." + detail::lower(protocol_name(p)), detail::baseline_bindings(p));
  }
  return os.str();
}

/// Seed precedence: command-line flag, then the AES_SEED environment
/// variable, then the file.
inline void apply_seed_override(ScenarioConfig& cfg, std::optional<std::uint64_t> flag,
                                const char* env_value = std::getenv(kSeedEnvVar)) {
  if (flag) {
    cfg.seed = *flag;
  } else if (env_value && *env_value) {
    cfg.seed = detail::to_count(env_value, kSeedEnvVar);
  }
}

}  // namespace aes::config

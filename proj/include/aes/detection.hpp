#pragma once

// Constrained Neyman-Pearson environment detection: per-sample-count ROC
// curves, the expected false-alarm / detection probabilities, the Lagrange
// threshold solver, decision fusion over a noisy channel and the
// active/passive/sleep mode automaton.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "aes/error.hpp"

namespace aes::detection {

struct RocPoint {
  double ue;
  double pd;
};

// PD^k = u^(1/(1+(k+offset)*s)). Larger s means more informative samples.
struct PowerLawFamily {
  double sensitivity = 1.0;
  std::size_t k_offset = 0;
};

// One piecewise-linear curve per sample count k.
struct TabulatedFamily {
  std::vector<std::vector<RocPoint>> curves;
};

/// Family of concave ROC curves f_k, one per sample count k = 0..k_max.
///
/// Every curve satisfies f_k(0) = 0, f_k(1) = 1, is nondecreasing and
/// concave, so its slope is nonincreasing and can be inverted for the
/// Lagrange condition f'_k(u) = gamma.
class RocModel {
 public:
  static RocModel power_law(double sensitivity, std::size_t k_max, std::size_t k_offset = 0) {
    detail::require(std::isfinite(sensitivity) && sensitivity > 0.0,
                    "roc: power-law sensitivity must be positive");
    return RocModel(PowerLawFamily{sensitivity, k_offset}, k_max);
  }

  static RocModel tabulated(std::vector<std::vector<RocPoint>> curves) {
    detail::require(!curves.empty(), "roc: tabulated family needs at least one curve");
    for (std::size_t k = 0; k < curves.size(); ++k) validate_curve(curves[k], k);
    const std::size_t k_max = curves.size() - 1;
    return RocModel(TabulatedFamily{std::move(curves)}, k_max);
  }

  std::size_t k_max() const noexcept { return k_max_; }
  const std::variant<PowerLawFamily, TabulatedFamily>& family() const noexcept { return family_; }

  double value(std::size_t k, double u) const {
    check_k(k);
    u = std::clamp(u, 0.0, 1.0);
    if (const auto* pl = std::get_if<PowerLawFamily>(&family_)) {
      if (u == 0.0) return 0.0;
      return std::pow(u, exponent(*pl, k));
    }
    const auto& pts = std::get<TabulatedFamily>(family_).curves[k];
    if (u == 0.0) return 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const auto& a = pts[i - 1];
      const auto& b = pts[i];
      if (u <= b.ue && b.ue > a.ue) {
        if (u < a.ue) continue;
        return a.pd + (b.pd - a.pd) * (u - a.ue) / (b.ue - a.ue);
      }
    }
    return 1.0;
  }

  // Right derivative on [0,1), left derivative at 1. +inf where the curve
  // is vertical.
  double slope(std::size_t k, double u) const {
    check_k(k);
    u = std::clamp(u, 0.0, 1.0);
    if (const auto* pl = std::get_if<PowerLawFamily>(&family_)) {
      const double e = exponent(*pl, k);
      if (e == 1.0) return 1.0;
      if (u == 0.0) return std::numeric_limits<double>::infinity();
      return e * std::pow(u, e - 1.0);
    }
    const auto& pts = std::get<TabulatedFamily>(family_).curves[k];
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const auto& a = pts[i - 1];
      const auto& b = pts[i];
      const bool last = (i + 1 == pts.size());
      if (u < b.ue || (last && u <= b.ue)) {
        if (b.ue == a.ue) return std::numeric_limits<double>::infinity();
        return (b.pd - a.pd) / (b.ue - a.ue);
      }
    }
    return 0.0;
  }

  // Largest threshold u in [0,1] whose slope is still >= gamma. Because the
  // curves are concave this is nonincreasing in gamma.
  double threshold_for_slope(std::size_t k, double gamma) const {
    check_k(k);
    if (gamma <= 0.0) return 1.0;
    if (const auto* pl = std::get_if<PowerLawFamily>(&family_)) {
      const double e = exponent(*pl, k);
      if (e == 1.0) return gamma <= 1.0 ? 1.0 : 0.0;
      if (gamma <= e) return 1.0;
      return std::clamp(std::pow(gamma / e, 1.0 / (e - 1.0)), 0.0, 1.0);
    }
    const auto& pts = std::get<TabulatedFamily>(family_).curves[k];
    double u = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const auto& a = pts[i - 1];
      const auto& b = pts[i];
      const double s = (b.ue == a.ue) ? std::numeric_limits<double>::infinity()
                                      : (b.pd - a.pd) / (b.ue - a.ue);
      if (s >= gamma) u = b.ue;
      else break;
    }
    return u;
  }

  // True when f_k is flat on (0,1]: every threshold yields the same PD.
  bool is_flat(std::size_t k) const {
    check_k(k);
    if (std::holds_alternative<PowerLawFamily>(family_)) return false;
    return value(k, std::numeric_limits<double>::min()) >= 1.0;
  }

 private:
  RocModel(std::variant<PowerLawFamily, TabulatedFamily> family, std::size_t k_max)
      : family_(std::move(family)), k_max_(k_max) {}

  static double exponent(const PowerLawFamily& pl, std::size_t k) {
    return 1.0 / (1.0 + static_cast<double>(k + pl.k_offset) * pl.sensitivity);
  }

  void check_k(std::size_t k) const {
    if (k > k_max_) {
      throw InvalidArgument("roc: sample count " + std::to_string(k) + " exceeds k_max " +
                            std::to_string(k_max_));
    }
  }

  static void validate_curve(const std::vector<RocPoint>& pts, std::size_t k) {
    const std::string where = "roc: curve " + std::to_string(k) + ": ";
    detail::require(pts.size() >= 2, where + "needs at least two points");
    detail::require(pts.front().ue == 0.0 && pts.front().pd == 0.0, where + "must start at (0,0)");
    detail::require(pts.back().ue == 1.0 && pts.back().pd == 1.0, where + "must end at (1,1)");
    double prev_slope = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const auto& a = pts[i - 1];
      const auto& b = pts[i];
      detail::require(detail::is_probability(b.ue) && detail::is_probability(b.pd),
                      where + "points must lie in the unit square");
      detail::require(b.ue >= a.ue && b.pd >= a.pd, where + "points must be monotone");
      const double s = (b.ue == a.ue) ? std::numeric_limits<double>::infinity()
                                      : (b.pd - a.pd) / (b.ue - a.ue);
      detail::require(s <= prev_slope * (1.0 + 1e-12) || std::isinf(prev_slope),
                      where + "curve must be concave");
      prev_slope = s;
    }
  }

  std::variant<PowerLawFamily, TabulatedFamily> family_;
  std::size_t k_max_;
};

/// P_K(K = k) for k = 0..k_max, truncated at k_max.
class SampleCountDistribution {
 public:
  explicit SampleCountDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    detail::require(!probs_.empty(), "sample-count distribution must be non-empty");
    double sum = 0.0;
    for (double p : probs_) {
      detail::require(std::isfinite(p) && detail::is_probability(p),
                      "sample-count probabilities must lie in [0,1]");
      sum += p;
    }
    detail::require(std::abs(sum - 1.0) <= 1e-12, "sample-count probabilities must sum to 1");
  }

  static SampleCountDistribution point_mass(std::size_t k) {
    std::vector<double> p(k + 1, 0.0);
    p[k] = 1.0;
    return SampleCountDistribution(std::move(p));
  }

  std::size_t k_max() const noexcept { return probs_.size() - 1; }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t k) const { return probs_.at(k); }

  // Inverse-CDF draw from a unit uniform u in [0,1).
  std::size_t sample(double u) const noexcept {
    double acc = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) {
      acc += probs_[k];
      if (u < acc && probs_[k] > 0.0) return k;
    }
    for (std::size_t k = probs_.size(); k-- > 0;) {
      if (probs_[k] > 0.0) return k;
    }
    return 0;
  }

 private:
  std::vector<double> probs_;
};

struct ThresholdSolution {
  std::vector<double> ue;
  double gamma = 0.0;
  double expected_ue = 0.0;
  double expected_pd = 0.0;
};

struct SolverOptions {
  double tol = 1e-9;
  int max_iterations = 200;
};

namespace impl {

inline void check_thresholds(const SampleCountDistribution& dist, std::span<const double> ue) {
  if (ue.size() != dist.k_max() + 1) {
    throw InvalidArgument("threshold list length " + std::to_string(ue.size()) +
                          " does not match k_max+1 = " + std::to_string(dist.k_max() + 1));
  }
  for (double u : ue) {
    if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("threshold outside [0,1]");
  }
}

}  // namespace impl

// E(UE) = sum_k p_k * UE^k
inline double expected_ue(const SampleCountDistribution& dist, std::span<const double> ue) {
  impl::check_thresholds(dist, ue);
  double sum = 0.0;
  for (std::size_t k = 0; k < ue.size(); ++k) sum += dist[k] * ue[k];
  return std::clamp(sum, 0.0, 1.0);
}

// E(PD) = sum_k p_k * f_k(UE^k)
inline double expected_pd(const SampleCountDistribution& dist, std::span<const double> ue,
                          const RocModel& roc) {
  impl::check_thresholds(dist, ue);
  if (roc.k_max() < dist.k_max()) {
    throw InvalidArgument("roc model does not cover the sample-count distribution");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < ue.size(); ++k) sum += dist[k] * roc.value(k, ue[k]);
  return std::clamp(sum, 0.0, 1.0);
}

/// Maximise E(PD) subject to E(UE) = alpha and 0 <= UE^k <= 1.
///
/// The Lagrange condition f'_k(UE^k) = gamma couples all thresholds through
/// one slope. For concave curves E(UE)(gamma) is nonincreasing, so gamma is
/// found by bisection. When the bracket closes on a slope where some curves
/// are linear, E(UE) jumps; the final thresholds interpolate between the two
/// bracket ends so the constraint holds exactly.
inline ThresholdSolution solve_thresholds(const RocModel& roc, const SampleCountDistribution& dist,
                                          double alpha, SolverOptions opts = {}) {
  detail::require(alpha > 0.0 && alpha < 1.0, "alpha must lie strictly inside (0,1)");
  detail::require(opts.tol > 0.0, "solver tolerance must be positive");
  detail::require(opts.max_iterations > 0, "solver iteration budget must be positive");
  if (roc.k_max() < dist.k_max()) {
    throw InvalidArgument("roc model does not cover the sample-count distribution");
  }
  const std::size_t n = dist.k_max() + 1;

  bool any_informative = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (dist[k] > 0.0 && !roc.is_flat(k)) any_informative = true;
  }
  if (!any_informative) {
    throw InvalidArgument("degenerate problem: all probability mass sits on flat ROC curves");
  }

  auto thresholds = [&](double gamma) {
    std::vector<double> ue(n);
    for (std::size_t k = 0; k < n; ++k) ue[k] = roc.threshold_for_slope(k, gamma);
    return ue;
  };
  auto mass = [&](const std::vector<double>& ue) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += dist[k] * ue[k];
    return s;
  };

  // E(UE)(lo) >= alpha >= E(UE)(hi)
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> ue_hi = thresholds(hi);
  while (mass(ue_hi) > alpha) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi) || hi > 1e300) {
      throw ConvergenceError("threshold solver could not bracket gamma (upper end diverged)", hi);
    }
    ue_hi = thresholds(hi);
  }
  std::vector<double> ue_lo = thresholds(lo);

  int iter = 0;
  while (hi - lo > opts.tol) {
    if (++iter > opts.max_iterations) {
      std::ostringstream os;
      os << "threshold solver did not converge: gamma bracket [" << lo << ", " << hi << "]";
      throw ConvergenceError(os.str(), hi - lo);
    }
    const double mid = (lo > 0.0 && hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    auto ue_mid = thresholds(mid);
    if (mass(ue_mid) > alpha) {
      lo = mid;
      ue_lo = std::move(ue_mid);
    } else {
      hi = mid;
      ue_hi = std::move(ue_mid);
    }
  }

  const double e_lo = mass(ue_lo);
  const double e_hi = mass(ue_hi);
  const double theta = (e_lo > e_hi) ? std::clamp((alpha - e_hi) / (e_lo - e_hi), 0.0, 1.0) : 0.0;

  ThresholdSolution sol;
  sol.ue.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    sol.ue[k] = std::clamp(ue_hi[k] + theta * (ue_lo[k] - ue_hi[k]), 0.0, 1.0);
  }
  // On smooth strictly concave curves the multiplier is the common slope at
  // the interior thresholds, which is sharper than the bracket midpoint.
  sol.gamma = 0.5 * (lo + hi);
  if (std::holds_alternative<PowerLawFamily>(roc.family())) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double u = sol.ue[k];
      if (dist[k] > 0.0 && u > 0.0 && u < 1.0 && roc.slope(k, 0.25) != roc.slope(k, 0.75)) {
        num += dist[k] * roc.slope(k, u);
        den += dist[k];
      }
    }
    if (den > 0.0) sol.gamma = num / den;
  }
  sol.expected_ue = expected_ue(dist, sol.ue);
  sol.expected_pd = expected_pd(dist, sol.ue, roc);
  return sol;
}

struct FusionParams {
  double pc0 = 0.0;
  double pc1 = 0.0;

  static FusionParams symmetric(double pc) { return {pc, pc}; }
};

// Probability the fused decision reads "unknown" after a channel that flips
// a transmitted 1 with pc1 and a transmitted 0 with pc0.
inline double fuse_ue(double ue, const FusionParams& params) {
  detail::require(detail::is_probability(ue), "fuse_ue: ue outside [0,1]");
  detail::require(detail::is_probability(params.pc0) && detail::is_probability(params.pc1),
                  "fuse_ue: channel error outside [0,1]");
  return std::clamp(ue * (1.0 - params.pc1) + (1.0 - ue) * params.pc0, 0.0, 1.0);
}

inline double fuse_pd(double pd, double pc) {
  detail::require(detail::is_probability(pd), "fuse_pd: pd outside [0,1]");
  detail::require(detail::is_probability(pc), "fuse_pd: pc outside [0,1]");
  return std::clamp(pd + (1.0 - 2.0 * pd) * pc, 0.0, 1.0);
}

// Di = IOE - E(PD)
inline double compute_di(double ioe, double expected_pd) {
  detail::require(detail::is_probability(expected_pd), "compute_di: expected_pd outside [0,1]");
  return ioe - expected_pd;
}

enum class Mode : std::uint8_t { Active, Passive, Sleep };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Active: return "active";
    case Mode::Passive: return "passive";
    case Mode::Sleep: return "sleep";
  }
  return "?";
}

struct ModeDecision {
  double di = 0.0;
  Mode mode = Mode::Sleep;
  double epsilon = 0.05;
};

// Di within epsilon of 1 -> passive, within epsilon of 0 -> active, anything
// else means the environment is unknown and the node sleeps.
inline ModeDecision decide_mode(double di, double epsilon) {
  detail::require(epsilon > 0.0 && epsilon < 0.5, "decide_mode: epsilon must lie in (0, 0.5)");
  Mode m = Mode::Sleep;
  if (std::abs(di - 1.0) <= epsilon) m = Mode::Passive;
  else if (std::abs(di) <= epsilon) m = Mode::Active;
  return {di, m, epsilon};
}

}  // namespace aes::detection

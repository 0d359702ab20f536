#include "nlch/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nlch/errors.hpp"

namespace nlch {

namespace {

constexpr double kScanLo = -5.0;
constexpr double kScanHi = 5.0;
constexpr int kScanIntervals = 100000;
constexpr double kSafety = 1.1;

double scan_point(int i) { return kScanLo + (kScanHi - kScanLo) * i / kScanIntervals; }

}  // namespace

std::string to_string(PotentialVariant v) {
  return v == PotentialVariant::quartic ? "quartic" : "custom_piecewise";
}

Potential Potential::quartic(double scale) {
  if (!(scale > 0.0)) throw ParameterError("quartic potential requires scale > 0");
  Potential p;
  p.variant_ = PotentialVariant::quartic;
  p.scale_ = scale;
  p.description_ = "quartic";
  return p;
}

Potential Potential::custom_piecewise(std::vector<std::pair<double, double>> knots,
                                      std::string description) {
  if (knots.size() < 3) throw ParameterError("custom_piecewise needs at least 3 knots");
  std::sort(knots.begin(), knots.end());
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    if (!(knots[i + 1].first > knots[i].first))
      throw ParameterError("custom_piecewise knots must have distinct abscissae");
  bool has_minus = false, has_plus = false;
  for (const auto& [s, w] : knots) {
    if (w < 0.0) throw ParameterError("custom_piecewise values must be >= 0");
    if (w == 0.0 && s != -1.0 && s != 1.0)
      throw ParameterError("custom_piecewise may vanish only at s = -1 and s = 1");
    has_minus |= (s == -1.0 && w == 0.0);
    has_plus |= (s == 1.0 && w == 0.0);
  }
  if (!has_minus || !has_plus)
    throw ParameterError("custom_piecewise needs knots (-1, 0) and (1, 0)");
  if (knots.front().first >= -1.0 || knots.back().first <= 1.0)
    throw ParameterError("custom_piecewise knots must extend beyond [-1, 1]");
  Potential p;
  p.variant_ = PotentialVariant::custom_piecewise;
  p.knots_ = std::move(knots);
  p.description_ = description.empty() ? "custom_piecewise" : std::move(description);
  return p;
}

double Potential::value(double s) const {
  if (variant_ == PotentialVariant::quartic) {
    const double q = s * s - 1.0;
    return scale_ * q * q;
  }
  const auto& k = knots_;
  if (s <= k.front().first) {
    const double d = k.front().first - s;
    const double slope = (k[1].second - k[0].second) / (k[1].first - k[0].first);
    return k.front().second + std::abs(slope) * d + d * d;
  }
  if (s >= k.back().first) {
    const std::size_t n = k.size();
    const double d = s - k.back().first;
    const double slope = (k[n - 1].second - k[n - 2].second) / (k[n - 1].first - k[n - 2].first);
    return k.back().second + std::abs(slope) * d + d * d;
  }
  const auto it = std::upper_bound(k.begin(), k.end(), s,
                                   [](double v, const auto& kn) { return v < kn.first; });
  const auto& [s1, w1] = *it;
  const auto& [s0, w0] = *(it - 1);
  return w0 + (w1 - w0) * (s - s0) / (s1 - s0);
}

Derivative Potential::derivative(double s) const {
  if (variant_ == PotentialVariant::quartic) return {scale_ * 4.0 * s * (s * s - 1.0), false};
  const auto& k = knots_;
  const std::size_t n = k.size();
  const bool at_knot = std::any_of(k.begin(), k.end(), [s](const auto& kn) { return kn.first == s; });
  if (s < k.front().first) {
    const double slope = (k[1].second - k[0].second) / (k[1].first - k[0].first);
    return {-(std::abs(slope) + 2.0 * (k.front().first - s)), false};
  }
  if (s >= k.back().first) {
    const double slope = (k[n - 1].second - k[n - 2].second) / (k[n - 1].first - k[n - 2].first);
    return {std::abs(slope) + 2.0 * (s - k.back().first), at_knot};
  }
  const auto it = std::upper_bound(k.begin(), k.end(), s,
                                   [](double v, const auto& kn) { return v < kn.first; });
  const auto& [s1, w1] = *it;
  const auto& [s0, w0] = *(it - 1);
  return {(w1 - w0) / (s1 - s0), at_knot};
}

GrowthConstants Potential::growth_constants() const {
  GrowthConstants g;

  // (W1) on the scan grid and the smallest admissible c_W for (W2).
  double ratio_sup = 0.0;
  double m_w = std::numeric_limits<double>::infinity();
  double max_inner = 0.0;
  for (int i = 0; i <= kScanIntervals; ++i) {
    const double s = scan_point(i);
    const double w = value(s);
    const double gap = std::abs(std::abs(s) - 1.0);
    if (w < 0.0) throw ParameterError("potential takes a negative value");
    if (w == 0.0) {
      if (gap > 1e-12) {
        std::ostringstream os;
        os << "potential vanishes at s = " << s << " away from the wells";
        throw ParameterError(os.str());
      }
      continue;
    }
    ratio_sup = std::max(ratio_sup, gap * gap / w);
    if (gap >= 0.5 - 1e-12) m_w = std::min(m_w, w);
    if (std::abs(s) <= 1.0) max_inner = std::max(max_inner, w);
  }
  // The region ||s|-1| >= 1/2 has boundary points ±1/2 and ±3/2; include them exactly.
  for (double s : {-1.5, -0.5, 0.5, 1.5}) m_w = std::min(m_w, value(s));
  if (!(ratio_sup > 0.0) || !std::isfinite(ratio_sup))
    throw ParameterError("growth condition (|s|-1)^2 <= c W(s) cannot be satisfied");
  // Outside the scan window W must keep dominating (|s|-1)^2.
  for (double s : {-50.0, -10.0, 10.0, 50.0}) {
    const double gap = std::abs(s) - 1.0;
    if (gap * gap > kSafety * ratio_sup * value(s))
      throw ParameterError("growth condition fails outside the scan window");
  }

  g.c_W = kSafety * ratio_sup;
  g.m_W = m_w;
  g.hat_c_W = 2.0 * g.c_W + 4.0 / g.m_W;
  g.M_W = max_inner;

  // s0 < -1 with W(s0) = M_W; W is decreasing on (-inf, -1].
  double lo = -2.0;
  while (value(lo) < g.M_W) lo *= 2.0;
  double hi = -1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (value(mid) >= g.M_W ? lo : hi) = mid;
  }
  g.s0 = 0.5 * (lo + hi);

  // Largest a_W <= 0.999 such that W increases on [-1, -1+a] and decreases on [1-a, 1].
  auto monotone_ok = [this](double a) {
    constexpr int kSteps = 2000;
    for (int i = 0; i < kSteps; ++i) {
      const double t0 = a * i / kSteps, t1 = a * (i + 1) / kSteps;
      if (value(-1.0 + t1) < value(-1.0 + t0)) return false;
      if (value(1.0 - t1) < value(1.0 - t0)) return false;
    }
    return true;
  };
  double a = 0.999;
  while (a > 1e-3 && !monotone_ok(a)) a *= 0.9;
  if (!monotone_ok(a)) throw ParameterError("potential is not monotone next to its wells");
  g.a_W = a;
  return g;
}

}  // namespace nlch

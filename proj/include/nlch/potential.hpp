#pragma once

#include <string>
#include <utility>
#include <vector>

namespace nlch {

enum class PotentialVariant { quartic, custom_piecewise };

std::string to_string(PotentialVariant v);

struct GrowthConstants {
  double c_W = 0.0;      // (|s|-1)^2 <= c_W W(s), with a 1.1 safety factor
  double a_W = 0.0;      // monotonicity margin inside the wells
  double m_W = 0.0;      // min of W over ||s|-1| >= 1/2
  double hat_c_W = 0.0;  // 2 c_W + 4 / m_W
  double M_W = 0.0;      // max of W over [-1, 1]
  double s0 = 0.0;       // s0 < -1 with W(s0) = M_W
};

struct Derivative {
  double value = 0.0;
  // True when s is a kink of a piecewise potential; value is then the right derivative.
  bool one_sided = false;
};

// Double-well potential vanishing exactly at ±1.
//   quartic:          W(s) = scale (s^2 - 1)^2
//   custom_piecewise: linear interpolation through user knots (s_i, W_i), extended
//                     beyond the outer knots by W_end + |slope_end| d + d^2.
class Potential {
 public:
  static Potential quartic(double scale = 1.0);
  static Potential custom_piecewise(std::vector<std::pair<double, double>> knots,
                                    std::string description = {});

  PotentialVariant variant() const { return variant_; }
  double scale() const { return scale_; }
  const std::string& description() const { return description_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

  double operator()(double s) const { return value(s); }
  double value(double s) const;
  Derivative derivative(double s) const;

  // Dense scan on [-5, 5] (1e5 intervals); throws ParameterError if (W1)/(W2) fail.
  GrowthConstants growth_constants() const;

 private:
  Potential() = default;

  PotentialVariant variant_ = PotentialVariant::quartic;
  double scale_ = 1.0;
  std::vector<std::pair<double, double>> knots_;
  std::string description_;
};

}  // namespace nlch

#include "shiftiv/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "shiftiv/common.hpp"

namespace shiftiv {

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sdev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) * 0.39894228040143267794;
}

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z * 0.70710678118654752440);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrKind::BadArgument, ErrClass::Estimation,
                "normal_quantile requires p in (0,1)");
  }
  static const boost::math::normal_distribution<double> dist(0.0, 1.0);
  return boost::math::quantile(dist, p);
}

}  // namespace shiftiv

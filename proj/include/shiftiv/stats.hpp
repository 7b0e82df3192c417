#pragma once

#include <cstddef>
#include <vector>

namespace shiftiv {

double mean(const std::vector<double>& v);

// Sample standard deviation (n-1 denominator); 0 for fewer than 2 values.
double sdev(const std::vector<double>& v);

double normal_pdf(double z);

double normal_cdf(double z);

// Inverse standard normal CDF, p in (0, 1).
double normal_quantile(double p);

}  // namespace shiftiv

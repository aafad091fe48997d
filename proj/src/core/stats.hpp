#pragma once

#include <functional>

#include "core/types.hpp"

namespace ppursuit {

struct KsResult {
  double statistic;
  double p_value;
};

// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
KsResult ks_test(const Vector& sample, const std::function<double(double)>& cdf);
KsResult ks_test_two_sample(const Vector& a, const Vector& b);

// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

// Divisor n - 1.
double sample_variance(const Vector& v);
double sample_correlation(const Vector& a, const Vector& b);

}  // namespace ppursuit

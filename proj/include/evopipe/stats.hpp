#pragma once

#include <span>

namespace evopipe {

double mean(std::span<const double> values);

// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_stddev(std::span<const double> values);

// Half-width of the 95% confidence interval, t_{n-1, 0.025} * sigma / sqrt(n).
double ci95_halfwidth(std::span<const double> values);

}  // namespace evopipe

#pragma once

#include <span>

namespace merkit::inspector {

/// Pearson correlation. Throws DataError when either input is constant.
double pcc(std::span<const double> x, std::span<const double> y);
/// Kendall tau-a: (concordant - discordant) / (n(n-1)/2), ties count zero.
double krc(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> x);
/// Sample standard deviation; 0 for fewer than two values.
double stddev(std::span<const double> x);

}  // namespace merkit::inspector

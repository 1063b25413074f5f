#include "merkit/inspector/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "merkit/error.hpp"

namespace merkit::inspector {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionError("correlation inputs have lengths " + std::to_string(x.size()) + " and " +
                         std::to_string(y.size()));
  }
  if (x.size() < 2) throw DataError("correlation needs at least two points");
}

}  // namespace

double mean(std::span<const double> x) {
  if (x.empty()) throw DataError("mean of an empty sequence");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

double pcc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("correlation is undefined for a constant input");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double krc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  long long score = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[j] - x[i];
      const double dy = y[j] - y[i];
      if (dx == 0.0 || dy == 0.0) continue;
      score += (dx > 0.0) == (dy > 0.0) ? 1 : -1;
    }
  }
  const double pairs = static_cast<double>(x.size()) * static_cast<double>(x.size() - 1) / 2.0;
  return static_cast<double>(score) / pairs;
}

}  // namespace merkit::inspector

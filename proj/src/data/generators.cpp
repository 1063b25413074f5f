#include <cmath>
#include <numbers>
#include <random>

#include "merkit/data/dataset.hpp"
#include "merkit/error.hpp"

namespace merkit::data {

namespace {

void check_counts(std::size_t n, std::size_t k) {
  if (k < 2) throw ParameterError("generators need at least 2 classes");
  if (n < k) {
    throw ParameterError("n = " + std::to_string(n) + " is smaller than the class count " +
                         std::to_string(k));
  }
}

}  // namespace

Dataset make_blobs(std::size_t n, std::size_t dim, std::size_t num_classes, double spread,
                   std::uint64_t seed) {
  check_counts(n, num_classes);
  if (dim == 0) throw ParameterError("blobs need dim >= 1");
  if (!(spread >= 0.0)) throw ParameterError("spread must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> center(-2.0, 2.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  DenseMatrix centers(num_classes, dim);
  for (double& c : centers.data()) c = center(rng);
  DenseMatrix x(n, dim);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % num_classes;
    y[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < dim; ++j) x(i, j) = centers(c, j) + spread * noise(rng);
  }
  return make_dataset(std::move(x), std::move(y), num_classes, "blobs");
}

Dataset make_moons(std::size_t n, double noise, std::uint64_t seed) {
  check_counts(n, 2);
  if (!(noise >= 0.0)) throw ParameterError("noise must be non-negative");
  const std::size_t n_out = (n + 1) / 2;
  const std::size_t n_in = n - n_out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix x(n, 2);
  std::vector<int> y(n);
  auto angle = [](std::size_t i, std::size_t count) {
    return count <= 1 ? 0.0
                      : std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1);
  };
  for (std::size_t i = 0; i < n_out; ++i) {
    const double t = angle(i, n_out);
    x(i, 0) = std::cos(t);
    x(i, 1) = std::sin(t);
    y[i] = 0;
  }
  for (std::size_t i = 0; i < n_in; ++i) {
    const double t = angle(i, n_in);
    x(n_out + i, 0) = 1.0 - std::cos(t);
    x(n_out + i, 1) = 0.5 - std::sin(t);
    y[n_out + i] = 1;
  }
  if (noise > 0.0) {
    for (double& v : x.data()) v += noise * gauss(rng);
  }
  return make_dataset(std::move(x), std::move(y), 2, "moons");
}

Dataset make_rings(std::size_t n, std::size_t num_classes, double noise, std::uint64_t seed) {
  check_counts(n, num_classes);
  if (!(noise >= 0.0)) throw ParameterError("noise must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix x(n, 2);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % num_classes;
    const double r = static_cast<double>(c + 1) + noise * gauss(rng);
    const double t = angle(rng);
    x(i, 0) = r * std::cos(t);
    x(i, 1) = r * std::sin(t);
    y[i] = static_cast<int>(c);
  }
  return make_dataset(std::move(x), std::move(y), num_classes, "rings");
}

}  // namespace merkit::data

#include "merkit/ntk/ntk.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>

#include "merkit/error.hpp"
#include "merkit/linalg/decompositions.hpp"
#include "merkit/parallel.hpp"

namespace merkit::ntk {

namespace {

constexpr std::array<char, 8> kMagic{'M', 'E', 'R', 'K', 'N', 'T', 'K', '\0'};

static_assert(std::endian::native == std::endian::little,
              "the NTK dump format assumes a little-endian host");

}  // namespace

const char* eval_point_name(At at) noexcept { return at == At::kInit ? "init" : "trained"; }

At eval_point_from_string(const std::string& s) {
  if (s == "init") return At::kInit;
  if (s == "trained") return At::kCurrent;
  throw ParameterError("unknown eval point '" + s + "' (expected init or trained)");
}

DenseMatrix kernel_block(const NeuralModel& model, std::span<const double> x,
                         std::span<const double> x2, At at) {
  const DenseMatrix a = nn::param_jacobian(model, x, at);
  const DenseMatrix b = nn::param_jacobian(model, x2, at);
  const std::size_t k = a.rows();
  DenseMatrix out(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) out(i, j) = linalg::dot(a.row(i), b.row(j));
  }
  return out;
}

DenseMatrix stacked_jacobian(const NeuralModel& model, const DenseMatrix& samples, At at) {
  if (samples.rows() == 0) throw DataError("NTK assembly needs at least one sample");
  if (samples.cols() != model.input_dim()) {
    throw DimensionError("samples have dimension " + std::to_string(samples.cols()) +
                         ", model expects " + std::to_string(model.input_dim()));
  }
  const std::size_t k = model.num_classes();
  DenseMatrix g(samples.rows() * k, model.param_count());
  parallel_for(samples.rows(), [&](std::size_t i) {
    const DenseMatrix j = nn::param_jacobian(model, samples.row(i), at);
    for (std::size_t a = 0; a < k; ++a) {
      std::copy(j.row(a).begin(), j.row(a).end(), g.row(i * k + a).begin());
    }
  });
  return g;
}

NtkMatrix assemble_from_jacobian(const DenseMatrix& g, std::size_t k, At at,
                                 std::optional<double> clip_q,
                                 std::vector<std::size_t> sample_ids) {
  if (k == 0 || g.rows() == 0 || g.rows() % k != 0) {
    throw DimensionError("stacked Jacobian rows must be a positive multiple of K");
  }
  NtkMatrix out;
  out.n = g.rows() / k;
  out.k = k;
  out.eval_point = at;
  out.clip_q = clip_q;
  if (sample_ids.empty()) {
    sample_ids.resize(out.n);
    std::iota(sample_ids.begin(), sample_ids.end(), std::size_t{0});
  } else if (sample_ids.size() != out.n) {
    throw DimensionError("sample_ids length does not match the sample count");
  }
  out.sample_ids = std::move(sample_ids);
  out.theta = linalg::gram(g);
  out.raw_trace = linalg::trace(out.theta);
  if (clip_q) out.theta = linalg::clip_eigenvalues(out.theta, *clip_q);
  return out;
}

NtkMatrix assemble(const NeuralModel& model, const DenseMatrix& samples, At at,
                   std::optional<double> clip_q, std::vector<std::size_t> sample_ids) {
  return assemble_from_jacobian(stacked_jacobian(model, samples, at), model.num_classes(), at,
                                clip_q, std::move(sample_ids));
}

double trace(const NtkMatrix& ntk) { return ntk.raw_trace; }

double kappa(const NeuralModel& model, const DenseMatrix& samples, At at) {
  if (samples.rows() == 0) throw DataError("kappa needs at least one sample");
  Vector per(samples.rows());
  parallel_for(samples.rows(), [&](std::size_t i) {
    const DenseMatrix j = nn::param_jacobian(model, samples.row(i), at);
    per[i] = linalg::sym_eigen(linalg::gram(j)).eigenvalues.front();
  });
  return *std::max_element(per.begin(), per.end());
}

void dump_theta(const NtkMatrix& ntk, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  const auto n = static_cast<std::uint32_t>(ntk.n);
  const auto k = static_cast<std::uint32_t>(ntk.k);
  out.write(kMagic.data(), kMagic.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&k), sizeof k);
  const auto data = ntk.theta.data();
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw DataError("short write to '" + path + "'");
}

NtkMatrix load_theta(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::array<char, 8> magic{};
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&k), sizeof k);
  if (!in || magic != kMagic) throw ParseError("'" + path + "' is not an NTK dump", 0);
  const std::size_t dim = static_cast<std::size_t>(n) * k;
  Vector values(dim * dim);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw ParseError("'" + path + "' is truncated", 0);
  NtkMatrix out;
  out.n = n;
  out.k = k;
  out.theta = DenseMatrix(dim, dim, std::move(values));
  out.raw_trace = linalg::trace(out.theta);
  out.sample_ids.resize(n);
  std::iota(out.sample_ids.begin(), out.sample_ids.end(), std::size_t{0});
  return out;
}

}  // namespace merkit::ntk

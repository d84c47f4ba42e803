#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pseudorep/dataset.hpp"
#include "pseudorep/models.hpp"

namespace pseudorep::testing {

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("pseudorep-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// n 1-D samples of width d with values in [0, 1) and labels i % k.
inline Dataset random_vectors(std::size_t n, std::size_t d, int k, std::uint64_t seed,
                              std::uint64_t first_id = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> x(n * d);
  for (auto& v : x) v = u(rng);
  std::vector<SampleId> ids(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = SampleId{first_id + i};
    labels[i] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return Dataset(Shape{{d}}, std::move(x), std::move(ids), std::move(labels), k);
}

/// Random row-stochastic matrix.
inline FloatMatrix random_proba(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::gamma_distribution<double> g(0.5, 1.0);
  FloatMatrix p(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    double s = 0.0;
    std::vector<double> v(cols);
    for (auto& x : v) s += (x = g(rng) + 1e-12);
    for (Eigen::Index c = 0; c < p.cols(); ++c) p(r, c) = static_cast<float>(v[c] / s);
  }
  return p;
}

}  // namespace pseudorep::testing

namespace pseudorep::testing {

/// Reference selection: per predicted class (first maximal column), sort
/// every candidate by (confidence desc, id asc) and keep the first q.
inline std::vector<std::vector<std::pair<std::uint64_t, double>>> brute_force_selection(
    const FloatMatrix& proba, const std::vector<SampleId>& ids, std::size_t q, bool neg_entropy) {
  const auto k = static_cast<std::size_t>(proba.cols());
  std::vector<std::vector<std::pair<std::uint64_t, double>>> buckets(k);
  for (Eigen::Index r = 0; r < proba.rows(); ++r) {
    std::size_t best = 0;
    double conf = 0.0, top = -1.0;
    for (Eigen::Index c = 0; c < proba.cols(); ++c) {
      const double p = proba(r, c);
      if (p > top) {
        top = p;
        best = static_cast<std::size_t>(c);
      }
      if (neg_entropy && p > 0.0) conf += p * std::log(p);
    }
    if (!neg_entropy) conf = top;
    buckets[best].emplace_back(ids[static_cast<std::size_t>(r)].value, conf);
  }
  for (auto& b : buckets) {
    std::sort(b.begin(), b.end(), [](const auto& x, const auto& y) {
      return x.second != y.second ? x.second > y.second : x.first < y.first;
    });
    if (b.size() > q) b.resize(q);
  }
  return buckets;
}

/// Random probability rows; with `coarse` the entries are multiples of 1/8, which makes
/// confidence ties and argmax ties common.
inline FloatMatrix selection_case(std::size_t rows, std::size_t cols, bool coarse, std::mt19937_64& rng) {
  if (!coarse) return random_proba(rows, cols, rng);
  FloatMatrix p = FloatMatrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::uniform_int_distribution<std::size_t> pick(0, cols - 1);
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    for (int unit = 0; unit < 8; ++unit) p(r, static_cast<Eigen::Index>(pick(rng))) += 0.125f;
  }
  return p;
}

}  // namespace pseudorep::testing

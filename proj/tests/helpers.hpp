#pragma once

#include <random>
#include <string>

#include "lipcert/io.hpp"
#include "lipcert/model.hpp"
#include "lipcert/multipliers.hpp"

namespace testing {

inline std::string fixture(const std::string& name) {
  return std::string(LIPCERT_FIXTURES) + "/" + name;
}

inline lipcert::FnnModel toy_model() {
  return lipcert::load_model(fixture("toy_model.json"));
}

inline lipcert::Vector toy_w0() {
  return lipcert::load_input(fixture("toy_input.json"));
}

inline lipcert::Vector uniform_vector(int size, double lo, double hi,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  lipcert::Vector v(size);
  for (auto& x : v) x = u(rng);
  return v;
}

// Uniform sample in the eps-ball around w0.
inline lipcert::Vector ball_sample(const lipcert::Vector& w0, double eps,
                                   std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  lipcert::Vector d(w0.size());
  for (auto& x : d) x = g(rng);
  double r = eps * std::pow(u(rng), 1.0 / static_cast<double>(w0.size()));
  return w0 + d * (r / d.norm());
}

// Random ensemble shared by the property tests: n <= 30, m <= 10, l <= 5.
struct Instance {
  lipcert::FnnModel model;
  lipcert::Vector w0;
};

inline Instance ensemble_instance(int seed) {
  int n = 5 + seed % 26, m = 2 + seed % 9, l = 2 + seed % 4;
  return {lipcert::gen_random(n, m, l, static_cast<std::uint64_t>(seed)),
          lipcert::Vector::LinSpaced(m, -0.5, 0.5)};
}


inline lipcert::OzfParam random_ozf(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  lipcert::Matrix m = lipcert::Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) m(i, j) = -u(rng);
    }
  }
  for (int i = 0; i < n; ++i) {
    double need = std::max(-m.row(i).sum(), -m.col(i).sum());
    m(i, i) = need + u(rng);
  }
  return {m};
}

inline lipcert::FazParam random_faz(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  lipcert::FazParam p;
  p.nu = lipcert::Vector(n);
  p.eta = lipcert::Vector(n);
  p.lambda = lipcert::Vector(n);
  p.t = lipcert::Vector(n * (n - 1) / 2);
  for (auto& x : p.nu) x = u(rng);
  for (auto& x : p.eta) x = u(rng);
  for (auto& x : p.lambda) x = g(rng);
  for (auto& x : p.t) x = u(rng);
  return p;
}

inline lipcert::NnParam random_nn(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  lipcert::Matrix q(2 * n + 1, 2 * n + 1);
  for (int i = 0; i < q.rows(); ++i) {
    for (int j = i; j < q.cols(); ++j) q(i, j) = q(j, i) = u(rng);
  }
  lipcert::Vector j(n);
  for (auto& x : j) x = g(rng);
  return {q, j};
}
}  // namespace testing

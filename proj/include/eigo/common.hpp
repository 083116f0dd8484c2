#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace eigo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct singular_design_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct protocol_error : std::logic_error {
  using std::logic_error::logic_error;
};

/// Axis-aligned box domain.
struct Box {
  Vec lower;
  Vec upper;

  Box() = default;
  Box(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size())
      throw dimension_error("Box: lower/upper dimension mismatch");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
      if (!(lower[i] < upper[i]))
        throw config_error("Box: lower must be strictly below upper");
  }

  static Box unit(int d) {
    return Box(Vec::Zero(d), Vec::Ones(d));
  }

  int dim() const { return static_cast<int>(lower.size()); }

  Vec width() const { return upper - lower; }

  bool contains(const Vec& x, double tol = 0.0) const {
    if (x.size() != lower.size()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
    return true;
  }

  Vec clip(Vec x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      x[i] = std::min(std::max(x[i], lower[i]), upper[i]);
    return x;
  }

  /// Map a point of [0,1)^d into the box.
  Vec map_unit(const Vec& u) const {
    return lower + u.cwiseProduct(width());
  }
};

inline Vec uniform_in_box(const Box& box, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec u(box.dim());
  for (int i = 0; i < box.dim(); ++i) u[i] = unif(rng);
  return box.map_unit(u);
}

}  // namespace eigo

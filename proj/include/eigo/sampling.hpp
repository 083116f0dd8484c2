#pragma once

#include <cmath>

#include "eigo/common.hpp"

namespace eigo {

/// Radical-inverse of i in the given base (van der Corput).
inline double radical_inverse(unsigned long long i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

inline unsigned halton_base(int dim) {
  static constexpr unsigned primes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                        23, 29, 31, 37, 41, 43, 47, 53};
  if (dim < 0 || dim >= 16)
    throw config_error("halton_base: dimension out of supported range");
  return primes[dim];
}

/// Halton sequence with a Cranley-Patterson rotation: a deterministic
/// low-discrepancy stream, scrambled by a per-stream shift in [0,1)^d.
class ScrambledHalton {
 public:
  ScrambledHalton(int dim, Rng& rng) : shift_(dim) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int j = 0; j < dim; ++j) shift_[j] = unif(rng);
  }

  /// Point i >= 1 of the stream, in [0,1)^d.
  Vec point(unsigned long long i) const {
    Vec u(shift_.size());
    for (Eigen::Index j = 0; j < shift_.size(); ++j) {
      double v = radical_inverse(i, halton_base(static_cast<int>(j))) + shift_[j];
      u[j] = v - std::floor(v);
    }
    return u;
  }

  Vec point_in(const Box& box, unsigned long long i) const {
    return box.map_unit(point(i));
  }

 private:
  Vec shift_;
};

}  // namespace eigo

#pragma once

#include <cstddef>
#include <functional>

#include "nashseek/linalg.hpp"

namespace nashseek {

/// f_i(x_i, x_i^{(1)}, …, x_i^{(n−1)}, w_i); chain rows are the derivatives.
using DriftFn = std::function<Vector(const RowMatrix& chain, const Vector& w)>;

/// n-th order integrator chain x_i^{(n)} = f_i(…, w_i) + u_i.
///
/// Only the simulator touches a Plant; the seeking laws never receive one.
struct Plant {
  std::size_t order_n = 1;
  std::size_t dim_m = 1;
  DriftFn drift;
  Vector w;

  [[nodiscard]] Vector evaluate_drift(const RowMatrix& chain) const {
    if (!drift) return Vector::Zero(static_cast<Eigen::Index>(dim_m));
    return drift(chain, w);
  }
};

[[nodiscard]] inline Plant integrator_chain(std::size_t order_n, std::size_t dim_m) {
  return Plant{order_n, dim_m, nullptr, Vector(0)};
}

}  // namespace nashseek

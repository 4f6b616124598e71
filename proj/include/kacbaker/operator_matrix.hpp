#pragma once

#include <Eigen/Core>

#include "kacbaker/core.hpp"

namespace kacbaker {

enum class Basis { Monomial, Hermite };

/// Finite section of a transfer operator together with the data that
/// produced it. `entries(m, k)` is the coefficient of basis element m in the
/// image of basis element k.
struct OperatorMatrix {
  Basis basis;
  Beta beta;
  ModelParams params;
  int dim;
  Eigen::MatrixXcd entries;
};

}  // namespace kacbaker

#pragma once

#include <string>
#include <vector>

#include "quarteig/pencil.hpp"

namespace quarteig {

struct PairDiagnostics {
  Real eta_right = 0.0;
  Real eta_left = 0.0;
  Real omega_right = 0.0;  // NaN when undefined (infinite eigenvalue)
  Real omega_left = 0.0;
  bool omega_right_unbounded = false;  // a row with zero weight and nonzero residual
  bool omega_left_unbounded = false;
  EigClass cls = EigClass::finite;
};

struct EigenPair {
  HomogeneousEig eig;
  Vector x;               // unit 2-norm right eigenvector
  Vector y;               // unit 2-norm left eigenvector, empty when not computed
  std::string source;     // "qz", "deflated_zero", "deflated_infinite"
  std::string right_method;
  std::string left_method;
  std::vector<std::string> flags;
  PairDiagnostics diag;
};

struct EigenSolution {
  Index n = 0;
  std::vector<EigenPair> pairs;
};

}  // namespace quarteig

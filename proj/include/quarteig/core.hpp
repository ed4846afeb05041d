#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace quarteig {

using Real = double;
using Complex = std::complex<double>;
using Index = Eigen::Index;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Real kEps = std::numeric_limits<Real>::epsilon();

/// Error categories; the CLI maps each one to a distinct exit code.
enum class ErrorCode : std::uint8_t {
  invalid_input = 1,
  dimension_mismatch,
  missing_file,
  malformed_file,
  io_failure,
  singular_shift,
  deflation_failure,
  backend_failure,
  recovery_failure,
  usage,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::missing_file: return "missing_file";
    case ErrorCode::malformed_file: return "malformed_file";
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::singular_shift: return "singular_shift";
    case ErrorCode::deflation_failure: return "deflation_failure";
    case ErrorCode::backend_failure: return "backend_failure";
    case ErrorCode::recovery_failure: return "recovery_failure";
    case ErrorCode::usage: return "usage";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// v /= s in real arithmetic.  Eigen's packet complex division squares the
// divisor and loses vectors below about 1e-154 to underflow.
inline void divide_real(Eigen::Ref<Vector> v, Real s) {
  Eigen::Map<RealVector>(reinterpret_cast<Real*>(v.data()), 2 * v.size()) /= s;
}

inline Vector divided_real(Vector v, Real s) {
  divide_real(v, s);
  return v;
}

inline bool all_finite(const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    }
  }
  return true;
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!all_finite(m)) throw Error(ErrorCode::invalid_input, std::string(what) + " has non-finite entries");
}

/// ||Q^* Q - I||_F
inline Real unitarity_defect(const Matrix& q) {
  return (q.adjoint() * q - Matrix::Identity(q.cols(), q.cols())).norm();
}

inline Matrix permutation_matrix(const std::vector<Index>& perm) {
  const auto n = static_cast<Index>(perm.size());
  Matrix p = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) p(perm[static_cast<std::size_t>(j)], j) = 1.0;
  return p;
}

}  // namespace quarteig

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Dense>

namespace ballab {

using Complex = std::complex<double>;
/// A point of C^n. The dimension is the vector size.
using ComplexVec = Eigen::VectorXcd;
using ComplexMat = Eigen::MatrixXcd;

/// Points with 1 - |z| below this are treated as on the boundary.
inline constexpr double kBoundaryMargin = 1e-14;

// Error types. Every failure the library reports derives from one of these,
// so front ends can map them onto exit codes.

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by numerical procedures that could not reach their contract.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegreeOverflow : public NumericError {
 public:
  using NumericError::NumericError;
};

class InconsistencyError : public NumericError {
 public:
  using NumericError::NumericError;
};

class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hermitian product <z, a> = sum z_i conj(a_i).
inline Complex inner(const ComplexVec& z, const ComplexVec& a) {
  return a.dot(z);  // Eigen conjugates the left operand.
}

inline void require_same_dim(const ComplexVec& a, const ComplexVec& b, const char* where) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(std::string(where) + ": dimension mismatch (" +
                            std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

inline bool all_finite(const ComplexVec& z) {
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z[i].real()) || !std::isfinite(z[i].imag())) return false;
  }
  return true;
}

/// Throws DomainError unless |z| <= 1 - kBoundaryMargin.
inline void require_interior(const ComplexVec& z, const char* where) {
  if (!all_finite(z)) throw DomainError(std::string(where) + ": non-finite point");
  if (!(z.norm() <= 1.0 - kBoundaryMargin)) {
    throw DomainError(std::string(where) + ": point outside the open unit ball (|z| = " +
                      std::to_string(z.norm()) + ")");
  }
}

inline ComplexVec basis_vector(int n, int i) {
  ComplexVec e = ComplexVec::Zero(n);
  e[i] = 1.0;
  return e;
}

}  // namespace ballab

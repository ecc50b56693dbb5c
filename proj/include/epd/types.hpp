#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace epd {

using Index = Eigen::Index;

template <typename Scalar = double>
using Sym2 = Eigen::Matrix<Scalar, 2, 2>;

/// Symmetric 2x2 tensor in Mandel form (t11, t22, sqrt(2) t12); the
/// Euclidean norm of this vector is the Frobenius norm of the tensor.
template <typename Scalar = double>
using Mandel = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar = double>
using MandelMatrix = Eigen::Matrix<Scalar, 3, 3>;

/// Nodal displacement, interleaved (ux0, uy0, ux1, uy1, ...).
using NodalVector = Eigen::VectorXd;
using NodalScalar = Eigen::VectorXd;

/// Per-element trace-free plastic strain stored as (pi11, pi12); pi22 = -pi11.
using PlasticField = Eigen::Matrix2Xd;

/// Per-element stress stored column-wise as (s11, s22, s12).
using StressField = Eigen::Matrix3Xd;

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

template <typename Scalar>
inline Mandel<Scalar> to_mandel(const Sym2<Scalar>& t) {
  return {t(0, 0), t(1, 1), Scalar(M_SQRT2) * t(0, 1)};
}

template <typename Scalar>
inline Sym2<Scalar> from_mandel(const Mandel<Scalar>& m) {
  Sym2<Scalar> t;
  const Scalar off = m(2) / Scalar(M_SQRT2);
  t << m(0), off, off, m(1);
  return t;
}

template <typename Scalar>
inline Sym2<Scalar> dev(const Sym2<Scalar>& t) {
  return t - Scalar(0.5) * t.trace() * Sym2<Scalar>::Identity();
}

/// Trace-free tensor from its stored pair (pi11, pi12).
template <typename Scalar>
inline Sym2<Scalar> trace_free(Scalar p11, Scalar p12) {
  Sym2<Scalar> t;
  t << p11, p12, p12, -p11;
  return t;
}

}  // namespace epd

#pragma once

#include "epd/types.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace epd {

/// Isotropic material whose moduli and yield stress interpolate linearly
/// between a fully damaged (zeta = 0) and an intact (zeta = 1) state.
template <typename Scalar = double>
struct MaterialModel {
  Scalar lambda1 = Scalar(7.5e9);
  Scalar mu1 = Scalar(11.25e9);
  Scalar lambda0 = Scalar(0.75e9);
  Scalar mu0 = Scalar(1.125e9);
  Scalar sigma_y1 = Scalar(2e6);
  Scalar sigma_y0 = Scalar(2e-6);
  Scalar a1 = Scalar(100e9);  ///< healing viscosity, Pa s
  Scalar a2 = Scalar(10e6);   ///< damage viscosity, Pa s
  Scalar a3 = Scalar(10);     ///< damage activation, Pa
  Scalar b1 = Scalar(1e-3);   ///< stored damage energy, J/m^3
  Scalar kappa = Scalar(1e-3);

  void validate() const {
    if (!(lambda1 >= lambda0 && lambda0 >= 0)) {
      throw std::invalid_argument("material: need lambda1 >= lambda0 >= 0");
    }
    if (!(mu1 >= mu0 && mu0 > 0)) throw std::invalid_argument("material: need mu1 >= mu0 > 0");
    if (!(sigma_y1 >= sigma_y0 && sigma_y0 > 0)) {
      throw std::invalid_argument("material: need sigma_y1 >= sigma_y0 > 0");
    }
    if (!(a1 >= 0 && a2 >= 0 && a3 >= 0)) {
      throw std::invalid_argument("material: dissipation coefficients must be >= 0");
    }
    if (!(b1 >= 0)) throw std::invalid_argument("material: b1 must be >= 0");
    if (!(kappa > 0)) throw std::invalid_argument("material: kappa must be > 0");
  }
};

namespace detail {
template <typename Scalar>
inline void require_unit_interval(Scalar zeta) {
  if (!(zeta >= Scalar(0) && zeta <= Scalar(1))) {
    throw std::domain_error("damage value outside [0, 1]");
  }
}
}  // namespace detail

/// Lame pair (lambda, mu) at damage zeta.
template <typename Scalar>
inline std::pair<Scalar, Scalar> lame(const MaterialModel<Scalar>& m, Scalar zeta) {
  detail::require_unit_interval(zeta);
  return {(m.lambda1 - m.lambda0) * zeta + m.lambda0, (m.mu1 - m.mu0) * zeta + m.mu0};
}

template <typename Scalar>
inline Scalar elastic_energy_density(const MaterialModel<Scalar>& m, const Sym2<Scalar>& e,
                                     Scalar zeta) {
  const auto [lambda, mu] = lame(m, zeta);
  const Scalar tr = e.trace();
  return Scalar(0.5) * lambda * tr * tr + mu * e.squaredNorm();
}

template <typename Scalar>
inline Sym2<Scalar> stress(const MaterialModel<Scalar>& m, const Sym2<Scalar>& e, Scalar zeta) {
  const auto [lambda, mu] = lame(m, zeta);
  return lambda * e.trace() * Sym2<Scalar>::Identity() + Scalar(2) * mu * e;
}

/// d/dzeta of the elastic energy density; constant in zeta.
template <typename Scalar>
inline Scalar elastic_energy_sensitivity(const MaterialModel<Scalar>& m, const Sym2<Scalar>& e) {
  const Scalar tr = e.trace();
  return Scalar(0.5) * (m.lambda1 - m.lambda0) * tr * tr + (m.mu1 - m.mu0) * e.squaredNorm();
}

template <typename Scalar>
inline Scalar yield_stress(const MaterialModel<Scalar>& m, Scalar zeta) {
  detail::require_unit_interval(zeta);
  return (m.sigma_y1 - m.sigma_y0) * zeta + m.sigma_y0;
}

/// Dissipation potential a(rate): quadratic healing and damage branches plus
/// a rate-independent activation on damage.
template <typename Scalar>
inline Scalar damage_dissipation(const MaterialModel<Scalar>& m, Scalar rate) {
  const Scalar heal = std::max(rate, Scalar(0));
  const Scalar dmg = std::max(-rate, Scalar(0));
  return Scalar(0.5) * m.a1 * heal * heal + Scalar(0.5) * m.a2 * dmg * dmg + m.a3 * dmg;
}

/// rate * da(rate); single-valued also at rate = 0.
template <typename Scalar>
inline Scalar dissipation_rate_hat(const MaterialModel<Scalar>& m, Scalar rate) {
  const Scalar heal = std::max(rate, Scalar(0));
  const Scalar dmg = std::max(-rate, Scalar(0));
  return m.a1 * heal * heal + m.a2 * dmg * dmg + m.a3 * dmg;
}

}  // namespace epd

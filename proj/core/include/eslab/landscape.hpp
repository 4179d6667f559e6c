#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "eslab/random.hpp"

namespace eslab {

using Vector = std::vector<double>;

/// Raised when a parameter vector does not match the landscape dimension.
class DimensionError : public std::invalid_argument {
 public:
  DimensionError(std::size_t expected, std::size_t actual);

  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

void check_dimension(std::size_t expected, std::size_t actual);

/// R(θ) = c.
class FlatLandscape {
 public:
  FlatLandscape(std::size_t dimension, double constant_reward = 0.0);

  std::size_t dimension() const { return dimension_; }
  double constant_reward() const { return constant_; }

  double reward(std::span<const double> theta) const;
  Vector gradient(std::span<const double> theta) const;

 private:
  std::size_t dimension_;
  double constant_;
};

/// R(θ) = −v·θ, so the gradient is −v everywhere.
class LinearLandscape {
 public:
  explicit LinearLandscape(Vector v);

  std::size_t dimension() const { return v_.size(); }
  const Vector& v() const { return v_; }
  double v_norm() const;

  double reward(std::span<const double> theta) const;
  Vector gradient(std::span<const double> theta) const;

 private:
  Vector v_;
};

enum class BasisMode { canonical, random_rotation };

/// R(θ) = −½ Σ_k λ_k (u_k·θ)², with Q = Σ_k λ_k u_k u_kᵀ.
///
/// Q is never formed. The eigenbasis is either the canonical one (u_k = e_k)
/// or a seeded Haar-random rotation, which is stored densely and therefore
/// only meant for small verification runs. Eigenvalues may be zero or
/// negative.
class QuadraticLandscape {
 public:
  explicit QuadraticLandscape(Vector eigenvalues);
  QuadraticLandscape(Vector eigenvalues, std::uint64_t rotation_seed);

  std::size_t dimension() const { return eigenvalues_.size(); }
  const Vector& eigenvalues() const { return eigenvalues_; }
  /// Indices k with λ_k ≠ 0.
  const std::vector<std::size_t>& active_directions() const { return active_; }
  std::size_t rank() const { return active_.size(); }
  double trace_q2() const;

  BasisMode basis_mode() const;
  std::optional<std::uint64_t> rotation_seed() const { return rotation_seed_; }

  double reward(std::span<const double> theta) const;
  Vector gradient(std::span<const double> theta) const;

  /// u_k·θ.
  double project(std::span<const double> theta, std::size_t k) const;
  /// Coordinates (u_1·θ, …, u_d·θ).
  Vector to_eigenbasis(std::span<const double> theta) const;
  /// Σ_k c_k u_k.
  Vector from_eigenbasis(std::span<const double> coords) const;
  Vector eigenvector(std::size_t k) const;
  /// Qθ, the negative reward gradient.
  Vector apply_q(std::span<const double> theta) const;

 private:
  const double* basis_column(std::size_t k) const;

  Vector eigenvalues_;
  std::vector<std::size_t> active_;
  std::optional<std::uint64_t> rotation_seed_;
  // Column-major d×d orthogonal matrix; empty in canonical mode.
  std::shared_ptr<const Vector> basis_;
};

enum class LandscapeKind { flat, linear, quadratic };

std::string to_string(LandscapeKind kind);

/// Immutable tagged union over the three analytic surfaces.
class Landscape {
 public:
  Landscape(FlatLandscape flat) : impl_(std::move(flat)) {}
  Landscape(LinearLandscape linear) : impl_(std::move(linear)) {}
  Landscape(QuadraticLandscape quadratic) : impl_(std::move(quadratic)) {}

  LandscapeKind kind() const;
  std::size_t dimension() const;

  double reward(std::span<const double> theta) const;
  Vector gradient(std::span<const double> theta) const;

  /// Projection on the k-th eigendirection; the canonical axis for flat and
  /// linear surfaces.
  double project(std::span<const double> theta, std::size_t k) const;

  const FlatLandscape* as_flat() const { return std::get_if<FlatLandscape>(&impl_); }
  const LinearLandscape* as_linear() const { return std::get_if<LinearLandscape>(&impl_); }
  const QuadraticLandscape* as_quadratic() const {
    return std::get_if<QuadraticLandscape>(&impl_);
  }

 private:
  std::variant<FlatLandscape, LinearLandscape, QuadraticLandscape> impl_;
};

/// Observation noise σ_ξ added to every reward evaluation.
struct NoiseModel {
  double sigma_xi = 0.0;
};

/// R(θ) + σ_ξ·ξ with ξ ~ N(0, 1). No draw is consumed when σ_ξ = 0.
double observe_reward(const Landscape& landscape, const NoiseModel& noise,
                      std::span<const double> theta, Rng& rng);

}  // namespace eslab

#include "eslab/landscape.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace eslab {

DimensionError::DimensionError(std::size_t expected, std::size_t actual)
    : std::invalid_argument("dimension mismatch: expected d=" + std::to_string(expected) +
                            ", got " + std::to_string(actual)),
      expected_(expected),
      actual_(actual) {}

void check_dimension(std::size_t expected, std::size_t actual) {
  if (expected != actual) throw DimensionError(expected, actual);
}

// --- flat -------------------------------------------------------------------

FlatLandscape::FlatLandscape(std::size_t dimension, double constant_reward)
    : dimension_(dimension), constant_(constant_reward) {
  if (dimension == 0) throw std::invalid_argument("landscape dimension must be positive");
}

double FlatLandscape::reward(std::span<const double> theta) const {
  check_dimension(dimension_, theta.size());
  return constant_;
}

Vector FlatLandscape::gradient(std::span<const double> theta) const {
  check_dimension(dimension_, theta.size());
  return Vector(dimension_, 0.0);
}

// --- linear -----------------------------------------------------------------

LinearLandscape::LinearLandscape(Vector v) : v_(std::move(v)) {
  if (v_.empty()) throw std::invalid_argument("landscape dimension must be positive");
}

double LinearLandscape::v_norm() const {
  return std::sqrt(std::inner_product(v_.begin(), v_.end(), v_.begin(), 0.0));
}

double LinearLandscape::reward(std::span<const double> theta) const {
  check_dimension(v_.size(), theta.size());
  return -std::inner_product(v_.begin(), v_.end(), theta.begin(), 0.0);
}

Vector LinearLandscape::gradient(std::span<const double> theta) const {
  check_dimension(v_.size(), theta.size());
  Vector g(v_.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = -v_[i];
  return g;
}

// --- quadratic --------------------------------------------------------------

namespace {

std::vector<std::size_t> nonzero_indices(const Vector& eigenvalues) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    if (eigenvalues[k] != 0.0) idx.push_back(k);
  }
  return idx;
}

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
// of R's diagonal folded back into Q.
std::shared_ptr<const Vector> random_rotation(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  auto basis = std::make_shared<Vector>(d * d);
  Eigen::Map<Eigen::MatrixXd>(basis->data(), static_cast<Eigen::Index>(d),
                              static_cast<Eigen::Index>(d)) = q;
  return basis;
}

}  // namespace

QuadraticLandscape::QuadraticLandscape(Vector eigenvalues)
    : eigenvalues_(std::move(eigenvalues)), active_(nonzero_indices(eigenvalues_)) {
  if (eigenvalues_.empty()) throw std::invalid_argument("landscape dimension must be positive");
}

QuadraticLandscape::QuadraticLandscape(Vector eigenvalues, std::uint64_t rotation_seed)
    : QuadraticLandscape(std::move(eigenvalues)) {
  rotation_seed_ = rotation_seed;
  basis_ = random_rotation(eigenvalues_.size(), rotation_seed);
}

BasisMode QuadraticLandscape::basis_mode() const {
  return basis_ ? BasisMode::random_rotation : BasisMode::canonical;
}

double QuadraticLandscape::trace_q2() const {
  double t = 0.0;
  for (std::size_t k : active_) t += eigenvalues_[k] * eigenvalues_[k];
  return t;
}

const double* QuadraticLandscape::basis_column(std::size_t k) const {
  return basis_->data() + k * dimension();
}

double QuadraticLandscape::project(std::span<const double> theta, std::size_t k) const {
  check_dimension(dimension(), theta.size());
  if (k >= dimension()) throw std::out_of_range("eigendirection index out of range");
  if (!basis_) return theta[k];
  const double* u = basis_column(k);
  return std::inner_product(theta.begin(), theta.end(), u, 0.0);
}

double QuadraticLandscape::reward(std::span<const double> theta) const {
  check_dimension(dimension(), theta.size());
  double acc = 0.0;
  for (std::size_t k : active_) {
    const double p = basis_ ? project(theta, k) : theta[k];
    acc += eigenvalues_[k] * p * p;
  }
  return -0.5 * acc;
}

Vector QuadraticLandscape::apply_q(std::span<const double> theta) const {
  check_dimension(dimension(), theta.size());
  const std::size_t d = dimension();
  Vector out(d, 0.0);
  if (!basis_) {
    for (std::size_t k : active_) out[k] = eigenvalues_[k] * theta[k];
    return out;
  }
  for (std::size_t k : active_) {
    const double c = eigenvalues_[k] * project(theta, k);
    const double* u = basis_column(k);
    for (std::size_t i = 0; i < d; ++i) out[i] += c * u[i];
  }
  return out;
}

Vector QuadraticLandscape::gradient(std::span<const double> theta) const {
  Vector g = apply_q(theta);
  for (double& x : g) x = -x;
  return g;
}

Vector QuadraticLandscape::to_eigenbasis(std::span<const double> theta) const {
  check_dimension(dimension(), theta.size());
  if (!basis_) return Vector(theta.begin(), theta.end());
  Vector c(dimension());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = project(theta, k);
  return c;
}

Vector QuadraticLandscape::from_eigenbasis(std::span<const double> coords) const {
  check_dimension(dimension(), coords.size());
  if (!basis_) return Vector(coords.begin(), coords.end());
  const std::size_t d = dimension();
  Vector out(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    const double* u = basis_column(k);
    for (std::size_t i = 0; i < d; ++i) out[i] += coords[k] * u[i];
  }
  return out;
}

Vector QuadraticLandscape::eigenvector(std::size_t k) const {
  if (k >= dimension()) throw std::out_of_range("eigendirection index out of range");
  if (!basis_) {
    Vector e(dimension(), 0.0);
    e[k] = 1.0;
    return e;
  }
  const double* u = basis_column(k);
  return Vector(u, u + dimension());
}

// --- dispatch ---------------------------------------------------------------

std::string to_string(LandscapeKind kind) {
  switch (kind) {
    case LandscapeKind::flat: return "flat";
    case LandscapeKind::linear: return "linear";
    case LandscapeKind::quadratic: return "quadratic";
  }
  return "unknown";
}

LandscapeKind Landscape::kind() const {
  return static_cast<LandscapeKind>(impl_.index());
}

std::size_t Landscape::dimension() const {
  return std::visit([](const auto& l) { return l.dimension(); }, impl_);
}

double Landscape::reward(std::span<const double> theta) const {
  return std::visit([&](const auto& l) { return l.reward(theta); }, impl_);
}

Vector Landscape::gradient(std::span<const double> theta) const {
  return std::visit([&](const auto& l) { return l.gradient(theta); }, impl_);
}

double Landscape::project(std::span<const double> theta, std::size_t k) const {
  if (const auto* q = as_quadratic()) return q->project(theta, k);
  check_dimension(dimension(), theta.size());
  if (k >= dimension()) throw std::out_of_range("direction index out of range");
  return theta[k];
}

double observe_reward(const Landscape& landscape, const NoiseModel& noise,
                      std::span<const double> theta, Rng& rng) {
  if (!(noise.sigma_xi >= 0.0)) throw std::invalid_argument("sigma_xi must be >= 0");
  const double r = landscape.reward(theta);
  if (noise.sigma_xi == 0.0) return r;
  return r + noise.sigma_xi * rng.normal();
}

}  // namespace eslab

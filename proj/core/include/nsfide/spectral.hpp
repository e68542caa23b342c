#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsfide::spectral {

/// Element of the truncated state space: coefficients against the
/// orthonormal sine basis e_n(y) = sqrt(2/pi) sin(n y), n = 1..N.
struct SpectralField {
  std::vector<double> coeffs;

  SpectralField() = default;
  explicit SpectralField(std::size_t n_modes, double fill = 0.0) : coeffs(n_modes, fill) {}

  std::size_t n_modes() const { return coeffs.size(); }
  double norm() const {
    double s = 0.0;
    for (double c : coeffs) s += c * c;
    return std::sqrt(s);
  }
  SpectralField& operator+=(const SpectralField& o) {
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
    return *this;
  }
  SpectralField& operator*=(double a) {
    for (double& c : coeffs) c *= a;
    return *this;
  }
};

inline SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
inline SpectralField operator*(double a, SpectralField x) { return x *= a; }

/// Interior collocation points y_j = j pi/(n_points+1), j = 1..n_points
/// (homogeneous Dirichlet ends excluded).
class SpaceGrid {
 public:
  explicit SpaceGrid(std::size_t n_points) : n_points_(n_points) {
    if (n_points == 0) throw std::invalid_argument("space grid needs n_points >= 1");
  }
  std::size_t n_points() const { return n_points_; }
  double point(std::size_t j) const {
    return M_PI * static_cast<double>(j + 1) / static_cast<double>(n_points_ + 1);
  }

 private:
  std::size_t n_points_;
};

/// Discrete sine transform pair between coefficients and collocation values.
/// Exact on the truncated span when n_points >= n_modes.
class SineTransform {
 public:
  SineTransform(std::size_t n_modes, const SpaceGrid& grid);

  std::size_t n_modes() const { return n_modes_; }
  std::size_t n_points() const { return grid_.n_points(); }
  const SpaceGrid& grid() const { return grid_; }

  void synthesize(const double* coeffs, double* values) const;
  void analyze(const double* values, double* coeffs) const;

  std::vector<double> synthesize(const SpectralField& x) const;
  SpectralField analyze(const std::vector<double>& values) const;

  /// Quadrature weight of the collocation rule (pi/(n_points+1)).
  double quad_weight() const { return M_PI / static_cast<double>(grid_.n_points() + 1); }

  const std::vector<double>& synthesis_matrix() const { return synth_; }  // row-major J x N

 private:
  std::size_t n_modes_;
  SpaceGrid grid_;
  std::vector<double> synth_;  // J x N
};

/// Scalar coefficient function with analytically coded derivatives up to
/// order 4 and declared sup bounds per order.
class CoefficientFunction {
 public:
  static constexpr int kMaxOrder = 4;

  virtual ~CoefficientFunction() = default;
  virtual double eval(int order, double x) const = 0;
  virtual double bound(int order) const = 0;
  virtual bool zero_at_zero() const = 0;
  virtual std::string describe() const = 0;
  virtual std::string name() const = 0;
  virtual std::vector<double> params() const = 0;

  double operator()(double x) const { return eval(0, x); }
};

using CoefficientFunctionPtr = std::shared_ptr<const CoefficientFunction>;

/// Registry: zero | constant(c) | scaled_tanh(a,s) | bounded_sine(a,w) |
/// shifted_tanh(a,s,c0). Throws std::invalid_argument ("configuration
/// error") for unknown names or wrong arity; require_zero_at_zero rejects
/// entries that do not vanish at the origin.
CoefficientFunctionPtr registry_lookup(const std::string& name, const std::vector<double>& params,
                                       bool require_zero_at_zero = false);

/// Pointwise multiplier fn^{(k)}(synthesize(field)) on the collocation grid;
/// applied to a direction field by pointwise product followed by analyze.
struct Multiplier {
  std::vector<double> values;

  SpectralField apply(const SpectralField& direction, const SineTransform& tf) const {
    std::vector<double> v = tf.synthesize(direction);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= values[j];
    return tf.analyze(v);
  }
};

/// Order 0: analyze(fn(synthesize(field))), de-aliased by truncation.
SpectralField nemytskii_apply(const CoefficientFunction& fn, const SpectralField& field,
                              const SineTransform& tf);

/// Order k >= 1: the multiplier fn^{(k)} evaluated along the field.
Multiplier nemytskii_multiplier(const CoefficientFunction& fn, int order,
                                const SpectralField& field, const SineTransform& tf);

}  // namespace nsfide::spectral

#include "nsfide/spectral.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace nsfide::spectral {

namespace {
using ConstMat = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using Vec = Eigen::Map<Eigen::VectorXd>;
}  // namespace

SineTransform::SineTransform(std::size_t n_modes, const SpaceGrid& grid)
    : n_modes_(n_modes), grid_(grid) {
  if (n_modes == 0) throw std::invalid_argument("need n_modes >= 1");
  if (grid.n_points() < n_modes)
    throw std::invalid_argument("n_points < n_modes would alias the truncated span");
  const double amp = std::sqrt(2.0 / M_PI);
  synth_.resize(grid.n_points() * n_modes);
  for (std::size_t j = 0; j < grid.n_points(); ++j)
    for (std::size_t n = 0; n < n_modes; ++n)
      synth_[j * n_modes + n] = amp * std::sin(static_cast<double>(n + 1) * grid.point(j));
}

void SineTransform::synthesize(const double* coeffs, double* values) const {
  ConstMat S(synth_.data(), static_cast<Eigen::Index>(grid_.n_points()),
             static_cast<Eigen::Index>(n_modes_));
  Vec(values, S.rows()).noalias() = S * ConstVec(coeffs, S.cols());
}

void SineTransform::analyze(const double* values, double* coeffs) const {
  ConstMat S(synth_.data(), static_cast<Eigen::Index>(grid_.n_points()),
             static_cast<Eigen::Index>(n_modes_));
  Vec(coeffs, S.cols()).noalias() = quad_weight() * (S.transpose() * ConstVec(values, S.rows()));
}

std::vector<double> SineTransform::synthesize(const SpectralField& x) const {
  if (x.n_modes() != n_modes_) throw std::invalid_argument("mode count mismatch");
  std::vector<double> v(grid_.n_points());
  synthesize(x.coeffs.data(), v.data());
  return v;
}

SpectralField SineTransform::analyze(const std::vector<double>& values) const {
  if (values.size() != grid_.n_points()) throw std::invalid_argument("point count mismatch");
  SpectralField x(n_modes_);
  analyze(values.data(), x.coeffs.data());
  return x;
}

namespace {

class ZeroFn final : public CoefficientFunction {
 public:
  double eval(int, double) const override { return 0.0; }
  double bound(int) const override { return 0.0; }
  bool zero_at_zero() const override { return true; }
  std::string describe() const override { return "zero"; }
  std::string name() const override { return "zero"; }
  std::vector<double> params() const override { return {}; }
};

class ConstantFn final : public CoefficientFunction {
 public:
  explicit ConstantFn(double c) : c_(c) {}
  double eval(int order, double) const override { return order == 0 ? c_ : 0.0; }
  double bound(int order) const override { return order == 0 ? std::abs(c_) : 0.0; }
  bool zero_at_zero() const override { return c_ == 0.0; }
  std::string describe() const override { return "constant(" + std::to_string(c_) + ")"; }
  std::string name() const override { return "constant"; }
  std::vector<double> params() const override { return {c_}; }

 private:
  double c_;
};

// a tanh(x/s) + c0; derivatives in terms of t = tanh(x/s).
class TanhFn final : public CoefficientFunction {
 public:
  TanhFn(double a, double s, double c0, std::string name)
      : a_(a), s_(s), c0_(c0), name_(std::move(name)) {
    if (s_ == 0.0) throw std::invalid_argument("tanh scale must be nonzero");
  }
  double eval(int order, double x) const override {
    const double t = std::tanh(x / s_);
    const double u = 1.0 - t * t;
    switch (order) {
      case 0: return a_ * t + c0_;
      case 1: return a_ / s_ * u;
      case 2: return a_ / (s_ * s_) * (-2.0 * t * u);
      case 3: return a_ / (s_ * s_ * s_) * u * (6.0 * t * t - 2.0);
      case 4: return a_ / (s_ * s_ * s_ * s_) * u * (16.0 * t - 24.0 * t * t * t);
      default: throw std::invalid_argument("derivative order exceeds m_max = 4");
    }
  }
  double bound(int order) const override {
    const double a = std::abs(a_);
    switch (order) {
      case 0: return a + std::abs(c0_);
      case 1: return a / std::abs(s_);
      case 2: return 0.7699 * a / std::pow(std::abs(s_), 2);  // max |2t^3-2t| on (-1,1)
      case 3: return 2.0 * a / std::pow(std::abs(s_), 3);
      case 4: return 4.0861 * a / std::pow(std::abs(s_), 4);
      default: throw std::invalid_argument("derivative order exceeds m_max = 4");
    }
  }
  bool zero_at_zero() const override { return c0_ == 0.0; }
  std::string describe() const override {
    return name_ + "(" + std::to_string(a_) + "," + std::to_string(s_) +
           (name_ == "shifted_tanh" ? "," + std::to_string(c0_) : "") + ")";
  }
  std::string name() const override { return name_; }
  std::vector<double> params() const override {
    if (name_ == "shifted_tanh") return {a_, s_, c0_};
    return {a_, s_};
  }

 private:
  double a_, s_, c0_;
  std::string name_;
};

class BoundedSineFn final : public CoefficientFunction {
 public:
  BoundedSineFn(double a, double w) : a_(a), w_(w) {}
  double eval(int order, double x) const override {
    if (order > 4) throw std::invalid_argument("derivative order exceeds m_max = 4");
    const double p = a_ * std::pow(w_, order);
    switch (order % 4) {
      case 0: return p * std::sin(w_ * x);
      case 1: return p * std::cos(w_ * x);
      case 2: return -p * std::sin(w_ * x);
      default: return -p * std::cos(w_ * x);
    }
  }
  double bound(int order) const override {
    if (order > 4) throw std::invalid_argument("derivative order exceeds m_max = 4");
    return std::abs(a_) * std::pow(std::abs(w_), order);
  }
  bool zero_at_zero() const override { return true; }
  std::string describe() const override {
    return "bounded_sine(" + std::to_string(a_) + "," + std::to_string(w_) + ")";
  }
  std::string name() const override { return "bounded_sine"; }
  std::vector<double> params() const override { return {a_, w_}; }

 private:
  double a_, w_;
};

void need_params(const std::string& name, const std::vector<double>& p, std::size_t arity) {
  if (p.size() != arity)
    throw std::invalid_argument("configuration error: " + name + " takes " +
                                std::to_string(arity) + " parameter(s)");
}

}  // namespace

CoefficientFunctionPtr registry_lookup(const std::string& name, const std::vector<double>& params,
                                       bool require_zero_at_zero) {
  CoefficientFunctionPtr fn;
  if (name == "zero") {
    need_params(name, params, 0);
    fn = std::make_shared<ZeroFn>();
  } else if (name == "constant") {
    need_params(name, params, 1);
    fn = std::make_shared<ConstantFn>(params[0]);
  } else if (name == "scaled_tanh") {
    need_params(name, params, 2);
    fn = std::make_shared<TanhFn>(params[0], params[1], 0.0, "scaled_tanh");
  } else if (name == "shifted_tanh") {
    need_params(name, params, 3);
    fn = std::make_shared<TanhFn>(params[0], params[1], params[2], "shifted_tanh");
  } else if (name == "bounded_sine") {
    need_params(name, params, 2);
    fn = std::make_shared<BoundedSineFn>(params[0], params[1]);
  } else {
    throw std::invalid_argument("configuration error: unknown coefficient function '" + name +
                                "'");
  }
  if (require_zero_at_zero && !fn->zero_at_zero())
    throw std::invalid_argument("configuration error: coefficient " + fn->describe() +
                                " must vanish at zero");
  return fn;
}

SpectralField nemytskii_apply(const CoefficientFunction& fn, const SpectralField& field,
                              const SineTransform& tf) {
  std::vector<double> v = tf.synthesize(field);
  for (double& x : v) x = fn.eval(0, x);
  return tf.analyze(v);
}

Multiplier nemytskii_multiplier(const CoefficientFunction& fn, int order,
                                const SpectralField& field, const SineTransform& tf) {
  if (order < 1 || order > CoefficientFunction::kMaxOrder)
    throw std::invalid_argument("multiplier order must be in 1..4");
  Multiplier m{tf.synthesize(field)};
  for (double& x : m.values) x = fn.eval(order, x);
  return m;
}

}  // namespace nsfide::spectral

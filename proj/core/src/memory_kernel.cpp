#include "nsfide/memory_kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace nsfide::resolvent {

namespace {

class ZeroKernel final : public MemoryKernel {
 public:
  double value(double) const override { return 0.0; }
  double derivative(double) const override { return 0.0; }
  std::string describe() const override { return "zero"; }
  std::string name() const override { return "zero"; }
  std::vector<double> params() const override { return {}; }
  bool is_zero() const override { return true; }
};

class ConstantKernel final : public MemoryKernel {
 public:
  explicit ConstantKernel(double beta) : beta_(beta) {}
  double value(double) const override { return beta_; }
  double derivative(double) const override { return 0.0; }
  std::string describe() const override { return "constant(" + std::to_string(beta_) + ")"; }
  std::string name() const override { return "constant"; }
  std::vector<double> params() const override { return {beta_}; }
  bool is_zero() const override { return beta_ == 0.0; }

 private:
  double beta_;
};

class ExpDecayKernel final : public MemoryKernel {
 public:
  ExpDecayKernel(double beta, double a) : beta_(beta), a_(a) {
    if (a < 0.0) throw std::invalid_argument("exp_decay rate must be >= 0");
  }
  double value(double t) const override { return beta_ * std::exp(-a_ * t); }
  double derivative(double t) const override { return -a_ * beta_ * std::exp(-a_ * t); }
  std::string describe() const override {
    return "exp_decay(" + std::to_string(beta_) + "," + std::to_string(a_) + ")";
  }
  std::string name() const override { return "exp_decay"; }
  std::vector<double> params() const override { return {beta_, a_}; }
  bool is_zero() const override { return beta_ == 0.0; }

 private:
  double beta_, a_;
};

}  // namespace

MemoryKernelPtr memory_kernel_lookup(const std::string& name, const std::vector<double>& params) {
  auto arity = [&](std::size_t n) {
    if (params.size() != n)
      throw std::invalid_argument("configuration error: memory kernel " + name + " takes " +
                                  std::to_string(n) + " parameter(s)");
  };
  if (name == "zero") {
    arity(0);
    return std::make_shared<ZeroKernel>();
  }
  if (name == "constant") {
    arity(1);
    return std::make_shared<ConstantKernel>(params[0]);
  }
  if (name == "exp_decay") {
    arity(2);
    return std::make_shared<ExpDecayKernel>(params[0], params[1]);
  }
  throw std::invalid_argument("configuration error: unknown memory kernel '" + name + "'");
}

}  // namespace nsfide::resolvent

#pragma once

#include <memory>
#include <string>
#include <vector>

namespace nsfide::resolvent {

/// Scalar memory kernel b(t) of the convolution term B(t) = b(t) A.
/// Registry entries are bounded C^1 with bounded uniformly continuous
/// derivative: zero | constant(beta) | exp_decay(beta, a) = beta e^{-a t}.
class MemoryKernel {
 public:
  virtual ~MemoryKernel() = default;
  virtual double value(double t) const = 0;
  virtual double derivative(double t) const = 0;
  virtual std::string describe() const = 0;
  virtual std::string name() const = 0;
  virtual std::vector<double> params() const = 0;
  virtual bool is_zero() const { return false; }
};

using MemoryKernelPtr = std::shared_ptr<const MemoryKernel>;

MemoryKernelPtr memory_kernel_lookup(const std::string& name, const std::vector<double>& params);

}  // namespace nsfide::resolvent

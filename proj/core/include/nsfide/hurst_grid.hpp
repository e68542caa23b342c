#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsfide {

/// Hurst index restricted to the long-memory regime (1/2, 1).
class HurstParameter {
 public:
  explicit HurstParameter(double h) : h_(h) {
    if (!(h > 0.5) || !(h < 1.0))
      throw std::invalid_argument("hurst out of (1/2,1): " + std::to_string(h));
  }
  double value() const { return h_; }
  double two_h() const { return 2.0 * h_; }

 private:
  double h_;
};

/// Uniform grid t_i = i*dt on [0, t_max], i = 0..n_steps.
class TimeGrid {
 public:
  TimeGrid(double t_max, std::size_t n_steps) : t_max_(t_max), n_steps_(n_steps) {
    if (!(t_max > 0.0)) throw std::invalid_argument("time grid needs t_max > 0");
    if (n_steps == 0) throw std::invalid_argument("time grid needs n_steps >= 1");
    dt_ = t_max / static_cast<double>(n_steps);
  }

  double t_max() const { return t_max_; }
  std::size_t n_steps() const { return n_steps_; }
  std::size_t n_points() const { return n_steps_ + 1; }
  double dt() const { return dt_; }
  double point(std::size_t i) const { return static_cast<double>(i) * dt_; }
  double midpoint(std::size_t cell) const { return (static_cast<double>(cell) + 0.5) * dt_; }

  bool same_as(const TimeGrid& other) const {
    return n_steps_ == other.n_steps_ && t_max_ == other.t_max_;
  }

 private:
  double t_max_;
  std::size_t n_steps_;
  double dt_;
};

/// Scalar function sampled at the grid points (n_steps+1 values). For the
/// weighted inner products the function is read as piecewise constant per
/// cell, frozen at the cell's left endpoint.
struct ScalarFunctionOnGrid {
  TimeGrid grid;
  std::vector<double> values;

  ScalarFunctionOnGrid(const TimeGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.n_points())
      throw std::invalid_argument("grid function needs one value per grid point");
  }

  static ScalarFunctionOnGrid zero(const TimeGrid& g) {
    return ScalarFunctionOnGrid(g, std::vector<double>(g.n_points(), 0.0));
  }

  /// Indicator of [0, t_k] for a grid point index k: 1 on cells 0..k-1.
  static ScalarFunctionOnGrid indicator(const TimeGrid& g, std::size_t k) {
    std::vector<double> v(g.n_points(), 0.0);
    for (std::size_t i = 0; i < k && i < v.size(); ++i) v[i] = 1.0;
    return ScalarFunctionOnGrid(g, std::move(v));
  }
};

}  // namespace nsfide

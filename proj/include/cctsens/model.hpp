#ifndef CCTSENS_MODEL_HPP
#define CCTSENS_MODEL_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cctsens/errors.hpp"

namespace cctsens {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

// A named vector field f(x,p) with analytic Jacobians.
struct ParametricModel {
  std::string name;
  int dim = 0;       // n, state dimension
  int n_params = 0;  // length of the parameter vector

  std::function<Vec(const Vec&, const Vec&)> f;
  std::function<Mat(const Vec&, const Vec&)> jac_x;  // n x n
  std::function<Mat(const Vec&, const Vec&)> jac_p;  // n x n_params
};

// One inequality h(x,p) > 0 with analytic gradients. Hessians default to
// zero, which is exact for the linear constraints shipped with the repo.
struct Constraint {
  std::string name;
  std::function<double(const Vec&, const Vec&)> h;
  std::function<RowVec(const Vec&, const Vec&)> grad_x;  // 1 x n
  std::function<RowVec(const Vec&, const Vec&)> grad_p;  // 1 x n_params
  std::function<Mat(const Vec&, const Vec&)> hess_xx;    // n x n, optional
  std::function<Mat(const Vec&, const Vec&)> hess_xp;    // n x n_params, optional
};

// A set of inequalities and the product function H = prod_k h_k together
// with its first and second derivatives (needed by the graze-point rows of
// the category-2 sensitivity system).
class ConstraintSet {
 public:
  ConstraintSet() = default;
  explicit ConstraintSet(std::vector<Constraint> cs) : constraints_(std::move(cs)) {}

  int count() const { return static_cast<int>(constraints_.size()); }
  bool empty() const { return constraints_.empty(); }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  void add(Constraint c) { constraints_.push_back(std::move(c)); }

  std::vector<double> values(const Vec& x, const Vec& p) const {
    std::vector<double> v(constraints_.size());
    for (size_t k = 0; k < constraints_.size(); ++k) v[k] = constraints_[k].h(x, p);
    return v;
  }

  // H(x,p) = prod_k h_k(x,p)
  double H(const Vec& x, const Vec& p) const {
    double prod = 1.0;
    for (const auto& c : constraints_) prod *= c.h(x, p);
    return prod;
  }

  // dH/dx = sum_k (prod_{j!=k} h_j) grad_x h_k
  RowVec gradH_x(const Vec& x, const Vec& p) const {
    const auto v = values(x, p);
    RowVec g = RowVec::Zero(x.size());
    for (size_t k = 0; k < constraints_.size(); ++k)
      g += prod_excluding(v, k) * constraints_[k].grad_x(x, p);
    return g;
  }

  RowVec gradH_p(const Vec& x, const Vec& p, int n_params) const {
    const auto v = values(x, p);
    RowVec g = RowVec::Zero(n_params);
    for (size_t k = 0; k < constraints_.size(); ++k)
      g += prod_excluding(v, k) * constraints_[k].grad_p(x, p);
    return g;
  }

  Mat hessH_xx(const Vec& x, const Vec& p) const {
    const auto v = values(x, p);
    const int n = static_cast<int>(x.size());
    Mat hess = Mat::Zero(n, n);
    for (size_t k = 0; k < constraints_.size(); ++k) {
      if (constraints_[k].hess_xx)
        hess += prod_excluding(v, k) * constraints_[k].hess_xx(x, p);
      const RowVec gk = constraints_[k].grad_x(x, p);
      for (size_t l = 0; l < constraints_.size(); ++l) {
        if (l == k) continue;
        hess += prod_excluding2(v, k, l) * gk.transpose() * constraints_[l].grad_x(x, p);
      }
    }
    return hess;
  }

  Mat hessH_xp(const Vec& x, const Vec& p, int n_params) const {
    const auto v = values(x, p);
    const int n = static_cast<int>(x.size());
    Mat hess = Mat::Zero(n, n_params);
    for (size_t k = 0; k < constraints_.size(); ++k) {
      if (constraints_[k].hess_xp)
        hess += prod_excluding(v, k) * constraints_[k].hess_xp(x, p);
      const RowVec gk = constraints_[k].grad_x(x, p);
      for (size_t l = 0; l < constraints_.size(); ++l) {
        if (l == k) continue;
        hess += prod_excluding2(v, k, l) * gk.transpose() * constraints_[l].grad_p(x, p);
      }
    }
    return hess;
  }

  // Hdot = (dH/dx) . f  along the given model
  double Hdot(const ParametricModel& model, const Vec& x, const Vec& p) const {
    return gradH_x(x, p).dot(model.f(x, p));
  }

  // d(Hdot)/dx = f^T hessH_xx + (dH/dx) (df/dx)
  RowVec gradHdot_x(const ParametricModel& model, const Vec& x, const Vec& p) const {
    const Vec fx = model.f(x, p);
    return fx.transpose() * hessH_xx(x, p) + gradH_x(x, p) * model.jac_x(x, p);
  }

  // d(Hdot)/dp = f^T hessH_xp + (dH/dx) (df/dp)
  RowVec gradHdot_p(const ParametricModel& model, const Vec& x, const Vec& p) const {
    const Vec fx = model.f(x, p);
    return fx.transpose() * hessH_xp(x, p, model.n_params) +
           gradH_x(x, p) * model.jac_p(x, p);
  }

  // Hddot = d(Hdot)/dx . f, parameters held fixed
  double Hddot(const ParametricModel& model, const Vec& x, const Vec& p) const {
    return gradHdot_x(model, x, p).dot(model.f(x, p));
  }

  // Union of two sets with constraints present in both included once
  // (matched by name). Topology-independent limits would otherwise make the
  // product positive definite near their boundary.
  static ConstraintSet combined(const ConstraintSet& a, const ConstraintSet& b) {
    ConstraintSet out = a;
    for (const auto& c : b.constraints()) {
      bool dup = false;
      for (const auto& existing : out.constraints_)
        if (existing.name == c.name) { dup = true; break; }
      if (!dup) out.add(c);
    }
    return out;
  }

 private:
  static double prod_excluding(const std::vector<double>& v, size_t k) {
    double prod = 1.0;
    for (size_t j = 0; j < v.size(); ++j)
      if (j != k) prod *= v[j];
    return prod;
  }
  static double prod_excluding2(const std::vector<double>& v, size_t k, size_t l) {
    double prod = 1.0;
    for (size_t j = 0; j < v.size(); ++j)
      if (j != k && j != l) prod *= v[j];
    return prod;
  }

  std::vector<Constraint> constraints_;
};

// Convenience builder for a linear constraint  c0 + a.x + b.p > 0.
inline Constraint linear_constraint(std::string name, double c0, Vec a, Vec b) {
  Constraint c;
  c.name = std::move(name);
  c.h = [c0, a, b](const Vec& x, const Vec& p) { return c0 + a.dot(x) + b.dot(p); };
  c.grad_x = [a](const Vec&, const Vec&) { return RowVec(a.transpose()); };
  c.grad_p = [b](const Vec&, const Vec&) { return RowVec(b.transpose()); };
  return c;
}

}  // namespace cctsens

#endif  // CCTSENS_MODEL_HPP

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "qoja/common.hpp"

namespace qoja {

/// Gauss-Newton linearisation: residual plus J^T J and J^T r. Tall sparse
/// problems fill the normal equations directly without forming J.
struct Linearization {
  Eigen::VectorXd residual;
  Eigen::MatrixXd jtj;
  Eigen::VectorXd jtr;

  static Linearization from_jacobian(Eigen::VectorXd r, const Eigen::MatrixXd& J) {
    Linearization l;
    l.jtj = J.transpose() * J;
    l.jtr = J.transpose() * r;
    l.residual = std::move(r);
    return l;
  }
};

/// Least-squares objective 0.5 * |r(x)|^2. `retract` maps a tangent step to
/// a new point (defaults to x + dx); derivatives are taken along it.
struct LeastSquaresProblem {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residuals;
  std::function<Linearization(const Eigen::VectorXd&)> linearize;  // optional
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> retract;  // optional
};

struct DoglegConfig {
  double initial_radius = 0.5;
  double shrink = 0.25;
  double grow = 2.0;
  double max_radius = 1e3;
  double min_radius = 1e-14;
  double gradient_tolerance = 1e-6;
  double step_tolerance = 1e-8;
  int max_iterations = 100;
  double fd_step = 1e-4;  // relative central-difference step
};

struct DoglegResult {
  Eigen::VectorXd x;
  double cost = 0.0;  // 0.5 * |r|^2
  int iterations = 0;
  std::vector<double> cost_history;  // after each accepted step, starting with the initial cost
  enum class Stop { kGradient, kStep, kIterations, kRadius } stop = Stop::kIterations;
};

inline Eigen::VectorXd retract_or_add(const LeastSquaresProblem& p, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& dx) {
  return p.retract ? p.retract(x, dx) : Eigen::VectorXd(x + dx);
}

/// Central-difference Jacobian along the retraction.
inline Eigen::MatrixXd numeric_jacobian(const LeastSquaresProblem& p, const Eigen::VectorXd& x, double rel_step,
                                        const Eigen::VectorXd* r0 = nullptr) {
  const Eigen::VectorXd base = r0 ? *r0 : p.residuals(x);
  Eigen::MatrixXd J(base.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(x.size());
    dx[i] = h;
    const Eigen::VectorXd rp = p.residuals(retract_or_add(p, x, dx));
    dx[i] = -h;
    const Eigen::VectorXd rm = p.residuals(retract_or_add(p, x, dx));
    J.col(i) = (rp - rm) / (2.0 * h);
  }
  return J;
}

/// Powell's dogleg trust-region method on the Gauss-Newton model.
inline DoglegResult dogleg_minimize(const LeastSquaresProblem& problem, Eigen::VectorXd x,
                                    const DoglegConfig& cfg = {}) {
  auto linearize = [&](const Eigen::VectorXd& at) {
    if (problem.linearize) return problem.linearize(at);
    Eigen::VectorXd r = problem.residuals(at);
    const Eigen::MatrixXd J = numeric_jacobian(problem, at, cfg.fd_step, &r);
    return Linearization::from_jacobian(std::move(r), J);
  };
  auto cost_of = [](const Eigen::VectorXd& r) {
    const double c = 0.5 * r.squaredNorm();
    return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
  };

  DoglegResult out;
  Linearization lin = linearize(x);
  double cost = cost_of(lin.residual);
  if (!std::isfinite(cost)) throw NumericError("dogleg: residual is not finite at the initial point");
  out.cost_history.push_back(cost);
  double radius = cfg.initial_radius;
  const Eigen::Index n = x.size();

  for (int it = 0; it < cfg.max_iterations; ++it) {
    out.iterations = it;
    const Eigen::VectorXd& g = lin.jtr;
    if (g.lpNorm<Eigen::Infinity>() < cfg.gradient_tolerance || cost == 0.0) {
      out.stop = DoglegResult::Stop::kGradient;
      break;
    }
    // Gauss-Newton step, lightly damped if the normal matrix is singular.
    Eigen::VectorXd gn;
    {
      Eigen::MatrixXd B = lin.jtj;
      const double scale = std::max(1e-300, B.diagonal().cwiseAbs().maxCoeff());
      double damp = 0.0;
      for (int k = 0; k < 12; ++k) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(B + damp * Eigen::MatrixXd::Identity(n, n));
        gn = ldlt.solve(-g);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive() && gn.allFinite() && g.dot(gn) < 0.0) break;
        damp = damp == 0.0 ? 1e-12 * scale : damp * 100.0;
        gn.resize(0);
      }
    }
    const double gBg = g.dot(lin.jtj * g);
    const Eigen::VectorXd sd = gBg > 0.0 ? Eigen::VectorXd(-(g.squaredNorm() / gBg) * g) : Eigen::VectorXd(-g);

    bool accepted = false;
    while (!accepted) {
      Eigen::VectorXd step;
      if (gn.size() == n && gn.norm() <= radius) {
        step = gn;
      } else if (sd.norm() >= radius || gn.size() != n) {
        step = (radius / sd.norm()) * sd;
      } else {
        // Walk from the Cauchy point toward the Gauss-Newton point to the boundary.
        const Eigen::VectorXd d = gn - sd;
        const double a = d.squaredNorm(), b = 2.0 * sd.dot(d), c = sd.squaredNorm() - radius * radius;
        const double tau = (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a);
        step = sd + tau * d;
      }
      if (step.norm() < cfg.step_tolerance) {
        out.stop = DoglegResult::Stop::kStep;
        out.x = x;
        out.cost = cost;
        return out;
      }
      const double predicted = -(g.dot(step) + 0.5 * step.dot(lin.jtj * step));
      const Eigen::VectorXd trial = retract_or_add(problem, x, step);
      const double trial_cost = cost_of(problem.residuals(trial));
      const double rho = predicted > 0.0 ? (cost - trial_cost) / predicted : -1.0;
      if (std::isfinite(trial_cost) && trial_cost <= cost && rho > 1e-4) {
        x = trial;
        if (rho > 0.75 && step.norm() > 0.99 * radius) radius = std::min(cfg.max_radius, cfg.grow * radius);
        if (rho < 0.25) radius *= cfg.shrink;
        accepted = true;
      } else {
        radius = cfg.shrink * std::min(radius, step.norm());
        if (radius < cfg.min_radius) {
          out.stop = DoglegResult::Stop::kRadius;
          out.x = x;
          out.cost = cost;
          return out;
        }
      }
    }
    lin = linearize(x);
    cost = cost_of(lin.residual);
    out.cost_history.push_back(cost);
    out.iterations = it + 1;
  }
  out.x = x;
  out.cost = cost;
  return out;
}

}  // namespace qoja

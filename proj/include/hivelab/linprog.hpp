#pragma once

#include <Eigen/Dense>

namespace hivelab {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  Eigen::VectorXd x;
};

// maximize c·x subject to A x <= b, x free. Dense two-phase simplex with
// Bland's rule; meant for the small systems built in this library.
LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  double tol = 1e-9);

}  // namespace hivelab

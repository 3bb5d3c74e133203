#include "hivelab/linprog.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace hivelab {

namespace {

class Tableau {
 public:
  Tableau(int rows, int cols) : T(Eigen::MatrixXd::Zero(rows + 1, cols + 1)), basis(rows, -1) {}

  int rows() const { return static_cast<int>(T.rows()) - 1; }
  int cols() const { return static_cast<int>(T.cols()) - 1; }
  double& rhs(int i) { return T(i, cols()); }
  auto objective() { return T.row(rows()); }

  void pivot(int r, int c) {
    T.row(r) /= T(r, c);
    for (int i = 0; i <= rows(); ++i) {
      if (i == r) continue;
      const double f = T(i, c);
      if (f != 0.0) T.row(i) -= f * T.row(r);
    }
    basis[r] = c;
  }

  // Bland's rule over columns with allowed[c]; returns false when unbounded.
  bool optimize(const std::vector<bool>& allowed, double tol) {
    const int max_iter = 50000;
    for (int iter = 0; iter < max_iter; ++iter) {
      int enter = -1;
      for (int c = 0; c < cols(); ++c) {
        if (allowed[c] && T(rows(), c) < -tol) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows(); ++i) {
        const double a = T(i, enter);
        if (a > tol) {
          const double ratio = T(i, cols()) / a;
          if (ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && leave >= 0 && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    return true;
  }

  Eigen::MatrixXd T;
  std::vector<int> basis;
};

}  // namespace

LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c, double tol) {
  const int m = static_cast<int>(A.rows());
  const int d = static_cast<int>(A.cols());
  LpResult result;
  // Columns: u (d), v (d), slack (m), artificial (one per negative rhs).
  std::vector<int> art_row;
  for (int i = 0; i < m; ++i)
    if (b(i) < 0.0) art_row.push_back(i);
  const int n_art = static_cast<int>(art_row.size());
  const int slack0 = 2 * d, art0 = 2 * d + m;
  Tableau tab(m, 2 * d + m + n_art);
  int next_art = 0;
  for (int i = 0; i < m; ++i) {
    const double sgn = b(i) < 0.0 ? -1.0 : 1.0;
    tab.T.block(i, 0, 1, d) = sgn * A.row(i);
    tab.T.block(i, d, 1, d) = -sgn * A.row(i);
    tab.T(i, slack0 + i) = sgn;
    tab.rhs(i) = sgn * b(i);
    if (sgn < 0.0) {
      tab.T(i, art0 + next_art) = 1.0;
      tab.basis[i] = art0 + next_art;
      ++next_art;
    } else {
      tab.basis[i] = slack0 + i;
    }
  }
  std::vector<bool> allowed(tab.cols(), true);
  if (n_art > 0) {
    // Phase 1: maximize -Σ artificial.
    for (int k = 0; k < n_art; ++k) tab.T(m, art0 + k) = 1.0;
    for (int i = 0; i < m; ++i)
      if (tab.basis[i] >= art0) tab.T.row(m) -= tab.T.row(i);
    tab.optimize(allowed, tol);
    double scale = 1.0;
    for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(b(i)));
    if (-tab.T(m, tab.cols()) < -tol * scale) {
      result.status = LpStatus::Infeasible;
      return result;
    }
    // Drive remaining artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (tab.basis[i] < art0) continue;
      for (int c = 0; c < art0; ++c) {
        if (std::abs(tab.T(i, c)) > tol) {
          tab.pivot(i, c);
          break;
        }
      }
    }
    for (int k = 0; k < n_art; ++k) allowed[art0 + k] = false;
  }
  // Phase 2.
  tab.T.row(m).setZero();
  for (int j = 0; j < d; ++j) {
    tab.T(m, j) = -c(j);
    tab.T(m, d + j) = c(j);
  }
  for (int i = 0; i < m; ++i) {
    const double f = tab.T(m, tab.basis[i]);
    if (f != 0.0) tab.T.row(m) -= f * tab.T.row(i);
  }
  if (!tab.optimize(allowed, tol)) {
    result.status = LpStatus::Unbounded;
    return result;
  }
  result.status = LpStatus::Optimal;
  result.x = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < m; ++i) {
    const int col = tab.basis[i];
    if (col < d) result.x(col) += tab.rhs(i);
    else if (col < 2 * d) result.x(col - d) -= tab.rhs(i);
  }
  result.value = c.dot(result.x);
  return result;
}

}  // namespace hivelab

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hivelab {

struct GridPoint {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const GridPoint&, const GridPoint&) = default;
  friend GridPoint operator+(GridPoint a, GridPoint b) { return {a.x + b.x, a.y + b.y}; }
};

inline constexpr GridPoint kStepX{1, 0};
inline constexpr GridPoint kStepY{0, 1};
inline constexpr GridPoint kStepD{1, 1};

// Kind index i is the position in the σ argument (s0, s1, s2).
//   Square:         sides e_x, e_y; short diagonal along (1,1).  ("type-1")
//   HorizontalEdge: sides e_y, e_d; short diagonal horizontal.   ("type-2")
//   VerticalEdge:   sides e_x, e_d; short diagonal vertical.     ("type-3")
enum class RhombusKind : int { Square = 0, HorizontalEdge = 1, VerticalEdge = 2 };
inline constexpr std::array<RhombusKind, 3> kAllKinds{RhombusKind::Square, RhombusKind::HorizontalEdge,
                                                      RhombusKind::VerticalEdge};
inline constexpr int kSquareKindIndex = static_cast<int>(RhombusKind::Square);

inline int kind_index(RhombusKind k) { return static_cast<int>(k); }
RhombusKind kind_from_index(int i);
std::string kind_name(RhombusKind k);

struct Rhombus {
  RhombusKind kind = RhombusKind::Square;
  GridPoint anchor;
  // Cyclic order: acute, obtuse, acute, obtuse.
  std::array<GridPoint, 4> vertices;
};

// Unit rhombus of the given kind anchored at v (no wrapping).
Rhombus make_rhombus(RhombusKind kind, GridPoint v);

class TriangleGrid {
 public:
  explicit TriangleGrid(int n);
  int n() const { return n_; }
  bool contains(GridPoint p) const { return 0 <= p.x && p.x <= p.y && p.y <= n_; }
  // Index of p in row-by-row order (y major, then x).
  std::size_t index(GridPoint p) const;
  std::size_t size() const;
  GridPoint point(std::size_t idx) const;
  std::vector<GridPoint> points() const;
  // On one of the three sides x = 0, y = n, x = y.
  bool on_boundary(GridPoint p) const { return p.x == 0 || p.y == n_ || p.x == p.y; }

 private:
  int n_;
};

class TorusGrid {
 public:
  explicit TorusGrid(int n);
  int n() const { return n_; }
  GridPoint wrap(GridPoint p) const;
  std::size_t index(GridPoint p) const;  // after wrapping
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }

 private:
  int n_;
};

// Real values on T_n.
class TriangleField {
 public:
  TriangleField() : grid_(0), values_(1, 0.0) {}
  explicit TriangleField(int n, double fill = 0.0);
  TriangleField(int n, std::vector<double> values);

  int n() const { return grid_.n(); }
  const TriangleGrid& grid() const { return grid_; }
  double operator()(GridPoint p) const;  // throws DomainError outside T_n
  double& at(GridPoint p);
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double max_abs() const;

 private:
  TriangleGrid grid_;
  std::vector<double> values_;
};

// Real values on the torus, indexed y * n + x.
class TorusField {
 public:
  TorusField(int n, std::vector<double> values);
  int n() const { return grid_.n(); }
  double operator()(GridPoint p) const { return values_[grid_.index(p)]; }
  const std::vector<double>& values() const { return values_; }

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

// Every unit rhombus of `kind` inside the grid, ordered by anchor (x, then y).
std::vector<Rhombus> enumerate_rhombi(const TriangleGrid& grid, RhombusKind kind);
// Torus version: n^2 rhombi per kind; vertices are left unwrapped.
std::vector<Rhombus> enumerate_rhombi(const TorusGrid& grid, RhombusKind kind);

// acute + acute - obtuse - obtuse; <= 0 means locally concave.
double rhombus_second_difference(const TriangleField& f, const Rhombus& e);
double rhombus_second_difference(const TorusField& f, const Rhombus& e);

// First-order step difference (A_d f)(v) = f(v + d) - f(v).
double step_difference(const TriangleField& f, GridPoint v, GridPoint d);

struct RhombusViolation {
  Rhombus rhombus;
  double value = 0.0;
};

struct ConcavityReport {
  bool concave = true;
  std::vector<RhombusViolation> violations;
};

// tol < 0 selects the default 1e-12 * max|f|.
ConcavityReport is_rhombus_concave(const TriangleField& f, double tol = -1.0);

// ---- dyadic partition of T = {0 <= x <= y <= 1} ----

enum class CellShape { Triangle, Square };

// Level-a cell with integer corner (X, Y) in units of 2^-a.
//   Triangle: vertices (X,Y), (X,Y+1), (X+1,Y+1); always X == Y.
//             Closed, minus the vertex (X,Y) unless X == 0 (that vertex
//             belongs to the previous diagonal triangle).
//   Square:   [X, X+1) x (Y, Y+1]; always Y > X.
struct DyadicCell {
  CellShape shape = CellShape::Triangle;
  int level = 0;
  std::int64_t X = 0;
  std::int64_t Y = 0;

  double area() const;
  // Area numerator in units of 4^-level / 2: triangle 1, square 2.
  std::int64_t area_halves() const { return shape == CellShape::Triangle ? 1 : 2; }
  // Exact membership of the rational point (px/den, py/den).
  bool contains(std::int64_t px, std::int64_t py, std::int64_t den) const;
  std::vector<DyadicCell> children() const;
  DyadicCell parent() const;
  std::string describe() const;
  friend bool operator==(const DyadicCell&, const DyadicCell&) = default;
};

std::vector<DyadicCell> dyadic_partition(int a);

// Cell of level a containing the point p / n of T (p in T_n).
DyadicCell locate_cell(int a, GridPoint p, int n);

// Position of `cell` in dyadic_partition(cell.level).
std::size_t cell_position(const DyadicCell& cell);

// Σ over rhombi of `kind` anchored in n·κ of Δ, divided by n²|κ|.
double cell_hessian_mass(const TriangleField& h, const DyadicCell& cell, RhombusKind kind);

struct CellMasses {
  int level = 0;
  std::vector<DyadicCell> cells;                    // dyadic_partition(level)
  std::vector<std::array<double, 3>> mass;          // per cell, per kind
  std::vector<std::array<int, 3>> rhombus_count;    // per cell, per kind
};

// All cell masses at level a in one pass over the rhombi.
CellMasses all_cell_masses(const TriangleField& h, int a);

}  // namespace hivelab

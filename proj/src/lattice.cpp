#include "hivelab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hivelab/errors.hpp"

namespace hivelab {

RhombusKind kind_from_index(int i) {
  if (i < 0 || i > 2) throw DomainError("rhombus kind index must be 0, 1 or 2");
  return static_cast<RhombusKind>(i);
}

std::string kind_name(RhombusKind k) {
  switch (k) {
    case RhombusKind::Square: return "square";
    case RhombusKind::HorizontalEdge: return "horizontal";
    case RhombusKind::VerticalEdge: return "vertical";
  }
  return "?";
}

Rhombus make_rhombus(RhombusKind kind, GridPoint v) {
  Rhombus r;
  r.kind = kind;
  r.anchor = v;
  switch (kind) {
    case RhombusKind::Square:
      r.vertices = {v + kStepX, v + kStepD, v + kStepY, v};
      break;
    case RhombusKind::HorizontalEdge:
      r.vertices = {v, v + kStepY, v + kStepY + kStepD, v + kStepD};
      break;
    case RhombusKind::VerticalEdge:
      r.vertices = {v, v + kStepX, v + kStepX + kStepD, v + kStepD};
      break;
  }
  return r;
}

TriangleGrid::TriangleGrid(int n) : n_(n) {
  if (n < 0) throw DomainError("TriangleGrid: n must be >= 0");
}

std::size_t TriangleGrid::index(GridPoint p) const {
  if (!contains(p)) throw DomainError("TriangleGrid: point outside T_n");
  return static_cast<std::size_t>(p.y) * (p.y + 1) / 2 + p.x;
}

std::size_t TriangleGrid::size() const { return static_cast<std::size_t>(n_ + 1) * (n_ + 2) / 2; }

GridPoint TriangleGrid::point(std::size_t idx) const {
  int y = static_cast<int>((std::sqrt(8.0 * idx + 1.0) - 1.0) / 2.0);
  while (static_cast<std::size_t>(y) * (y + 1) / 2 > idx) --y;
  while (static_cast<std::size_t>(y + 1) * (y + 2) / 2 <= idx) ++y;
  return {static_cast<int>(idx - static_cast<std::size_t>(y) * (y + 1) / 2), y};
}

std::vector<GridPoint> TriangleGrid::points() const {
  std::vector<GridPoint> out;
  out.reserve(size());
  for (int y = 0; y <= n_; ++y)
    for (int x = 0; x <= y; ++x) out.push_back({x, y});
  return out;
}

TorusGrid::TorusGrid(int n) : n_(n) {
  if (n < 1) throw DomainError("TorusGrid: n must be >= 1");
}

GridPoint TorusGrid::wrap(GridPoint p) const {
  auto m = [this](int v) { return ((v % n_) + n_) % n_; };
  return {m(p.x), m(p.y)};
}

std::size_t TorusGrid::index(GridPoint p) const {
  const GridPoint w = wrap(p);
  return static_cast<std::size_t>(w.y) * n_ + w.x;
}

TriangleField::TriangleField(int n, double fill) : grid_(n), values_(grid_.size(), fill) {}

TriangleField::TriangleField(int n, std::vector<double> values) : grid_(n), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw DomainError("TriangleField: value count does not match T_n");
}

double TriangleField::operator()(GridPoint p) const { return values_[grid_.index(p)]; }

double& TriangleField::at(GridPoint p) { return values_[grid_.index(p)]; }

double TriangleField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

TorusField::TorusField(int n, std::vector<double> values) : grid_(n), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw DomainError("TorusField: value count must be n^2");
}

std::vector<Rhombus> enumerate_rhombi(const TriangleGrid& grid, RhombusKind kind) {
  std::vector<Rhombus> out;
  const int n = grid.n();
  for (int x = 0; x <= n; ++x) {
    for (int y = x; y <= n; ++y) {
      Rhombus r = make_rhombus(kind, {x, y});
      if (std::all_of(r.vertices.begin(), r.vertices.end(), [&](GridPoint p) { return grid.contains(p); }))
        out.push_back(r);
    }
  }
  return out;
}

std::vector<Rhombus> enumerate_rhombi(const TorusGrid& grid, RhombusKind kind) {
  std::vector<Rhombus> out;
  out.reserve(grid.size());
  for (int x = 0; x < grid.n(); ++x)
    for (int y = 0; y < grid.n(); ++y) out.push_back(make_rhombus(kind, {x, y}));
  return out;
}

namespace {

template <class Field>
double second_difference(const Field& f, const Rhombus& e) {
  return f(e.vertices[0]) + f(e.vertices[2]) - f(e.vertices[1]) - f(e.vertices[3]);
}

}  // namespace

double rhombus_second_difference(const TriangleField& f, const Rhombus& e) { return second_difference(f, e); }

double rhombus_second_difference(const TorusField& f, const Rhombus& e) { return second_difference(f, e); }

double step_difference(const TriangleField& f, GridPoint v, GridPoint d) { return f(v + d) - f(v); }

ConcavityReport is_rhombus_concave(const TriangleField& f, double tol) {
  if (tol < 0.0) tol = 1e-12 * std::max(1.0, f.max_abs());
  ConcavityReport report;
  for (RhombusKind kind : kAllKinds) {
    for (const Rhombus& e : enumerate_rhombi(f.grid(), kind)) {
      const double d = rhombus_second_difference(f, e);
      if (d > tol) report.violations.push_back({e, d});
    }
  }
  report.concave = report.violations.empty();
  return report;
}

// ---- dyadic cells ----

double DyadicCell::area() const {
  return std::ldexp(shape == CellShape::Triangle ? 0.5 : 1.0, -2 * level);
}

bool DyadicCell::contains(std::int64_t px, std::int64_t py, std::int64_t den) const {
  // Compare px/den against X/2^level etc. by cross-multiplying.
  const std::int64_t scale = std::int64_t{1} << level;
  const std::int64_t P = px * scale, Q = py * scale;
  const std::int64_t x0 = X * den, x1 = (X + 1) * den, y0 = Y * den, y1 = (Y + 1) * den;
  if (shape == CellShape::Square) return x0 <= P && P < x1 && y0 < Q && Q <= y1;
  if (!(x0 <= P && Q <= y1 && (Q - y0) >= (P - x0))) return false;
  if (X != 0 && P == x0 && Q == y0) return false;
  return true;
}

std::vector<DyadicCell> DyadicCell::children() const {
  const int l = level + 1;
  if (shape == CellShape::Triangle) {
    return {DyadicCell{CellShape::Triangle, l, 2 * X, 2 * Y},
            DyadicCell{CellShape::Square, l, 2 * X, 2 * Y + 1},
            DyadicCell{CellShape::Triangle, l, 2 * X + 1, 2 * Y + 1}};
  }
  return {DyadicCell{CellShape::Square, l, 2 * X, 2 * Y}, DyadicCell{CellShape::Square, l, 2 * X + 1, 2 * Y},
          DyadicCell{CellShape::Square, l, 2 * X, 2 * Y + 1},
          DyadicCell{CellShape::Square, l, 2 * X + 1, 2 * Y + 1}};
}

DyadicCell DyadicCell::parent() const {
  if (level == 0) throw DomainError("DyadicCell: the root has no parent");
  const std::int64_t PX = X / 2, PY = Y / 2;
  return DyadicCell{PX == PY ? CellShape::Triangle : CellShape::Square, level - 1, PX, PY};
}

std::string DyadicCell::describe() const {
  std::ostringstream os;
  os << (shape == CellShape::Triangle ? "triangle" : "square") << "(level=" << level << ", X=" << X
     << ", Y=" << Y << ")";
  return os.str();
}

std::vector<DyadicCell> dyadic_partition(int a) {
  if (a < 0) throw DomainError("dyadic_partition: level must be >= 0");
  if (a > 20) throw DomainError("dyadic_partition: level too large");
  // Build by recursive refinement, then order like T_{2^a - 1} points (Y major).
  std::vector<DyadicCell> cells{DyadicCell{CellShape::Triangle, 0, 0, 0}};
  for (int l = 0; l < a; ++l) {
    std::vector<DyadicCell> next;
    next.reserve(cells.size() * 4);
    for (const auto& c : cells)
      for (const auto& ch : c.children()) next.push_back(ch);
    cells.swap(next);
  }
  std::sort(cells.begin(), cells.end(),
            [](const DyadicCell& p, const DyadicCell& q) { return std::pair(p.Y, p.X) < std::pair(q.Y, q.X); });
  return cells;
}

std::size_t cell_position(const DyadicCell& cell) {
  return static_cast<std::size_t>(cell.Y) * (cell.Y + 1) / 2 + static_cast<std::size_t>(cell.X);
}

DyadicCell locate_cell(int a, GridPoint p, int n) {
  if (!TriangleGrid(n).contains(p)) throw DomainError("locate_cell: point outside T_n");
  const std::int64_t scale = std::int64_t{1} << a;
  const std::int64_t fx = (static_cast<std::int64_t>(p.x) * scale) / n;
  const std::int64_t fy = (static_cast<std::int64_t>(p.y) * scale) / n;
  for (std::int64_t Y = fy - 1; Y <= fy; ++Y) {
    for (std::int64_t X = fx - 1; X <= fx; ++X) {
      if (X < 0 || Y < X || Y >= scale) continue;
      DyadicCell c{X == Y ? CellShape::Triangle : CellShape::Square, a, X, Y};
      if (c.contains(p.x, p.y, n)) return c;
    }
  }
  throw NumericError("locate_cell: no cell contains the point");
}

CellMasses all_cell_masses(const TriangleField& h, int a) {
  CellMasses out;
  out.level = a;
  out.cells = dyadic_partition(a);
  out.mass.assign(out.cells.size(), {0.0, 0.0, 0.0});
  out.rhombus_count.assign(out.cells.size(), {0, 0, 0});
  const int n = h.n();
  for (RhombusKind kind : kAllKinds) {
    const int i = kind_index(kind);
    for (const Rhombus& e : enumerate_rhombi(h.grid(), kind)) {
      const std::size_t c = cell_position(locate_cell(a, e.anchor, n));
      out.mass[c][i] += rhombus_second_difference(h, e);
      out.rhombus_count[c][i] += 1;
    }
  }
  const double n2 = static_cast<double>(n) * n;
  for (std::size_t c = 0; c < out.cells.size(); ++c)
    for (int i = 0; i < 3; ++i) out.mass[c][i] /= n2 * out.cells[c].area();
  return out;
}

double cell_hessian_mass(const TriangleField& h, const DyadicCell& cell, RhombusKind kind) {
  double sum = 0.0;
  int count = 0;
  for (const Rhombus& e : enumerate_rhombi(h.grid(), kind)) {
    if (!cell.contains(e.anchor.x, e.anchor.y, h.n())) continue;
    sum += rhombus_second_difference(h, e);
    ++count;
  }
  if (count == 0)
    throw DegenerateCellError("cell_hessian_mass: " + cell.describe() + " holds no " + kind_name(kind) +
                              " rhombus at n=" + std::to_string(h.n()));
  return sum / (static_cast<double>(h.n()) * h.n() * cell.area());
}

}  // namespace hivelab

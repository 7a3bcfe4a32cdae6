#pragma once

#include "cutagg/grid.hpp"

#include <functional>
#include <vector>

namespace cutagg {

/// Time-dependent level set; psi < 0 is species A, psi > 0 species B.
class LevelSetField
{
public:
  using Fn = std::function<double(const Point &, double)>;

  LevelSetField(int dim, Fn fn);

  int dim() const { return dim_; }
  double operator()(const Point &x, double t) const { return fn_(x, t); }
  double evaluate(const Point &x, double t) const { return fn_(x, t); }

private:
  int dim_;
  Fn fn_;
};

struct RigidMotion
{
  /// Angular velocity in rad per unit time; only the z component is used in 2D.
  Point angular_velocity{0.0, 0.0, 0.0};
};

LevelSetField vanishing_sphere(int dim, double r0, double shrink_rate);
LevelSetField colliding_spheres(int dim, double radius, double speed);
LevelSetField popcorn(int dim, double rp, double amplitude = 2.0, double lambda = 0.2);
LevelSetField tilted_torus(double r_major, double r_minor, double tilt);
LevelSetField axis_plane(int dim, int axis, double offset);

/// Static sphere: psi = r^2 - |x - c|^2, so the inside is species B.
LevelSetField sphere(int dim, const Point &center, double radius);

LevelSetField rotate(LevelSetField field, const RigidMotion &motion);
LevelSetField union_of(std::vector<LevelSetField> fields);        ///< pointwise max
LevelSetField intersection_of(std::vector<LevelSetField> fields); ///< pointwise min

std::vector<Point> popcorn_centers(int dim, double r);

/// R such that R*x rotates x by `angle` about unit `axis` (right-handed).
std::array<std::array<double, 3>, 3> rotation_matrix(const Point &axis, double angle);
Point rotate_point(const std::array<std::array<double, 3>, 3> &R, const Point &x);

} // namespace cutagg

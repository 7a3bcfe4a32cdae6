#include "cutagg/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cutagg {

namespace {

double
dot(const Point &a, const Point &b)
{
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

void
require_dim(int dim)
{
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("level set dimension must be 2 or 3");
}

} // namespace

LevelSetField::LevelSetField(int dim, Fn fn) : dim_(dim), fn_(std::move(fn))
{
  require_dim(dim);
  if (!fn_)
    throw std::invalid_argument("level set function is empty");
}

LevelSetField
vanishing_sphere(int dim, double r0, double shrink_rate)
{
  if (!(r0 > 0.0))
    throw std::invalid_argument("vanishing_sphere: r0 must be positive");
  return LevelSetField(dim, [r0, shrink_rate](const Point &x, double t) {
    const double r = (1.0 - shrink_rate * t) * r0;
    return r * r - dot(x, x);
  });
}

LevelSetField
colliding_spheres(int dim, double radius, double speed)
{
  if (!(radius > 0.0) || speed < 0.0)
    throw std::invalid_argument("colliding_spheres: radius > 0 and speed >= 0 required");
  return LevelSetField(dim, [radius, speed](const Point &x, double t) {
    const double cl = -1.5 * radius + speed * t;
    const double cr = 1.5 * radius - speed * t;
    const double r2 = radius * radius;
    const double rest = x[1] * x[1] + x[2] * x[2];
    const double left = r2 - ((x[0] - cl) * (x[0] - cl) + rest);
    const double right = r2 - ((x[0] - cr) * (x[0] - cr) + rest);
    return std::max(left, right);
  });
}

std::vector<Point>
popcorn_centers(int dim, double r)
{
  using std::numbers::pi;
  const double s = r / std::sqrt(5.0);
  std::vector<Point> c;
  if (dim == 2)
  {
    for (int k = 0; k < 5; ++k)
      c.push_back({s * 2.0 * std::cos(2.0 * k * pi / 5.0), s * 2.0 * std::sin(2.0 * k * pi / 5.0), 0.0});
    return c;
  }
  require_dim(dim);
  for (int k = 0; k < 5; ++k)
    c.push_back({s * 2.0 * std::cos(2.0 * k * pi / 5.0), s * 2.0 * std::sin(2.0 * k * pi / 5.0), s});
  for (int k = 5; k < 10; ++k)
  {
    const double a = (2.0 * (k - 5) - 1.0) * pi / 5.0;
    c.push_back({s * 2.0 * std::cos(a), s * 2.0 * std::sin(a), -s});
  }
  c.push_back({0.0, 0.0, r});
  c.push_back({0.0, 0.0, -r});
  return c;
}

LevelSetField
popcorn(int dim, double rp, double amplitude, double lambda)
{
  if (!(rp > 0.0) || !(lambda > 0.0))
    throw std::invalid_argument("popcorn: rp and lambda must be positive");
  auto centers = popcorn_centers(dim, rp);
  const double inv_l2 = 1.0 / (lambda * lambda);
  return LevelSetField(dim, [=](const Point &x, double) {
    double bumps = 0.0;
    for (const Point &c : centers)
    {
      const Point d{x[0] - c[0], x[1] - c[1], x[2] - c[2]};
      bumps += amplitude * std::exp(-dot(d, d) * inv_l2);
    }
    return -(std::sqrt(dot(x, x)) - rp - bumps);
  });
}

std::array<std::array<double, 3>, 3>
rotation_matrix(const Point &axis, double angle)
{
  const double n = std::sqrt(dot(axis, axis));
  std::array<std::array<double, 3>, 3> R{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  if (n == 0.0 || angle == 0.0)
    return R;
  const double kx = axis[0] / n, ky = axis[1] / n, kz = axis[2] / n;
  const double c = std::cos(angle), s = std::sin(angle), v = 1.0 - c;
  R[0] = {c + kx * kx * v, kx * ky * v - kz * s, kx * kz * v + ky * s};
  R[1] = {ky * kx * v + kz * s, c + ky * ky * v, ky * kz * v - kx * s};
  R[2] = {kz * kx * v - ky * s, kz * ky * v + kx * s, c + kz * kz * v};
  return R;
}

Point
rotate_point(const std::array<std::array<double, 3>, 3> &R, const Point &x)
{
  return {dot(R[0], x), dot(R[1], x), dot(R[2], x)};
}

LevelSetField
tilted_torus(double r_major, double r_minor, double tilt)
{
  if (!(r_minor > 0.0) || !(r_minor < r_major))
    throw std::invalid_argument("tilted_torus: 0 < r_minor < r_major required");
  const auto R = rotation_matrix({1.0, 0.0, 0.0}, -tilt);
  return LevelSetField(3, [=](const Point &x, double) {
    const Point y = rotate_point(R, x);
    const double rho = std::sqrt(y[0] * y[0] + y[1] * y[1]) - r_major;
    return -std::sqrt(rho * rho + y[2] * y[2]) + r_minor;
  });
}

LevelSetField
axis_plane(int dim, int axis, double offset)
{
  if (axis < 0 || axis >= dim)
    throw std::invalid_argument("axis_plane: axis outside dimension");
  return LevelSetField(dim, [axis, offset](const Point &x, double) { return x[axis] - offset; });
}

LevelSetField
sphere(int dim, const Point &center, double radius)
{
  return LevelSetField(dim, [center, radius](const Point &x, double) {
    const Point d{x[0] - center[0], x[1] - center[1], x[2] - center[2]};
    return radius * radius - dot(d, d);
  });
}

LevelSetField
rotate(LevelSetField field, const RigidMotion &motion)
{
  Point w = motion.angular_velocity;
  if (field.dim() == 2)
    w = {0.0, 0.0, w[2]};
  const double rate = std::sqrt(dot(w, w));
  if (rate == 0.0)
    return field;
  return LevelSetField(field.dim(), [field, w, rate](const Point &x, double t) {
    return field(rotate_point(rotation_matrix(w, -rate * t), x), t);
  });
}

LevelSetField
union_of(std::vector<LevelSetField> fields)
{
  if (fields.empty())
    throw std::invalid_argument("union_of: no fields");
  const int dim = fields.front().dim();
  return LevelSetField(dim, [fields](const Point &x, double t) {
    double v = fields.front()(x, t);
    for (std::size_t i = 1; i < fields.size(); ++i)
      v = std::max(v, fields[i](x, t));
    return v;
  });
}

LevelSetField
intersection_of(std::vector<LevelSetField> fields)
{
  if (fields.empty())
    throw std::invalid_argument("intersection_of: no fields");
  const int dim = fields.front().dim();
  return LevelSetField(dim, [fields](const Point &x, double t) {
    double v = fields.front()(x, t);
    for (std::size_t i = 1; i < fields.size(); ++i)
      v = std::min(v, fields[i](x, t));
    return v;
  });
}

} // namespace cutagg

#include "erupt/collision/gjk.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

namespace erupt::collision
{
namespace
{
double signOf(double v)
{
  return v < 0.0 ? -1.0 : 1.0;
}
}  // namespace

Eigen::Vector3d ConvexShape::coreSupport(const Eigen::Vector3d& dir) const
{
  const Eigen::Vector3d d = pose.linear().transpose() * dir;
  Eigen::Vector3d local = Eigen::Vector3d::Zero();
  switch (shape.kind)
  {
    case ShapeKind::Sphere:
      break;
    case ShapeKind::Capsule:
      local.z() = signOf(d.z()) * shape.half_length;
      break;
    case ShapeKind::Box:
      local = Eigen::Vector3d(signOf(d.x()) * shape.half_extents.x(), signOf(d.y()) * shape.half_extents.y(),
                              signOf(d.z()) * shape.half_extents.z());
      break;
    case ShapeKind::Cylinder: {
      const double radial = std::hypot(d.x(), d.y());
      if (radial > 1e-12)
      {
        local.x() = shape.radius * d.x() / radial;
        local.y() = shape.radius * d.y() / radial;
      }
      local.z() = signOf(d.z()) * shape.half_length;
      break;
    }
  }
  return pose * local;
}

double ConvexShape::margin() const
{
  return shape.kind == ShapeKind::Sphere || shape.kind == ShapeKind::Capsule ? shape.radius : 0.0;
}

Eigen::Vector3d ConvexShape::support(const Eigen::Vector3d& dir) const
{
  Eigen::Vector3d p = coreSupport(dir);
  const double m = margin();
  if (m > 0.0)
  {
    const double n = dir.norm();
    if (n > 0.0)
      p += (m / n) * dir;
  }
  return p;
}

namespace
{
struct Vertex
{
  Eigen::Vector3d w;  // a - b
  Eigen::Vector3d a;
  Eigen::Vector3d b;
};

struct Minkowski
{
  const ConvexShape& a;
  const ConvexShape& b;
  bool with_margin;

  Vertex support(const Eigen::Vector3d& dir) const
  {
    Vertex v;
    v.a = with_margin ? a.support(dir) : a.coreSupport(dir);
    v.b = with_margin ? b.support(-dir) : b.coreSupport(-dir);
    v.w = v.a - v.b;
    return v;
  }
};

struct Simplex
{
  std::array<Vertex, 4> v;
  int size = 0;
  std::array<double, 4> bary{};

  Eigen::Vector3d point() const
  {
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (int i = 0; i < size; ++i)
      p += bary[i] * v[i].w;
    return p;
  }

  void keep(std::initializer_list<std::pair<int, double>> items)
  {
    std::array<Vertex, 4> nv;
    std::array<double, 4> nb{};
    int n = 0;
    for (auto [idx, weight] : items)
    {
      nv[n] = v[idx];
      nb[n] = weight;
      ++n;
    }
    v = nv;
    bary = nb;
    size = n;
  }
};

// Closest point to the origin on triangle (a,b,c), Ericson's region tests.
// Reduces `s` (whose first three vertices are a,b,c at indices ia,ib,ic).
void closestTriangle(Simplex& s, int ia, int ib, int ic)
{
  const Eigen::Vector3d a = s.v[ia].w, b = s.v[ib].w, c = s.v[ic].w;
  const Eigen::Vector3d ab = b - a, ac = c - a, ap = -a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0)
    return s.keep({ { ia, 1.0 } });
  const Eigen::Vector3d bp = -b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3)
    return s.keep({ { ib, 1.0 } });
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0)
  {
    const double t = d1 / (d1 - d3);
    return s.keep({ { ia, 1.0 - t }, { ib, t } });
  }
  const Eigen::Vector3d cp = -c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6)
    return s.keep({ { ic, 1.0 } });
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0)
  {
    const double t = d2 / (d2 - d6);
    return s.keep({ { ia, 1.0 - t }, { ic, t } });
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
  {
    const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return s.keep({ { ib, 1.0 - t }, { ic, t } });
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  s.keep({ { ia, 1.0 - v - w }, { ib, v }, { ic, w } });
}

void closestSegment(Simplex& s)
{
  const Eigen::Vector3d a = s.v[0].w, b = s.v[1].w;
  const Eigen::Vector3d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0)
    return s.keep({ { 0, 1.0 } });
  const double t = -a.dot(ab) / len2;
  if (t <= 0.0)
    return s.keep({ { 0, 1.0 } });
  if (t >= 1.0)
    return s.keep({ { 1, 1.0 } });
  s.keep({ { 0, 1.0 - t }, { 1, t } });
}

// True when the origin and `d` lie on opposite sides of plane (a,b,c).
bool originOutsidePlane(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                        const Eigen::Vector3d& d)
{
  const Eigen::Vector3d n = (b - a).cross(c - a);
  const double sign_origin = n.dot(-a);
  const double sign_d = n.dot(d - a);
  return sign_origin * sign_d < 0.0;
}

// Returns false when the origin is inside the tetrahedron.
bool closestTetrahedron(Simplex& s)
{
  constexpr std::array<std::array<int, 4>, 4> faces{ { { 0, 1, 2, 3 }, { 0, 2, 3, 1 }, { 0, 3, 1, 2 }, { 1, 3, 2, 0 } } };
  double best = std::numeric_limits<double>::infinity();
  Simplex best_simplex;
  bool outside = false;
  for (const auto& f : faces)
  {
    if (!originOutsidePlane(s.v[f[0]].w, s.v[f[1]].w, s.v[f[2]].w, s.v[f[3]].w))
      continue;
    outside = true;
    Simplex candidate = s;
    closestTriangle(candidate, f[0], f[1], f[2]);
    const double dist = candidate.point().squaredNorm();
    if (dist < best)
    {
      best = dist;
      best_simplex = candidate;
    }
  }
  if (!outside)
  {
    s.bary = { 0.25, 0.25, 0.25, 0.25 };
    return false;
  }
  s = best_simplex;
  return true;
}

struct GjkState
{
  bool intersecting = false;
  Simplex simplex;
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  int iterations = 0;
};

GjkState runGjk(const Minkowski& m)
{
  constexpr int max_iterations = 128;
  constexpr double rel_tol = 1e-12;
  constexpr double abs_tol = 1e-12;

  GjkState st;
  Vertex first = m.support(Eigen::Vector3d::UnitX());
  st.simplex.v[0] = first;
  st.simplex.bary[0] = 1.0;
  st.simplex.size = 1;
  st.v = first.w;
  double prev = std::numeric_limits<double>::infinity();

  for (st.iterations = 0; st.iterations < max_iterations; ++st.iterations)
  {
    const double vv = st.v.squaredNorm();
    if (vv <= abs_tol * abs_tol)
    {
      st.intersecting = true;
      return st;
    }
    Vertex w = m.support(-st.v);
    if (vv - st.v.dot(w.w) <= rel_tol * vv)
      return st;
    bool duplicate = false;
    for (int i = 0; i < st.simplex.size; ++i)
      duplicate = duplicate || (st.simplex.v[i].w - w.w).squaredNorm() <= 1e-24;
    if (duplicate)
      return st;

    const Simplex previous = st.simplex;
    const Eigen::Vector3d previous_v = st.v;
    st.simplex.v[st.simplex.size++] = w;
    switch (st.simplex.size)
    {
      case 2:
        closestSegment(st.simplex);
        break;
      case 3:
        closestTriangle(st.simplex, 0, 1, 2);
        break;
      case 4:
        if (!closestTetrahedron(st.simplex))
        {
          st.intersecting = true;
          st.v.setZero();
          return st;
        }
        break;
      default:
        break;
    }
    st.v = st.simplex.point();
    const double nv = st.v.squaredNorm();
    if (nv >= prev)
    {
      // Numerical breakdown on a near-degenerate simplex; the last reduction
      // is still the best answer available.
      st.simplex = previous;
      st.v = previous_v;
      return st;
    }
    prev = nv;
  }
  return st;
}
}  // namespace

GjkResult gjkCoreDistance(const ConvexShape& a, const ConvexShape& b)
{
  Minkowski m{ a, b, false };
  GjkState st = runGjk(m);
  GjkResult out;
  out.iterations = st.iterations;
  out.intersecting = st.intersecting;
  out.distance = st.intersecting ? 0.0 : st.v.norm();
  for (int i = 0; i < st.simplex.size; ++i)
  {
    out.point_a += st.simplex.bary[i] * st.simplex.v[i].a;
    out.point_b += st.simplex.bary[i] * st.simplex.v[i].b;
  }
  return out;
}

namespace
{
struct Face
{
  int a, b, c;
  Eigen::Vector3d normal;
  double distance;
  bool alive = true;
};

bool makeFace(const std::vector<Eigen::Vector3d>& pts, int a, int b, int c, Face& out)
{
  Eigen::Vector3d n = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
  const double len = n.norm();
  if (len < 1e-14)
    return false;
  n /= len;
  out = Face{ a, b, c, n, n.dot(pts[a]), true };
  return true;
}

Eigen::Vector3d anyPerpendicular(const Eigen::Vector3d& u)
{
  Eigen::Vector3d axis = Eigen::Vector3d::UnitX();
  if (std::abs(u.y()) < std::abs(u.x()) && std::abs(u.y()) <= std::abs(u.z()))
    axis = Eigen::Vector3d::UnitY();
  else if (std::abs(u.z()) < std::abs(u.x()))
    axis = Eigen::Vector3d::UnitZ();
  return u.cross(axis).normalized();
}
}  // namespace

double epaPenetrationDepth(const ConvexShape& a, const ConvexShape& b)
{
  Minkowski m{ a, b, true };
  GjkState st = runGjk(m);
  if (!st.intersecting)
    return 0.0;

  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < st.simplex.size; ++i)
    pts.push_back(st.simplex.v[i].w);

  constexpr double eps = 1e-10;
  // Grow the simplex to a full tetrahedron that still contains the origin.
  if (pts.size() == 1)
  {
    for (const Eigen::Vector3d& d : { Eigen::Vector3d::UnitX().eval(), (-Eigen::Vector3d::UnitX()).eval(),
                                      Eigen::Vector3d::UnitY().eval(), (-Eigen::Vector3d::UnitY()).eval(),
                                      Eigen::Vector3d::UnitZ().eval(), (-Eigen::Vector3d::UnitZ()).eval() })
    {
      Eigen::Vector3d w = m.support(d).w;
      if ((w - pts[0]).norm() > eps)
      {
        pts.push_back(w);
        break;
      }
    }
  }
  if (pts.size() == 2)
  {
    const Eigen::Vector3d u = (pts[1] - pts[0]).normalized();
    const Eigen::Vector3d p = anyPerpendicular(u);
    const Eigen::Vector3d q = u.cross(p);
    for (const Eigen::Vector3d& d : { p, (-p).eval(), q, (-q).eval() })
    {
      Eigen::Vector3d w = m.support(d).w;
      if ((w - pts[0]).cross(u).norm() > eps)
      {
        pts.push_back(w);
        break;
      }
    }
  }
  if (pts.size() == 3)
  {
    const Eigen::Vector3d n = (pts[1] - pts[0]).cross(pts[2] - pts[0]).normalized();
    Eigen::Vector3d w = m.support(n).w;
    if (std::abs((w - pts[0]).dot(n)) <= eps)
      w = m.support(-n).w;
    pts.push_back(w);
  }
  if (pts.size() < 4)
    return 0.0;

  const Eigen::Vector3d centroid = 0.25 * (pts[0] + pts[1] + pts[2] + pts[3]);
  std::vector<Face> faces;
  constexpr std::array<std::array<int, 3>, 4> tet{ { { 0, 1, 2 }, { 0, 3, 1 }, { 0, 2, 3 }, { 1, 3, 2 } } };
  for (auto f : tet)
  {
    Face face;
    if (!makeFace(pts, f[0], f[1], f[2], face))
      return 0.0;
    if (face.normal.dot(pts[f[0]] - centroid) < 0.0)
    {
      makeFace(pts, f[0], f[2], f[1], face);
    }
    faces.push_back(face);
  }

  // Directed edge -> owning face, so the neighbour across (a,b) owns (b,a).
  std::map<std::pair<int, int>, int> owner;
  auto addFace = [&](const Face& face) {
    const int idx = static_cast<int>(faces.size());
    faces.push_back(face);
    owner[{ face.a, face.b }] = idx;
    owner[{ face.b, face.c }] = idx;
    owner[{ face.c, face.a }] = idx;
  };
  {
    std::vector<Face> initial;
    initial.swap(faces);
    for (const Face& face : initial)
      addFace(face);
  }

  constexpr int max_iterations = 512;
  constexpr double tolerance = 1e-9;
  double best = 0.0;
  for (int it = 0; it < max_iterations; ++it)
  {
    int closest = -1;
    for (std::size_t i = 0; i < faces.size(); ++i)
      if (faces[i].alive && (closest < 0 || faces[i].distance < faces[closest].distance))
        closest = static_cast<int>(i);
    if (closest < 0)
      break;
    const Face f = faces[closest];
    best = std::max(0.0, f.distance);
    const Eigen::Vector3d w = m.support(f.normal).w;
    const double gap = w.dot(f.normal) - f.distance;
    if (gap < tolerance)
      return best;

    const int wi = static_cast<int>(pts.size());
    pts.push_back(w);

    // Flood the visible region outward from the closest face; its boundary
    // is the horizon, kept in the winding order of the removed faces.
    std::vector<std::pair<int, int>> horizon;
    std::vector<int> stack{ closest };
    faces[closest].alive = false;
    std::vector<int> removed;
    while (!stack.empty())
    {
      const int fi = stack.back();
      stack.pop_back();
      removed.push_back(fi);
      const Face& face = faces[fi];
      for (auto e : { std::pair{ face.a, face.b }, std::pair{ face.b, face.c }, std::pair{ face.c, face.a } })
      {
        auto nb = owner.find({ e.second, e.first });
        if (nb == owner.end())
          return best;  // polytope no longer closed
        Face& other = faces[nb->second];
        if (!other.alive)
          continue;
        if (other.normal.dot(w - pts[other.a]) > tolerance * 1e-3)
        {
          other.alive = false;
          stack.push_back(nb->second);
        }
        else
        {
          horizon.push_back(e);
        }
      }
    }
    for (int fi : removed)
    {
      const Face& face = faces[fi];
      owner.erase({ face.a, face.b });
      owner.erase({ face.b, face.c });
      owner.erase({ face.c, face.a });
    }
    for (auto [i, j] : horizon)
    {
      Face nf;
      if (!makeFace(pts, i, j, wi, nf))
        return best;
      addFace(nf);
    }
  }
  return best;
}

}  // namespace erupt::collision

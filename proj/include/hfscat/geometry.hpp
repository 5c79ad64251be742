#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace hfscat {

using Vec3 = Eigen::Vector3d;
using Vec3l = Eigen::Matrix<long double, 3, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

enum class ObstacleKind { Sphere, Ellipsoid };

/// Strictly convex analytic obstacle: ellipsoid sum(((p-c)_i/a_i)^2) = 1,
/// spheres being the equal-axes case.
struct Obstacle {
    int id = -1;
    ObstacleKind kind = ObstacleKind::Sphere;
    Vec3 center = Vec3::Zero();
    Vec3 semi_axes = Vec3::Ones();

    static Obstacle sphere(const Vec3& center, double radius);
    static Obstacle ellipsoid(const Vec3& center, const Vec3& semi_axes);

    /// Implicit function f(p) = sum(((p-c)_i/a_i)^2) - 1; negative inside.
    double implicit(const Vec3& p) const;
    Vec3 implicit_gradient(const Vec3& p) const;
    bool contains(const Vec3& p) const { return implicit(p) < 0.0; }

    double max_semi_axis() const { return semi_axes.maxCoeff(); }
    double min_semi_axis() const { return semi_axes.minCoeff(); }

    /// Exact surface area (elliptic integrals for the triaxial case).
    double surface_area() const;

    /// Nearest point of the surface to x (works from inside and outside).
    Vec3 project(const Vec3& x) const;
    /// Unsigned distance from x to the surface.
    double surface_distance(const Vec3& x) const;
};

/// Disjoint union of obstacles; the propagation domain is its complement.
struct Scene {
    std::vector<Obstacle> obstacles;
    /// Smallest pairwise surface-to-surface distance (+inf for one obstacle).
    double min_gap = std::numeric_limits<double>::infinity();

    /// Length unit for every relative tolerance: the largest semi-axis.
    double scale() const;
    bool contains(const Vec3& p) const;
    double surface_distance(const Vec3& p) const;
};

/// Checks pairwise disjointness and assembles the scene.
Scene validate_scene(std::vector<Obstacle> obstacles);

/// Point of an obstacle surface with outer normal and principal data.
/// {dir_u, dir_v, normal} is orthonormal and right-handed; dir_u carries the
/// larger curvature k1 >= k2 > 0. Near the surface the normal graph is
/// z = -(k1 u^2 + k2 v^2)/2 + O(3) along +normal.
struct SurfacePoint {
    int obstacle_id = -1;
    Vec3 position = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
    Vec3 dir_u = Vec3::UnitX();
    Vec3 dir_v = Vec3::UnitY();
    double k1 = 0.0;
    double k2 = 0.0;

    /// Curvature matrix diag(k1, k2, 0) in the principal frame, as a 3x3.
    Mat3 curvature_matrix() const;
    /// Columns dir_u, dir_v.
    Eigen::Matrix<double, 3, 2> tangent_basis() const;
    /// Columns dir_u, dir_v, normal.
    Mat3 frame() const;
};

/// Evaluates normal, principal directions and curvatures at p.
/// Throws OffSurfaceError if p is farther than 1e-9 * max semi-axis from the
/// surface. At umbilic points dir_u is the tangential projection of +x
/// (fallback +y), which keeps the frame deterministic.
SurfacePoint surface_eval(const Obstacle& obstacle, const Vec3& p);

struct GridNode {
    SurfacePoint point;
    double weight = 0.0; // area weight
};

/// Nystrom-style surface quadrature: nodes at latitude-band cell centers of
/// the ellipsoid parametrization, weights equal to the exact cell areas.
struct SurfaceGrid {
    int obstacle_id = -1;
    double k = 0.0;
    double ppw = 0.0;
    std::vector<GridNode> nodes;

    double weight_sum() const;
};

/// Builds a grid with node spacing <= (2*pi/k)/ppw. Deterministic for fixed
/// inputs. Throws ResourceError if more than node_cap nodes would be needed.
SurfaceGrid build_grid(const Obstacle& obstacle, double k, double ppw,
                       std::size_t node_cap = 1000000);

struct RayHit {
    SurfacePoint point;
    double t = 0.0;
    bool grazing = false; // |<dir, n>| < 1e-6
};

/// Nearest intersection of the ray origin + t*dir (t > 1e-9 * scene scale)
/// with any obstacle surface; empty when the ray misses.
std::optional<RayHit> ray_intersect(const Scene& scene, const Vec3& origin,
                                    const Vec3& dir);

/// Both ray parameters where the ray meets one obstacle (entry and exit),
/// in increasing order; used for transmission-point searches.
std::vector<double> obstacle_ray_roots(const Obstacle& obstacle, const Vec3& origin,
                                       const Vec3& dir);

/// All intersection points with the scene for t in (t_min, t_max).
std::vector<RayHit> ray_intersect_all(const Scene& scene, const Vec3& origin,
                                      const Vec3& dir, double t_min, double t_max);

/// Exact normal-graph chart about base: (s, t) -> base + s*dir_u + t*dir_v
/// + g(s,t)*normal with g solved from the implicit equation (g(0,0) = 0).
Vec3 chart_point(const Obstacle& obstacle, const SurfacePoint& base, double s, double t);
Vec3l chart_point_ld(const Obstacle& obstacle, const SurfacePoint& base, long double s,
                     long double t);

/// Scalar field evaluated in extended precision; argument is a chart point.
using ChartFn = std::function<long double(const Vec3l&)>;

/// Central finite differences of f in the chart about base, step
/// 1e-5 * max semi-axis. These are the independent oracles for every
/// analytic tangential derivative in the library.
Vec2 chart_gradient(const Obstacle& obstacle, const SurfacePoint& base, const ChartFn& f);
Mat2 chart_hessian(const Obstacle& obstacle, const SurfacePoint& base, const ChartFn& f);

} // namespace hfscat

#include "hfscat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hfscat/errors.hpp"

namespace hfscat {

namespace {

constexpr double kPi = std::numbers::pi;

// Deterministic sign convention for an eigenvector: the component of largest
// magnitude is made positive.
Vec3 canonical_sign(const Vec3& v) {
    int idx = 0;
    double best = std::abs(v[0]);
    for (int i = 1; i < 3; ++i) {
        if (std::abs(v[i]) > best + 1e-14) {
            best = std::abs(v[i]);
            idx = i;
        }
    }
    return v[idx] < 0.0 ? Vec3(-v) : v;
}

// 4-point Gauss-Legendre abscissae/weights on [-1, 1].
constexpr double kGL4x[4] = {-0.8611363115940526, -0.3399810435848563,
                             0.3399810435848563, 0.8611363115940526};
constexpr double kGL4w[4] = {0.3478548451374538, 0.6521451548625461,
                             0.6521451548625461, 0.3478548451374538};

} // namespace

Obstacle Obstacle::sphere(const Vec3& center, double radius) {
    Obstacle o;
    o.kind = ObstacleKind::Sphere;
    o.center = center;
    o.semi_axes = Vec3::Constant(radius);
    if (radius <= 0.0) throw ConfigError("sphere radius must be positive");
    return o;
}

Obstacle Obstacle::ellipsoid(const Vec3& center, const Vec3& semi_axes) {
    Obstacle o;
    o.kind = ObstacleKind::Ellipsoid;
    o.center = center;
    o.semi_axes = semi_axes;
    if (semi_axes.minCoeff() <= 0.0)
        throw ConfigError("ellipsoid semi-axes must be positive");
    return o;
}

double Obstacle::implicit(const Vec3& p) const {
    Vec3 y = (p - center).cwiseQuotient(semi_axes);
    return y.squaredNorm() - 1.0;
}

Vec3 Obstacle::implicit_gradient(const Vec3& p) const {
    return 2.0 * (p - center).cwiseQuotient(semi_axes.cwiseProduct(semi_axes));
}

double Obstacle::surface_area() const {
    Vec3 s = semi_axes;
    std::sort(s.data(), s.data() + 3, std::greater<double>());
    double a = s[0], b = s[1], c = s[2];
    if ((a - c) / a < 1e-12) {
        double r = (a + b + c) / 3.0;
        return 4.0 * kPi * r * r;
    }
    // Legendre's formula, a >= b >= c.
    double cosphi = c / a;
    double sinphi = std::sqrt(std::max(0.0, 1.0 - cosphi * cosphi));
    double phi = std::acos(cosphi);
    double m = a * a * (b * b - c * c) / (b * b * (a * a - c * c));
    double kmod = std::sqrt(std::clamp(m, 0.0, 1.0));
    double F = std::ellint_1(kmod, phi);
    double E = std::ellint_2(kmod, phi);
    return 2.0 * kPi * c * c +
           2.0 * kPi * a * b / sinphi * (E * sinphi * sinphi + F * cosphi * cosphi);
}

Vec3 Obstacle::project(const Vec3& x) const {
    Vec3 d = x - center;
    if (d.norm() < 1e-14 * max_semi_axis()) {
        // Center: pick the surface point on the flattest axis deterministically.
        int idx = 0;
        semi_axes.minCoeff(&idx);
        Vec3 p = center;
        p[idx] += semi_axes[idx];
        return p;
    }
    const Vec3 a2 = semi_axes.cwiseProduct(semi_axes);
    auto G = [&](double mu) {
        double g = -1.0;
        for (int i = 0; i < 3; ++i) {
            double t = a2[i] + mu;
            g += d[i] * d[i] * a2[i] / (t * t);
        }
        return g;
    };
    // G is decreasing on (-a_min^2, inf); bracket the unique root.
    double amin2 = a2.minCoeff();
    double lo, hi;
    if (implicit(x) >= 0.0) {
        lo = 0.0;
        hi = d.norm() * max_semi_axis() + a2.maxCoeff();
        while (G(hi) > 0.0) hi *= 2.0;
    } else {
        hi = 0.0;
        lo = -amin2 * (1.0 - 1e-14);
        if (G(lo) < 0.0) {
            // Degenerate interior point (orthogonal to the flattest axis):
            // nudge off the axis and retry.
            Vec3 xp = x;
            int idx = 0;
            semi_axes.minCoeff(&idx);
            xp[idx] += 1e-12 * max_semi_axis();
            return project(xp);
        }
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (G(mid) > 0.0 ? lo : hi) = mid;
    }
    double mu = 0.5 * (lo + hi);
    Vec3 p;
    for (int i = 0; i < 3; ++i) p[i] = d[i] * a2[i] / (a2[i] + mu);
    return center + p;
}

double Obstacle::surface_distance(const Vec3& x) const {
    return (x - project(x)).norm();
}

double Scene::scale() const {
    double s = 0.0;
    for (const auto& o : obstacles) s = std::max(s, o.max_semi_axis());
    return s;
}

bool Scene::contains(const Vec3& p) const {
    for (const auto& o : obstacles)
        if (o.contains(p)) return true;
    return false;
}

double Scene::surface_distance(const Vec3& p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& o : obstacles) d = std::min(d, o.surface_distance(p));
    return d;
}

namespace {

// Surface gap of two disjoint convex bodies by alternating nearest-point
// projection; returns a negative value when they intersect or touch.
double pairwise_gap(const Obstacle& o1, const Obstacle& o2) {
    if (o1.kind == ObstacleKind::Sphere && o2.kind == ObstacleKind::Sphere)
        return (o1.center - o2.center).norm() - o1.semi_axes[0] - o2.semi_axes[0];
    if (o1.contains(o2.center) || o2.contains(o1.center)) return -1.0;
    double tol = 1e-13 * std::max(o1.max_semi_axis(), o2.max_semi_axis());
    Vec3 p = o1.project(o2.center);
    Vec3 q = o2.project(p);
    for (int it = 0; it < 256; ++it) {
        if (o2.contains(p) || o1.contains(q)) return -1.0;
        Vec3 pn = o1.project(q);
        Vec3 qn = o2.project(pn);
        double move = std::max((pn - p).norm(), (qn - q).norm());
        p = pn;
        q = qn;
        if (move < tol) break;
    }
    if (o2.contains(p) || o1.contains(q)) return -1.0;
    return (p - q).norm();
}

} // namespace

Scene validate_scene(std::vector<Obstacle> obstacles) {
    if (obstacles.empty()) throw EmptySceneError();
    Scene scene;
    scene.obstacles = std::move(obstacles);
    for (std::size_t i = 0; i < scene.obstacles.size(); ++i)
        scene.obstacles[i].id = static_cast<int>(i);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
        for (std::size_t j = i + 1; j < scene.obstacles.size(); ++j) {
            double g = pairwise_gap(scene.obstacles[i], scene.obstacles[j]);
            if (g <= 1e-12 * scene.scale())
                throw OverlapError("obstacles " + std::to_string(i) + " and " +
                                   std::to_string(j) + " intersect or touch");
            gap = std::min(gap, g);
        }
    }
    scene.min_gap = gap;
    return scene;
}

Mat3 SurfacePoint::curvature_matrix() const {
    return k1 * dir_u * dir_u.transpose() + k2 * dir_v * dir_v.transpose();
}

Eigen::Matrix<double, 3, 2> SurfacePoint::tangent_basis() const {
    Eigen::Matrix<double, 3, 2> t;
    t.col(0) = dir_u;
    t.col(1) = dir_v;
    return t;
}

Mat3 SurfacePoint::frame() const {
    Mat3 f;
    f.col(0) = dir_u;
    f.col(1) = dir_v;
    f.col(2) = normal;
    return f;
}

SurfacePoint surface_eval(const Obstacle& obstacle, const Vec3& p) {
    Vec3 grad = obstacle.implicit_gradient(p);
    double gnorm = grad.norm();
    double dist = std::abs(obstacle.implicit(p)) / gnorm;
    if (dist > 1e-9 * obstacle.max_semi_axis())
        throw OffSurfaceError("point is " + std::to_string(dist) +
                              " away from the obstacle surface");

    SurfacePoint sp;
    sp.obstacle_id = obstacle.id;
    sp.position = p;
    sp.normal = grad / gnorm;

    // Arbitrary orthonormal tangent pair, then diagonalize the second
    // fundamental form II_ab = <H t_a, t_b> / |grad f| (H constant for an
    // ellipsoid), which is positive definite by strict convexity.
    int least = 0;
    sp.normal.cwiseAbs().minCoeff(&least);
    Vec3 t1 = sp.normal.cross(Vec3::Unit(least)).normalized();
    Vec3 t2 = sp.normal.cross(t1);
    Vec3 hdiag = 2.0 * obstacle.semi_axes.cwiseProduct(obstacle.semi_axes).cwiseInverse();
    Mat2 form;
    form(0, 0) = hdiag.dot(t1.cwiseProduct(t1)) / gnorm;
    form(1, 1) = hdiag.dot(t2.cwiseProduct(t2)) / gnorm;
    form(0, 1) = form(1, 0) = hdiag.dot(t1.cwiseProduct(t2)) / gnorm;
    Eigen::SelfAdjointEigenSolver<Mat2> eig(form);
    sp.k2 = eig.eigenvalues()[0];
    sp.k1 = eig.eigenvalues()[1];

    if (std::abs(sp.k1 - sp.k2) < 1e-9 * sp.k1) {
        // Umbilic: project +x on the tangent plane, fall back to +y.
        Vec3 ref = Vec3::UnitX();
        Vec3 proj = ref - ref.dot(sp.normal) * sp.normal;
        if (proj.norm() < 1e-8) {
            ref = Vec3::UnitY();
            proj = ref - ref.dot(sp.normal) * sp.normal;
        }
        sp.dir_u = proj.normalized();
        double kmean = 0.5 * (sp.k1 + sp.k2);
        sp.k1 = sp.k2 = kmean;
    } else {
        Vec2 e1 = eig.eigenvectors().col(1);
        sp.dir_u = canonical_sign(e1[0] * t1 + e1[1] * t2).normalized();
    }
    sp.dir_v = sp.normal.cross(sp.dir_u);
    return sp;
}

double SurfaceGrid::weight_sum() const {
    double s = 0.0;
    for (const auto& n : nodes) s += n.weight;
    return s;
}

namespace {

Vec3 ellipsoid_param(const Obstacle& o, double theta, double phi) {
    double st = std::sin(theta), ct = std::cos(theta);
    return o.center + Vec3(o.semi_axes[0] * st * std::cos(phi),
                           o.semi_axes[1] * st * std::sin(phi),
                           o.semi_axes[2] * ct);
}

double param_jacobian(const Obstacle& o, double theta, double phi) {
    double a = o.semi_axes[0], b = o.semi_axes[1], c = o.semi_axes[2];
    double st = std::sin(theta), ct = std::cos(theta);
    double cp = std::cos(phi), sp = std::sin(phi);
    return st * std::sqrt(b * b * c * c * st * st * cp * cp +
                          a * a * c * c * st * st * sp * sp + a * a * b * b * ct * ct);
}

} // namespace

SurfaceGrid build_grid(const Obstacle& obstacle, double k, double ppw,
                       std::size_t node_cap) {
    if (k <= 0.0) throw ConfigError("wavenumber must be positive");
    if (ppw < 4.0) throw ConfigError("need at least 4 points per wavelength");
    double h = (2.0 * kPi / k) / ppw;
    double amax = obstacle.max_semi_axis();
    double ab = std::max(obstacle.semi_axes[0], obstacle.semi_axes[1]);
    std::size_t n_theta = static_cast<std::size_t>(std::ceil(kPi * amax / h));
    n_theta = std::max<std::size_t>(n_theta, 4);
    double dtheta = kPi / static_cast<double>(n_theta);

    auto band_count = [&](std::size_t i) {
        double theta_c = (static_cast<double>(i) + 0.5) * dtheta;
        auto n = static_cast<std::size_t>(std::ceil(2.0 * kPi * ab * std::sin(theta_c) / h));
        return std::max<std::size_t>(n, 6);
    };

    std::size_t total = 0;
    for (std::size_t i = 0; i < n_theta; ++i) total += band_count(i);
    if (total > node_cap)
        throw ResourceError("grid would need " + std::to_string(total) +
                            " nodes, cap is " + std::to_string(node_cap));

    SurfaceGrid grid;
    grid.obstacle_id = obstacle.id;
    grid.k = k;
    grid.ppw = ppw;
    grid.nodes.reserve(total);
    for (std::size_t i = 0; i < n_theta; ++i) {
        double theta_lo = static_cast<double>(i) * dtheta;
        double theta_c = theta_lo + 0.5 * dtheta;
        std::size_t n_phi = band_count(i);
        double dphi = 2.0 * kPi / static_cast<double>(n_phi);
        for (std::size_t j = 0; j < n_phi; ++j) {
            double phi_lo = static_cast<double>(j) * dphi;
            double phi_c = phi_lo + 0.5 * dphi;
            // Exact cell area by 4x4 Gauss-Legendre on the parameter cell.
            double area = 0.0;
            for (int qi = 0; qi < 4; ++qi) {
                double th = theta_lo + 0.5 * dtheta * (1.0 + kGL4x[qi]);
                for (int qj = 0; qj < 4; ++qj) {
                    double ph = phi_lo + 0.5 * dphi * (1.0 + kGL4x[qj]);
                    area += kGL4w[qi] * kGL4w[qj] * param_jacobian(obstacle, th, ph);
                }
            }
            area *= 0.25 * dtheta * dphi;
            GridNode node;
            node.point = surface_eval(obstacle, ellipsoid_param(obstacle, theta_c, phi_c));
            node.weight = area;
            grid.nodes.push_back(std::move(node));
        }
    }
    return grid;
}

std::vector<double> obstacle_ray_roots(const Obstacle& obstacle, const Vec3& origin,
                                       const Vec3& dir) {
    Vec3l y0, d;
    for (int i = 0; i < 3; ++i) {
        y0[i] = (static_cast<long double>(origin[i]) - obstacle.center[i]) /
                obstacle.semi_axes[i];
        d[i] = static_cast<long double>(dir[i]) / obstacle.semi_axes[i];
    }
    long double A = y0.dot(y0) - 1.0L; // reuse names: quadratic a t^2 + b t + c
    long double b = 2.0L * y0.dot(d);
    long double a = d.dot(d);
    long double disc = b * b - 4.0L * a * A;
    if (disc < 0.0L) {
        if (disc > -1e-24L * std::max(b * b, std::abs(4.0L * a * A)))
            disc = 0.0L; // clamp roundoff for grazing rays
        else
            return {};
    }
    long double sq = std::sqrt(disc);
    long double q = b >= 0.0L ? -0.5L * (b + sq) : -0.5L * (b - sq);
    std::vector<double> roots;
    if (q != 0.0L) {
        roots.push_back(static_cast<double>(q / a));
        roots.push_back(static_cast<double>(A / q));
    } else {
        roots.push_back(0.0);
        roots.push_back(static_cast<double>(-b / a));
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

std::optional<RayHit> ray_intersect(const Scene& scene, const Vec3& origin,
                                    const Vec3& dir) {
    double t_min = 1e-9 * scene.scale();
    double best = std::numeric_limits<double>::infinity();
    const Obstacle* hit_obs = nullptr;
    for (const auto& o : scene.obstacles) {
        for (double t : obstacle_ray_roots(o, origin, dir)) {
            if (t > t_min && t < best) {
                best = t;
                hit_obs = &o;
            }
        }
    }
    if (!hit_obs) return std::nullopt;
    RayHit hit;
    hit.t = best;
    hit.point = surface_eval(*hit_obs, origin + best * dir);
    hit.grazing = std::abs(dir.dot(hit.point.normal)) < 1e-6;
    return hit;
}

std::vector<RayHit> ray_intersect_all(const Scene& scene, const Vec3& origin,
                                      const Vec3& dir, double t_min, double t_max) {
    std::vector<RayHit> hits;
    for (const auto& o : scene.obstacles) {
        for (double t : obstacle_ray_roots(o, origin, dir)) {
            if (t > t_min && t < t_max) {
                RayHit hit;
                hit.t = t;
                hit.point = surface_eval(o, origin + t * dir);
                hit.grazing = std::abs(dir.dot(hit.point.normal)) < 1e-6;
                hits.push_back(std::move(hit));
            }
        }
    }
    std::sort(hits.begin(), hits.end(),
              [](const RayHit& a, const RayHit& b) { return a.t < b.t; });
    return hits;
}

Vec3l chart_point_ld(const Obstacle& obstacle, const SurfacePoint& base, long double s,
                     long double t) {
    Vec3l c, n, q;
    Vec3l inv_a2;
    for (int i = 0; i < 3; ++i) {
        c[i] = obstacle.center[i];
        n[i] = base.normal[i];
        q[i] = static_cast<long double>(base.position[i]) +
               s * static_cast<long double>(base.dir_u[i]) +
               t * static_cast<long double>(base.dir_v[i]);
        long double ai = obstacle.semi_axes[i];
        inv_a2[i] = 1.0L / (ai * ai);
    }
    Vec3l dq = q - c;
    long double A = 0.0L, B = 0.0L, C = -1.0L;
    for (int i = 0; i < 3; ++i) {
        A += n[i] * n[i] * inv_a2[i];
        B += 2.0L * dq[i] * n[i] * inv_a2[i];
        C += dq[i] * dq[i] * inv_a2[i];
    }
    // f(q + g n) = A g^2 + B g + C = 0; take the branch through g(0,0) = 0.
    // B = |grad f| > 0 on and near the surface, so the small root is stable.
    long double disc = B * B - 4.0L * A * C;
    if (disc < 0.0L)
        throw OffSurfaceError("chart step left the normal-graph neighborhood");
    long double g = -2.0L * C / (B + std::sqrt(disc));
    return q + g * n;
}

Vec3 chart_point(const Obstacle& obstacle, const SurfacePoint& base, double s, double t) {
    return chart_point_ld(obstacle, base, s, t).cast<double>();
}

Vec2 chart_gradient(const Obstacle& obstacle, const SurfacePoint& base, const ChartFn& f) {
    long double h = 1e-5L * obstacle.max_semi_axis();
    auto F = [&](long double s, long double t) {
        return f(chart_point_ld(obstacle, base, s, t));
    };
    Vec2 g;
    g[0] = static_cast<double>((F(h, 0) - F(-h, 0)) / (2.0L * h));
    g[1] = static_cast<double>((F(0, h) - F(0, -h)) / (2.0L * h));
    return g;
}

Mat2 chart_hessian(const Obstacle& obstacle, const SurfacePoint& base, const ChartFn& f) {
    long double h = 1e-5L * obstacle.max_semi_axis();
    auto F = [&](long double s, long double t) {
        return f(chart_point_ld(obstacle, base, s, t));
    };
    long double f00 = F(0, 0);
    Mat2 hess;
    hess(0, 0) = static_cast<double>((F(h, 0) - 2.0L * f00 + F(-h, 0)) / (h * h));
    hess(1, 1) = static_cast<double>((F(0, h) - 2.0L * f00 + F(0, -h)) / (h * h));
    long double mixed = (F(h, h) - F(h, -h) - F(-h, h) + F(-h, -h)) / (4.0L * h * h);
    hess(0, 1) = hess(1, 0) = static_cast<double>(mixed);
    return hess;
}

} // namespace hfscat

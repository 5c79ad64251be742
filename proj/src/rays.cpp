#include "hfscat/rays.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hfscat/curvature_maps.hpp"
#include "hfscat/errors.hpp"
#include "path_blocks.hpp"

namespace hfscat {

namespace {

constexpr double kGrazingTol = 1e-6;

const Obstacle& scene_obstacle(const Scene& scene, int id) {
    return scene.obstacles.at(static_cast<std::size_t>(id));
}

// Point of the obstacle surface in direction d from its center.
Vec3 surface_toward(const Obstacle& o, const Vec3& d) {
    Vec3 dn = d.norm() > 1e-12 ? d.normalized() : Vec3::UnitX();
    double r = 1.0 / std::sqrt(dn.cwiseQuotient(o.semi_axes).squaredNorm());
    return o.center + r * dn;
}

// Deterministic quasi-uniform direction set (golden-angle spiral).
std::vector<Vec3> direction_set(int count) {
    std::vector<Vec3> dirs;
    dirs.reserve(static_cast<std::size_t>(count));
    const double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
        double z = 1.0 - 2.0 * (i + 0.5) / count;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = ga * i;
        dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
    return dirs;
}

double phase_of(const Vec3& incident, const std::vector<SurfacePoint>& nodes,
                const Vec3& x) {
    double psi = incident.dot(nodes.front().position);
    for (std::size_t j = 0; j + 1 < nodes.size(); ++j)
        psi += (nodes[j + 1].position - nodes[j].position).norm();
    psi += (x - nodes.back().position).norm();
    return psi;
}

double max_gradient_norm(const std::vector<Vec2>& grad) {
    double r = 0.0;
    for (const auto& g : grad) r = std::max(r, g.norm());
    return r;
}

// One damped Newton descent on the stationarity system. Returns true when the
// residual drops below accept_tol.
bool newton_polish(const Scene& scene, const IncidentWave& wave,
                   const std::vector<int>& seq, std::vector<SurfacePoint>& nodes,
                   const Vec3& x, int max_iterations, double accept_tol,
                   double target_tol) {
    const std::size_t l = nodes.size();
    const double max_step = 0.8 * scene.scale();
    double res = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iterations; ++iter) {
        auto seg = detail::path_segments(nodes, x);
        auto grad = detail::tangential_gradient(wave.xi, nodes, seg);
        Eigen::VectorXd r(2 * l);
        for (std::size_t j = 0; j < l; ++j) r.segment<2>(2 * j) = grad[j];
        res = r.norm();
        if (res < target_tol) return true;

        auto diag = detail::diagonal_blocks(wave.xi, nodes, seg);
        auto off = detail::offdiagonal_blocks(nodes, seg);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * l, 2 * l);
        for (std::size_t j = 0; j < l; ++j) H.block<2, 2>(2 * j, 2 * j) = diag[j];
        for (std::size_t j = 0; j + 1 < l; ++j) {
            H.block<2, 2>(2 * (j + 1), 2 * j) = off[j];
            H.block<2, 2>(2 * j, 2 * (j + 1)) = off[j].transpose();
        }
        Eigen::VectorXd step = H.fullPivLu().solve(-r);
        if (!step.allFinite()) return res < accept_tol;
        if (step.dot(-r) <= 0.0) step = -r; // fall back to steepest descent
        double scale_cap = 1.0;
        for (std::size_t j = 0; j < l; ++j) {
            double s = step.segment<2>(2 * j).norm();
            if (s > max_step) scale_cap = std::min(scale_cap, max_step / s);
        }
        step *= scale_cap;

        bool accepted = false;
        double alpha = 1.0;
        for (int half = 0; half < 30; ++half, alpha *= 0.5) {
            std::vector<SurfacePoint> trial(l);
            bool valid = true;
            for (std::size_t j = 0; j < l; ++j) {
                const Obstacle& obs = scene_obstacle(scene, seq[j]);
                try {
                    Vec3 p = chart_point(obs, nodes[j], alpha * step[2 * j],
                                         alpha * step[2 * j + 1]);
                    trial[j] = surface_eval(obs, p);
                } catch (const OffSurfaceError&) {
                    valid = false;
                    break;
                }
            }
            if (!valid) continue;
            auto tseg = detail::path_segments(trial, x);
            auto tgrad = detail::tangential_gradient(wave.xi, trial, tseg);
            double tres = 0.0;
            for (const auto& g : tgrad) tres += g.squaredNorm();
            tres = std::sqrt(tres);
            if (tres < (1.0 - 1e-4 * alpha) * res || tres < target_tol) {
                nodes = std::move(trial);
                accepted = true;
                break;
            }
        }
        if (!accepted) break; // stagnation
    }
    auto seg = detail::path_segments(nodes, x);
    return max_gradient_norm(detail::tangential_gradient(wave.xi, nodes, seg)) < accept_tol;
}

// Gauss-Seidel relaxation: per-node 2D Newton descent of the phase, used to
// funnel crude seeds into a basin before the full Newton.
void coordinate_relax(const Scene& scene, const IncidentWave& wave,
                      const std::vector<int>& seq, std::vector<SurfacePoint>& nodes,
                      const Vec3& x, int sweeps) {
    const std::size_t l = nodes.size();
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (std::size_t j = 0; j < l; ++j) {
            const Obstacle& obs = scene_obstacle(scene, seq[j]);
            double cap = 0.6 * obs.min_semi_axis();
            for (int it = 0; it < 5; ++it) {
                auto seg = detail::path_segments(nodes, x);
                auto grad = detail::tangential_gradient(wave.xi, nodes, seg);
                if (grad[j].norm() < 1e-12) break;
                auto diag = detail::diagonal_blocks(wave.xi, nodes, seg);
                const Mat2& D = diag[j];
                Vec2 step;
                if (D.determinant() > 0.0 && D.trace() > 0.0)
                    step = -D.inverse() * grad[j];
                else
                    step = -cap * grad[j].normalized();
                if (step.norm() > cap) step *= cap / step.norm();

                auto local = [&](const SurfacePoint& sp) {
                    double f = (j == 0) ? wave.xi.dot(sp.position)
                                        : (sp.position - nodes[j - 1].position).norm();
                    Vec3 next = (j + 1 < l) ? nodes[j + 1].position : x;
                    return f + (next - sp.position).norm();
                };
                double f0 = local(nodes[j]);
                double alpha = 1.0;
                for (int half = 0; half < 8; ++half, alpha *= 0.5) {
                    try {
                        Vec3 p = chart_point(obs, nodes[j], alpha * step[0], alpha * step[1]);
                        SurfacePoint trial = surface_eval(obs, p);
                        if (local(trial) < f0) {
                            nodes[j] = trial;
                            break;
                        }
                    } catch (const OffSurfaceError&) {
                    }
                }
            }
        }
    }
}

struct Classification {
    std::vector<int> delta;
    double worst_residual = 0.0;
    bool signs_ok = true;
    bool grazing = false;
};

Classification classify(const IncidentWave& wave, const std::vector<SurfacePoint>& nodes,
                        const detail::PathSegments& seg) {
    Classification c;
    c.delta.resize(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        Vec3 in = (j == 0) ? wave.xi : seg.dirs[j - 1];
        const Vec3& out = seg.dirs[j];
        const Vec3& n = nodes[j].normal;
        double inc = in.dot(n);
        Vec3 refl = in - 2.0 * inc * n;
        double trans_res = (out - in).norm();
        double refl_res = (out - refl).norm();
        c.delta[j] = refl_res < trans_res ? 1 : 0;
        c.worst_residual = std::max(c.worst_residual, std::min(trans_res, refl_res));
        if (inc >= 0.0) c.signs_ok = false;
        if (std::abs(inc) < kGrazingTol) c.grazing = true;
    }
    return c;
}

// Builds the full RayPath record from converged nodes: classification,
// curvature recursion, amplitude determinants and the caustic flag.
std::optional<RayPath> finalize_path(const Scene& scene, const IncidentWave& wave,
                                     std::vector<SurfacePoint> nodes, const Vec3& x,
                                     double accept_tol) {
    auto seg = detail::path_segments(nodes, x);
    auto grad = detail::tangential_gradient(wave.xi, nodes, seg);
    double res = max_gradient_norm(grad);
    if (res > accept_tol) return std::nullopt;
    Classification cls = classify(wave, nodes, seg);
    if (!cls.signs_ok || cls.worst_residual > 1e-9) return std::nullopt;

    RayPath path;
    path.nodes = std::move(nodes);
    path.target = x;
    path.incident_dir = wave.xi;
    path.delta = cls.delta;
    path.seg_dirs = seg.dirs;
    path.seg_lens = seg.lens;
    path.phase = phase_of(wave.xi, path.nodes, x);
    path.residual = res;
    path.caustic = cls.grazing;
    try {
        path.P = propagate_curvature(path);
    } catch (const TangencyError&) {
        path.caustic = true;
        return path; // grazing reflection: keep the flagged path, no amplitudes
    }
    path.dets.resize(path.P.size());
    for (std::size_t j = 0; j < path.P.size(); ++j) {
        path.dets[j] =
            (Mat3::Identity() + path.seg_lens[j] * path.P[j]).determinant();
        if (std::abs(path.dets[j]) < 1e-6) path.caustic = true;
    }
    (void)scene;
    return path;
}

bool same_path(const RayPath& a, const RayPath& b, double tol) {
    if (a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t j = 0; j < a.nodes.size(); ++j) {
        if (a.nodes[j].obstacle_id != b.nodes[j].obstacle_id) return false;
        if ((a.nodes[j].position - b.nodes[j].position).norm() > tol) return false;
    }
    return true;
}

// Multi-start stationary-point search for one obstacle sequence: seeds from a
// direction set on the first obstacle plus chord-following on the rest, a few
// Gauss-Seidel sweeps, then Newton.
std::vector<RayPath> stationary_search(const Scene& scene, const IncidentWave& wave,
                                       const std::vector<int>& seq, const Vec3& x,
                                       const SolveOptions& options) {
    const std::size_t l = seq.size();
    const double scale = scene.scale();
    const double accept_tol = 1e-10 * scale;
    const double target_tol = 1e-13 * scale;
    const Obstacle& first = scene_obstacle(scene, seq[0]);

    std::vector<Vec3> first_dirs = direction_set(16 * options.multistart_level);
    first_dirs.push_back(-wave.xi);
    first_dirs.push_back(x - first.center);
    for (const auto& o : scene.obstacles)
        if (o.id != first.id) first_dirs.push_back(o.center - first.center);

    // Variations for the second node; deeper nodes follow the chord.
    std::vector<Vec3> second_dirs;
    if (l >= 2) {
        second_dirs = direction_set(6);
        second_dirs.push_back(Vec3::Zero()); // marker: face the previous node
    } else {
        second_dirs.push_back(Vec3::Zero());
    }

    std::vector<RayPath> found;
    for (const Vec3& d1 : first_dirs) {
        for (const Vec3& d2 : second_dirs) {
            std::vector<SurfacePoint> nodes(l);
            nodes[0] = surface_eval(first, surface_toward(first, d1));
            for (std::size_t j = 1; j < l; ++j) {
                const Obstacle& obs = scene_obstacle(scene, seq[j]);
                Vec3 facing = nodes[j - 1].position - obs.center;
                if (j == 1 && d2.norm() > 0.5) facing = d2;
                nodes[j] = surface_eval(obs, surface_toward(obs, facing));
            }
            coordinate_relax(scene, wave, seq, nodes, x, 4);
            if (!newton_polish(scene, wave, seq, nodes, x, options.max_iterations,
                               accept_tol, target_tol))
                continue;
            auto path = finalize_path(scene, wave, std::move(nodes), x, accept_tol);
            if (!path) continue;
            bool dup = false;
            for (const auto& p : found)
                if (same_path(p, *path, 1e-6 * scale)) {
                    dup = true;
                    break;
                }
            if (!dup) found.push_back(std::move(*path));
        }
    }
    return found;
}

void append_sequences(int n_obstacles, int length, std::vector<int>& prefix,
                      std::vector<std::vector<int>>& out, std::size_t cap) {
    if (static_cast<int>(prefix.size()) == length) {
        if (out.size() >= cap)
            throw ResourceError("alternating obstacle sequences exceed cap " +
                                std::to_string(cap));
        out.push_back(prefix);
        return;
    }
    for (int id = 0; id < n_obstacles; ++id) {
        if (!prefix.empty() && prefix.back() == id) continue;
        prefix.push_back(id);
        append_sequences(n_obstacles, length, prefix, out, cap);
        prefix.pop_back();
    }
}

std::vector<std::vector<int>> alternating_sequences(int n_obstacles, int length,
                                                    std::size_t cap) {
    std::vector<std::vector<int>> out;
    std::vector<int> prefix;
    append_sequences(n_obstacles, length, prefix, out, cap);
    return out;
}

// A physical reflected ray must reach sigma_1 from infinity and run its
// segments in free space; blocked candidates stay in the output but flagged.
bool compute_occlusion(const Scene& scene, const RayPath& path) {
    double margin = 1e-6 * scene.scale();
    if (!ray_intersect_all(scene, path.nodes.front().position, -path.incident_dir,
                           margin, std::numeric_limits<double>::infinity())
             .empty())
        return true;
    for (std::size_t j = 0; j < path.nodes.size(); ++j) {
        if (!ray_intersect_all(scene, path.nodes[j].position, path.seg_dirs[j], margin,
                               path.seg_lens[j] - margin)
                 .empty())
            return true;
    }
    return false;
}

} // namespace

std::vector<int> RayPath::obstacle_sequence() const {
    std::vector<int> seq(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) seq[j] = nodes[j].obstacle_id;
    return seq;
}

double path_phase(const IncidentWave& wave, const std::vector<Vec3>& nodes,
                  const Vec3& x) {
    double psi = wave.xi.dot(nodes.front());
    for (std::size_t j = 0; j + 1 < nodes.size(); ++j)
        psi += (nodes[j + 1] - nodes[j]).norm();
    psi += (x - nodes.back()).norm();
    return psi;
}

double path_phase(const IncidentWave& wave, const std::vector<SurfacePoint>& nodes,
                  const Vec3& x) {
    return phase_of(wave.xi, nodes, x);
}

std::vector<Vec2> path_gradient(const IncidentWave& wave,
                                const std::vector<SurfacePoint>& nodes, const Vec3& x) {
    auto seg = detail::path_segments(nodes, x);
    return detail::tangential_gradient(wave.xi, nodes, seg);
}

std::optional<RayPath> solve_path(const Scene& scene, const IncidentWave& wave,
                                  const std::vector<int>& obstacle_seq,
                                  const std::vector<int>& delta_seq, const Vec3& x,
                                  const std::optional<std::vector<Vec3>>& init,
                                  const SolveOptions& options) {
    if (obstacle_seq.empty() || obstacle_seq.size() != delta_seq.size())
        throw ConfigError("obstacle and delta sequences must be nonempty and equal-sized");
    for (std::size_t j = 0; j + 1 < obstacle_seq.size(); ++j)
        if (obstacle_seq[j] == obstacle_seq[j + 1])
            throw ConfigError("consecutive path nodes must lie on different obstacles");

    if (init) {
        const double scale = scene.scale();
        std::vector<SurfacePoint> nodes(obstacle_seq.size());
        for (std::size_t j = 0; j < obstacle_seq.size(); ++j) {
            const Obstacle& obs = scene_obstacle(scene, obstacle_seq[j]);
            nodes[j] = surface_eval(obs, obs.project((*init)[j]));
        }
        coordinate_relax(scene, wave, obstacle_seq, nodes, x, 4);
        if (!newton_polish(scene, wave, obstacle_seq, nodes, x, options.max_iterations,
                           1e-10 * scale, 1e-13 * scale))
            return std::nullopt;
        auto path = finalize_path(scene, wave, std::move(nodes), x, 1e-10 * scale);
        if (path && path->delta == delta_seq) return path;
        return std::nullopt;
    }

    for (auto& path : stationary_search(scene, wave, obstacle_seq, x, options))
        if (path.delta == delta_seq) return path;
    return std::nullopt;
}

std::vector<RayPath> stationary_points(const Scene& scene, const IncidentWave& wave,
                                       const Vec3& x, int length,
                                       const SolveOptions& options) {
    std::vector<RayPath> out;
    if (length < 1) return out;
    auto seqs = alternating_sequences(static_cast<int>(scene.obstacles.size()), length,
                                      options.sequence_cap);
    for (const auto& seq : seqs)
        for (auto& p : stationary_search(scene, wave, seq, x, options))
            out.push_back(std::move(p));
    return out;
}

std::vector<RayPath> enumerate_paths(const Scene& scene, const IncidentWave& wave,
                                     const Vec3& x, int max_bounces,
                                     const SolveOptions& options) {
    std::vector<RayPath> out;
    for (int l = 1; l <= max_bounces; ++l) {
        for (auto& p : stationary_points(scene, wave, x, l, options)) {
            bool all_reflections =
                std::all_of(p.delta.begin(), p.delta.end(), [](int d) { return d == 1; });
            if (!all_reflections) continue;
            p.occluded = compute_occlusion(scene, p);
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::vector<Mat3> propagate_curvature(const RayPath& path) {
    std::vector<Mat3> P(path.nodes.size());
    for (std::size_t j = 0; j < path.nodes.size(); ++j) {
        const SurfacePoint& sp = path.nodes[j];
        Vec3 incoming = (j == 0) ? path.incident_dir : path.seg_dirs[j - 1];
        Mat3 carried = (j == 0) ? Mat3::Zero()
                                : shift_map(P[j - 1], path.seg_lens[j - 1]);
        if (path.delta[j] == 1)
            P[j] = reflect_map(carried, sp.curvature_matrix(), sp.normal, incoming);
        else
            P[j] = carried;
    }
    return P;
}

GoaField goa_field(const Scene& scene, const IncidentWave& wave, const Vec3& x,
                   BoundaryCondition bc, int max_bounces, const SolveOptions& options) {
    for (const auto& o : scene.obstacles)
        if (o.contains(x)) throw ConfigError("field target lies inside an obstacle");

    GoaField field;
    field.shadowed = ray_intersect(scene, x, -wave.xi).has_value();
    if (!field.shadowed) field.value = wave.field(x);

    for (auto& path : enumerate_paths(scene, wave, x, max_bounces, options)) {
        if (path.occluded) continue;
        if (path.caustic) {
            field.caustic = true;
            throw CausticError("ray path near the caustic set at target");
        }
        double amp2 = 1.0;
        for (double d : path.dets) amp2 *= d;
        int l = path.bounces();
        double sign = (bc == BoundaryCondition::Dirichlet && (l % 2 == 1)) ? -1.0 : 1.0;
        Complex term = sign * std::polar(1.0, -wave.k * path.phase) / std::sqrt(amp2);
        field.value += term;
        field.contributions.emplace_back(std::move(path), term);
    }
    return field;
}

std::vector<RayPath> insert_transmission(const Scene& scene, const IncidentWave& wave,
                                         const RayPath& path) {
    const double scale = scene.scale();
    const double margin = 1e-6 * scale;
    const double accept_tol = 1e-9 * scale;
    std::vector<RayPath> out;

    auto try_push = [&](std::vector<SurfacePoint> nodes) {
        auto p = finalize_path(scene, wave, std::move(nodes), path.target, accept_tol);
        if (p) out.push_back(std::move(*p));
    };

    // Backward-ray prepend: sigma = sigma_1 - t xi with <xi, n(sigma)> < 0.
    for (const auto& hit :
         ray_intersect_all(scene, path.nodes.front().position, -wave.xi, margin,
                           std::numeric_limits<double>::infinity())) {
        if (wave.xi.dot(hit.point.normal) >= -1e-9) continue;
        if (hit.point.obstacle_id == path.nodes.front().obstacle_id) continue;
        std::vector<SurfacePoint> nodes;
        nodes.reserve(path.nodes.size() + 1);
        nodes.push_back(hit.point);
        nodes.insert(nodes.end(), path.nodes.begin(), path.nodes.end());
        try_push(std::move(nodes));
    }

    // Entry points strictly inside a segment (the segment to x included).
    for (std::size_t j = 0; j < path.nodes.size(); ++j) {
        for (const auto& hit :
             ray_intersect_all(scene, path.nodes[j].position, path.seg_dirs[j], margin,
                               path.seg_lens[j] - margin)) {
            if (path.seg_dirs[j].dot(hit.point.normal) >= -1e-9) continue;
            if (hit.point.obstacle_id == path.nodes[j].obstacle_id) continue;
            if (j + 1 < path.nodes.size() &&
                hit.point.obstacle_id == path.nodes[j + 1].obstacle_id)
                continue;
            std::vector<SurfacePoint> nodes;
            nodes.reserve(path.nodes.size() + 1);
            nodes.insert(nodes.end(), path.nodes.begin(),
                         path.nodes.begin() + static_cast<long>(j) + 1);
            nodes.push_back(hit.point);
            nodes.insert(nodes.end(), path.nodes.begin() + static_cast<long>(j) + 1,
                         path.nodes.end());
            try_push(std::move(nodes));
        }
    }
    return out;
}

} // namespace hfscat

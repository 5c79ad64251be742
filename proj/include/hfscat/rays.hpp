#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "hfscat/geometry.hpp"
#include "hfscat/wave.hpp"

namespace hfscat {

/// Broken ray sigma_1 .. sigma_l ending at the target x (sigma_{l+1} = x).
/// seg_dirs[j] is the unit direction leaving node j, seg_lens[j] its length;
/// delta[j] is 1 at a reflection node, 0 at a transmission node.
struct RayPath {
    std::vector<SurfacePoint> nodes;
    Vec3 target = Vec3::Zero();
    Vec3 incident_dir = Vec3::UnitZ();
    std::vector<int> delta;
    std::vector<Vec3> seg_dirs;
    std::vector<double> seg_lens;
    double phase = 0.0;
    std::vector<Mat3> P;       // wavefront curvature matrices P_1..P_l
    std::vector<double> dets;  // det(I + lambda_j P_j)
    double residual = 0.0;     // max tangential-gradient norm at the solution
    bool caustic = false;      // near-degenerate amplitude or grazing node
    bool occluded = false;     // some segment (or the incident ray) is blocked

    int bounces() const { return static_cast<int>(nodes.size()); }
    std::vector<int> obstacle_sequence() const;
    /// Incoming unit direction at node j (the wave direction for j = 0).
    Vec3 incoming_dir(int j) const { return j == 0 ? incident_dir : seg_dirs[j - 1]; }
};

/// Path phase <xi,sigma_1> + sum |sigma_{j+1}-sigma_j| + |x-sigma_l|.
double path_phase(const IncidentWave& wave, const std::vector<Vec3>& nodes, const Vec3& x);
double path_phase(const IncidentWave& wave, const std::vector<SurfacePoint>& nodes,
                  const Vec3& x);

/// Tangential gradient of the phase per node, in each node's {dir_u, dir_v}
/// frame; identically zero exactly at stationary configurations.
std::vector<Vec2> path_gradient(const IncidentWave& wave,
                                const std::vector<SurfacePoint>& nodes, const Vec3& x);

struct SolveOptions {
    int max_iterations = 100;
    int multistart_level = 1;       // doubling the level doubles seed density
    std::size_t sequence_cap = 20000;
};

/// Damped Newton on the tangential stationarity system for a fixed obstacle
/// sequence. Returns a path only when the iteration converges to residual
/// below 1e-10 * scene scale, the node classification matches delta_seq and
/// the illumination signs hold; empty otherwise.
std::optional<RayPath> solve_path(const Scene& scene, const IncidentWave& wave,
                                  const std::vector<int>& obstacle_seq,
                                  const std::vector<int>& delta_seq, const Vec3& x,
                                  const std::optional<std::vector<Vec3>>& init = {},
                                  const SolveOptions& options = {});

/// All stationary configurations of length l with strict illumination signs
/// (reflection and transmission nodes alike), deduplicated; multi-start over
/// every alternating obstacle sequence.
std::vector<RayPath> stationary_points(const Scene& scene, const IncidentWave& wave,
                                       const Vec3& x, int length,
                                       const SolveOptions& options = {});

/// The reflected-ray sets R_l(x), l <= max_bounces: all-reflection stationary
/// paths with strict signs. Occluded candidates are returned flagged, not
/// dropped; caustic flags mark near-grazing or near-focal paths.
std::vector<RayPath> enumerate_paths(const Scene& scene, const IncidentWave& wave,
                                     const Vec3& x, int max_bounces,
                                     const SolveOptions& options = {});

/// Curvature recursion along a solved path:
///   P_1 = delta_1 * reflect(0, B_1, n_1, xi),
///   P_j = shift(P_{j-1}, lambda_{j-1}) then reflect at delta_j = 1 nodes.
std::vector<Mat3> propagate_curvature(const RayPath& path);

struct GoaField {
    Complex value{0.0, 0.0};
    std::vector<std::pair<RayPath, Complex>> contributions;
    bool shadowed = false;
    bool caustic = false;
};

/// Geometrical-optics field: the incident wave when the backward ray x - t*xi
/// misses every obstacle, plus per ray path
///   (-1)^l (Dirichlet) or (+1)^l (Neumann) e^{-ik psi} / prod sqrt(det(I+lambda_j P_j)).
/// Throws CausticError when a contributing path is flagged near the caustic set.
GoaField goa_field(const Scene& scene, const IncidentWave& wave, const Vec3& x,
                   BoundaryCondition bc, int max_bounces,
                   const SolveOptions& options = {});

/// Lemma-of-transmission constructions: prepends the backward-ray entry point
/// and inserts entry points found strictly inside path segments (the final
/// segment to x included). Every returned path carries delta = 0 at the new
/// node and the same phase as the input.
std::vector<RayPath> insert_transmission(const Scene& scene, const IncidentWave& wave,
                                         const RayPath& path);

} // namespace hfscat

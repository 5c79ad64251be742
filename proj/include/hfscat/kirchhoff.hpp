#pragma once

#include <memory>
#include <vector>

#include "hfscat/geometry.hpp"
#include "hfscat/wave.hpp"

namespace hfscat {

/// One level of the iterated boundary kernels p_l, sampled on the per-obstacle
/// quadrature grids. Values on shadowed nodes vanish at level 1, and every
/// level >= 2 is identically zero for single-obstacle scenes.
struct KernelLayer {
    BoundaryCondition bc = BoundaryCondition::Dirichlet;
    int level = 1;
    IncidentWave wave;
    std::shared_ptr<const std::vector<SurfaceGrid>> grids;
    std::vector<std::vector<Complex>> values; // [grid][node]
};

/// Level-1 kernels from the incident wave:
///   Dirichlet: ik (|<xi,n>| - <xi,n>) e^{-ik<xi,sigma>}
///   Neumann:   ik (<xi,n>/|<xi,n>| - 1) e^{-ik<xi,sigma>}, 0 at grazing nodes.
KernelLayer first_layer(const IncidentWave& wave,
                        std::shared_ptr<const std::vector<SurfaceGrid>> grids,
                        BoundaryCondition bc);

/// Surface-to-surface recursion: for sigma on obstacle j, integrates the
/// previous kernel over every other obstacle with the one-sided direction
/// factor and the kernel e^{-ik r}/r. Node sums run in a fixed order with
/// compensated accumulation, so results do not depend on the thread count.
KernelLayer next_layer(const KernelLayer& prev, int threads = 0);

/// Field increment u_l - u_{l-1} at the targets:
///   Dirichlet: (1/4pi) int p_l(sigma) e^{-ik|x-sigma|}/|x-sigma| dsigma
///   Neumann:   the same with the extra factor <(x-sigma)/|x-sigma|, n(sigma)>.
std::vector<Complex> field_update(const KernelLayer& layer,
                                  const std::vector<Vec3>& targets, int threads = 0);

struct FieldSample {
    Vec3 x = Vec3::Zero();
    std::vector<Complex> increments; // u_l - u_{l-1}, l = 1..n
    Complex total{0.0, 0.0};         // e^{-ik<xi,x>} + u_n
};

/// Runs iterations levels of the scheme at the given grid resolution.
/// Throws NearBoundaryError for targets inside an obstacle or closer than one
/// wavelength to the boundary, ResourceError on the grid node cap.
std::vector<FieldSample> total_field(const Scene& scene, const IncidentWave& wave,
                                     const std::vector<Vec3>& targets,
                                     BoundaryCondition bc, int iterations, double ppw,
                                     int threads = 0, std::size_t node_cap = 1000000);

} // namespace hfscat

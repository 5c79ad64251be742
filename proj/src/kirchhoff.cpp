#include "hfscat/kirchhoff.hpp"

#include <cmath>
#include <numbers>

#include "hfscat/errors.hpp"
#include "hfscat/parallel.hpp"

namespace hfscat {

namespace {

const Complex kImagUnit{0.0, 1.0};

double one_sided_dirichlet(double cosine) { return std::abs(cosine) - cosine; }

// <d,n>/|<d,n>| - 1 with the grazing convention 0 at <d,n> = 0.
double one_sided_neumann(double cosine) {
    if (cosine == 0.0) return 0.0;
    return cosine / std::abs(cosine) - 1.0;
}

} // namespace

KernelLayer first_layer(const IncidentWave& wave,
                        std::shared_ptr<const std::vector<SurfaceGrid>> grids,
                        BoundaryCondition bc) {
    KernelLayer layer;
    layer.bc = bc;
    layer.level = 1;
    layer.wave = wave;
    layer.grids = std::move(grids);
    layer.values.resize(layer.grids->size());
    Complex ik = kImagUnit * wave.k;
    for (std::size_t g = 0; g < layer.grids->size(); ++g) {
        const auto& grid = (*layer.grids)[g];
        auto& vals = layer.values[g];
        vals.resize(grid.nodes.size());
        for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
            const SurfacePoint& sp = grid.nodes[i].point;
            double cosine = wave.xi.dot(sp.normal);
            double factor = bc == BoundaryCondition::Dirichlet
                                ? one_sided_dirichlet(cosine)
                                : one_sided_neumann(cosine);
            vals[i] = ik * factor * std::polar(1.0, -wave.k * wave.xi.dot(sp.position));
        }
    }
    return layer;
}

KernelLayer next_layer(const KernelLayer& prev, int threads) {
    KernelLayer layer;
    layer.bc = prev.bc;
    layer.level = prev.level + 1;
    layer.wave = prev.wave;
    layer.grids = prev.grids;
    layer.values.resize(layer.grids->size());

    const double k = prev.wave.k;
    const bool dirichlet = prev.bc == BoundaryCondition::Dirichlet;
    const auto& grids = *layer.grids;

    for (std::size_t g = 0; g < grids.size(); ++g) {
        const auto& out_grid = grids[g];
        auto& out_vals = layer.values[g];
        out_vals.assign(out_grid.nodes.size(), Complex{0.0, 0.0});

        parallel_for(
            out_grid.nodes.size(),
            [&](std::size_t i) {
                const SurfacePoint& sp = out_grid.nodes[i].point;
                CompensatedSum<Complex> acc;
                for (std::size_t gs = 0; gs < grids.size(); ++gs) {
                    if (gs == g) continue; // integration domain excludes own obstacle
                    const auto& src_grid = grids[gs];
                    const auto& src_vals = prev.values[gs];
                    for (std::size_t s = 0; s < src_grid.nodes.size(); ++s) {
                        const GridNode& src = src_grid.nodes[s];
                        Vec3 diff = sp.position - src.point.position;
                        double r = diff.norm();
                        Vec3 d = diff / r;
                        double cosine = d.dot(sp.normal);
                        double factor = dirichlet
                                            ? one_sided_dirichlet(cosine)
                                            : one_sided_neumann(cosine) *
                                                  d.dot(src.point.normal);
                        if (factor == 0.0) continue;
                        Complex green = std::polar(1.0 / r, -k * r);
                        acc.add(src_vals[s] * factor * green * src.weight);
                    }
                }
                out_vals[i] = acc.value() * kImagUnit * (k / (4.0 * std::numbers::pi));
            },
            threads);
    }
    return layer;
}

std::vector<Complex> field_update(const KernelLayer& layer,
                                  const std::vector<Vec3>& targets, int threads) {
    std::vector<Complex> out(targets.size());
    const double k = layer.wave.k;
    const bool dirichlet = layer.bc == BoundaryCondition::Dirichlet;
    const auto& grids = *layer.grids;

    parallel_for(
        targets.size(),
        [&](std::size_t t) {
            const Vec3& x = targets[t];
            CompensatedSum<Complex> acc;
            for (std::size_t g = 0; g < grids.size(); ++g) {
                const auto& grid = grids[g];
                const auto& vals = layer.values[g];
                for (std::size_t s = 0; s < grid.nodes.size(); ++s) {
                    const GridNode& node = grid.nodes[s];
                    Vec3 diff = x - node.point.position;
                    double r = diff.norm();
                    Complex term = vals[s] * std::polar(1.0 / r, -k * r) * node.weight;
                    if (!dirichlet) term *= diff.dot(node.point.normal) / r;
                    acc.add(term);
                }
            }
            out[t] = acc.value() / (4.0 * std::numbers::pi);
        },
        threads);
    return out;
}

std::vector<FieldSample> total_field(const Scene& scene, const IncidentWave& wave,
                                     const std::vector<Vec3>& targets,
                                     BoundaryCondition bc, int iterations, double ppw,
                                     int threads, std::size_t node_cap) {
    if (iterations < 1) throw ConfigError("need at least one iteration");
    double wavelength = 2.0 * std::numbers::pi / wave.k;
    for (const auto& x : targets) {
        if (scene.contains(x))
            throw NearBoundaryError("field target lies inside an obstacle");
        if (scene.surface_distance(x) < wavelength)
            throw NearBoundaryError("field target closer than one wavelength to the boundary");
    }

    auto grids = std::make_shared<std::vector<SurfaceGrid>>();
    grids->reserve(scene.obstacles.size());
    for (const auto& o : scene.obstacles)
        grids->push_back(build_grid(o, wave.k, ppw, node_cap));

    std::vector<FieldSample> samples(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        samples[t].x = targets[t];
        samples[t].total = wave.field(targets[t]);
    }

    KernelLayer layer = first_layer(wave, grids, bc);
    for (int level = 1; level <= iterations; ++level) {
        if (level > 1) layer = next_layer(layer, threads);
        std::vector<Complex> inc = field_update(layer, targets, threads);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            samples[t].increments.push_back(inc[t]);
            samples[t].total += inc[t];
        }
    }
    return samples;
}

} // namespace hfscat

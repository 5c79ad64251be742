#pragma once

#include "hfscat/geometry.hpp"
#include "hfscat/wave.hpp"

namespace hfscat {

/// Partial-wave series for a single sound-soft or sound-hard sphere centered
/// at the origin; the exact-solution oracle at desk scale.
struct MieConfig {
    double radius = 1.0;
    double k = 1.0;
    int truncation = 0;

    /// L = ceil(kR + 10 (kR)^{1/3} + 10), safely past the convergence knee.
    static MieConfig with_auto_truncation(double radius, double k);
};

/// Total field incident + scattered at x (|x| > radius) for the plane wave
/// e^{-ik<xi,x>}. Coefficients -j_l(kR)/h_l(kR) (Dirichlet) or
/// -j_l'(kR)/h_l'(kR) (Neumann) with the outgoing Hankel function h = j - iy.
/// Throws ConvergenceError when the last retained term exceeds 1e-12 of the
/// partial sum.
Complex mie_field(const MieConfig& cfg, const Vec3& xi, const Vec3& x,
                  BoundaryCondition bc);

struct MieCrossSections {
    double series = 0.0;  // (4pi/k^2) sum (2l+1) |c_l|^2
    double forward = 0.0; // optical theorem via the forward amplitude
};

MieCrossSections mie_cross_sections(const MieConfig& cfg, BoundaryCondition bc);

/// Spherical Bessel values j_0..j_lmax and y_0..y_lmax at x > 0 by downward
/// (Miller) and upward recurrences; exposed for oracle cross-checks.
void spherical_bessel(int lmax, double x, std::vector<double>& j, std::vector<double>& y);

} // namespace hfscat

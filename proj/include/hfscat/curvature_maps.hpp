#pragma once

#include "hfscat/geometry.hpp"

namespace hfscat {

/// Free propagation of a wavefront-curvature matrix over distance s:
/// A -> A (I + sA)^{-1}. Symmetric in, symmetric out. Throws SingularError
/// when I + sA is numerically singular (a focal point on the segment).
Mat3 shift_map(const Mat3& A, double s);

/// Curvature update at a specular reflection off a surface with curvature
/// matrix B, outer normal eta and incoming direction zeta:
///   x -> (A - 2<zeta,eta>B)x - 2<eta,x>(A eta + B zeta) - 2<A eta + B zeta, x>eta
///        + 2[2<A eta,eta> - <B zeta,zeta>/<zeta,eta>]<eta,x>eta.
/// Throws TangencyError when |<zeta,eta>| <= 1e-9 (grazing incidence).
Mat3 reflect_map(const Mat3& A, const Mat3& B, const Vec3& eta, const Vec3& zeta);

/// Change-of-frame rotation: entry (p,q) = <to_p, from_q> for orthonormal
/// frames given column-wise, so coords_to = R * coords_from.
Mat3 frame_rotation(const Mat3& from_columns, const Mat3& to_columns);
Mat3 frame_rotation(const SurfacePoint& from, const SurfacePoint& to);

} // namespace hfscat

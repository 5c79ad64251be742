#include "hfscat/curvature_maps.hpp"

#include <cmath>

#include "hfscat/errors.hpp"

namespace hfscat {

Mat3 shift_map(const Mat3& A, double s) {
    Mat3 m = Mat3::Identity() + s * A;
    Eigen::PartialPivLU<Mat3> lu(m);
    Mat3 inv = lu.inverse();
    // Scale-free singularity test via the infinity-norm condition number.
    double cond = m.cwiseAbs().rowwise().sum().maxCoeff() *
                  inv.cwiseAbs().rowwise().sum().maxCoeff();
    if (!std::isfinite(cond) || cond > 1e12)
        throw SingularError("I + sA is numerically singular (cond ~ " +
                            std::to_string(cond) + ")");
    Mat3 out = A * inv;
    return 0.5 * (out + out.transpose());
}

Mat3 reflect_map(const Mat3& A, const Mat3& B, const Vec3& eta, const Vec3& zeta) {
    double ze = zeta.dot(eta);
    if (std::abs(ze) <= 1e-9)
        throw TangencyError("grazing reflection: |<zeta,eta>| = " + std::to_string(std::abs(ze)));
    Vec3 w = A * eta + B * zeta;
    double bracket = 2.0 * eta.dot(A * eta) - zeta.dot(B * zeta) / ze;
    Mat3 out = A - 2.0 * ze * B;
    out -= 2.0 * (w * eta.transpose() + eta * w.transpose());
    out += 2.0 * bracket * eta * eta.transpose();
    return 0.5 * (out + out.transpose());
}

Mat3 frame_rotation(const Mat3& from_columns, const Mat3& to_columns) {
    return to_columns.transpose() * from_columns;
}

Mat3 frame_rotation(const SurfacePoint& from, const SurfacePoint& to) {
    return frame_rotation(from.frame(), to.frame());
}

} // namespace hfscat

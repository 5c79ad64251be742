#pragma once

#include <complex>

#include "hfscat/errors.hpp"
#include "hfscat/geometry.hpp"

namespace hfscat {

using Complex = std::complex<double>;

enum class BoundaryCondition { Dirichlet, Neumann };

/// Incident plane wave e^{-ik<xi,x>} with |xi| = 1.
struct IncidentWave {
    Vec3 xi = Vec3::UnitZ();
    double k = 1.0;

    IncidentWave() = default;
    IncidentWave(const Vec3& direction, double wavenumber) : xi(direction), k(wavenumber) {
        if (k <= 0.0) throw ConfigError("wavenumber must be positive");
        double n = xi.norm();
        if (std::abs(n - 1.0) > 1e-12) {
            if (n < 1e-12) throw ConfigError("incident direction must be nonzero");
            xi /= n;
        }
    }

    Complex field(const Vec3& x) const {
        return std::polar(1.0, -k * xi.dot(x));
    }
};

} // namespace hfscat

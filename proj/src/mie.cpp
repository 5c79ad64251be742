#include "hfscat/mie.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "hfscat/errors.hpp"

namespace hfscat {

namespace {

const Complex kImagUnit{0.0, 1.0};

Complex minus_i_pow(int l) {
    switch (l & 3) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, -1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, 1.0};
    }
}

// z'_l(x) from z_{l-1} and z_l; for l = 0, z'_0 = -z_1.
template <typename T>
T bessel_derivative(int l, double x, const std::vector<T>& z) {
    if (l == 0) return -z[1];
    return z[l - 1] - (l + 1.0) / x * z[l];
}

struct MieCoefficients {
    std::vector<Complex> c;
};

MieCoefficients coefficients(const MieConfig& cfg, BoundaryCondition bc) {
    double ka = cfg.k * cfg.radius;
    std::vector<double> j, y;
    spherical_bessel(cfg.truncation + 1, ka, j, y);
    MieCoefficients out;
    out.c.resize(cfg.truncation + 1);
    for (int l = 0; l <= cfg.truncation; ++l) {
        Complex h{j[l], -y[l]};
        if (bc == BoundaryCondition::Dirichlet) {
            out.c[l] = -j[l] / h;
        } else {
            double jp = bessel_derivative(l, ka, j);
            double yp = bessel_derivative(l, ka, y);
            out.c[l] = -jp / Complex{jp, -yp};
        }
    }
    return out;
}

} // namespace

MieConfig MieConfig::with_auto_truncation(double radius, double k) {
    MieConfig cfg;
    cfg.radius = radius;
    cfg.k = k;
    double ka = k * radius;
    cfg.truncation = static_cast<int>(std::ceil(ka + 10.0 * std::cbrt(ka) + 10.0));
    return cfg;
}

void spherical_bessel(int lmax, double x, std::vector<double>& j, std::vector<double>& y) {
    if (x <= 0.0) throw ConfigError("spherical Bessel argument must be positive");
    j.assign(lmax + 1, 0.0);
    y.assign(lmax + 1, 0.0);

    // y_l by stable upward recurrence.
    double y0 = -std::cos(x) / x;
    double y1 = -std::cos(x) / (x * x) - std::sin(x) / x;
    y[0] = y0;
    if (lmax >= 1) y[1] = y1;
    for (int l = 1; l < lmax; ++l) y[l + 1] = (2.0 * l + 1.0) / x * y[l] - y[l - 1];

    // j_l by downward Miller recurrence with scale guards.
    int start = lmax + 20 + static_cast<int>(2.0 * std::sqrt(static_cast<double>(lmax)));
    double jp1 = 0.0;
    double jp0 = 1e-300;
    for (int l = start; l > 0; --l) {
        double jm = (2.0 * l + 1.0) / x * jp0 - jp1;
        jp1 = jp0;
        jp0 = jm;
        if (l - 1 <= lmax) j[l - 1] = jm;
        if (std::abs(jp0) > 1e250) {
            jp0 *= 1e-250;
            jp1 *= 1e-250;
            for (int m = l - 1; m <= lmax; ++m) j[m] *= 1e-250;
        }
    }
    // Normalize against the closed forms, picking the better-conditioned one.
    double j0 = std::sin(x) / x;
    double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
    double scale = std::abs(j[0]) > std::abs(j[1]) ? j0 / j[0] : j1 / j[1];
    for (int l = 0; l <= lmax; ++l) j[l] *= scale;
}

Complex mie_field(const MieConfig& cfg, const Vec3& xi, const Vec3& x,
                  BoundaryCondition bc) {
    double r = x.norm();
    if (r <= cfg.radius)
        throw ConfigError("Mie evaluation point must lie outside the sphere");
    double mu = xi.normalized().dot(x) / r;
    double kr = cfg.k * r;

    MieCoefficients coeff = coefficients(cfg, bc);
    std::vector<double> j, y;
    spherical_bessel(cfg.truncation, kr, j, y);

    Complex sum{0.0, 0.0};
    double last_mag = 0.0;
    double p_prev = 1.0; // P_0
    double p_curr = mu;  // P_1
    for (int l = 0; l <= cfg.truncation; ++l) {
        double pl = l == 0 ? 1.0 : (l == 1 ? mu : p_curr);
        Complex radial = Complex{j[l], 0.0} + coeff.c[l] * Complex{j[l], -y[l]};
        Complex term = (2.0 * l + 1.0) * minus_i_pow(l) * radial * pl;
        sum += term;
        last_mag = std::abs(term);
        if (l >= 1) {
            double p_next = ((2.0 * l + 1.0) * mu * p_curr - l * p_prev) / (l + 1.0);
            p_prev = p_curr;
            p_curr = p_next;
        }
    }
    if (last_mag > 1e-12 * std::abs(sum))
        throw ConvergenceError("Mie series tail above tolerance; raise the truncation");
    return sum;
}

MieCrossSections mie_cross_sections(const MieConfig& cfg, BoundaryCondition bc) {
    MieCoefficients coeff = coefficients(cfg, bc);
    double series = 0.0;
    Complex csum{0.0, 0.0};
    for (int l = 0; l <= cfg.truncation; ++l) {
        series += (2.0 * l + 1.0) * std::norm(coeff.c[l]);
        csum += (2.0 * l + 1.0) * coeff.c[l];
    }
    MieCrossSections out;
    double pref = 4.0 * std::numbers::pi / (cfg.k * cfg.k);
    out.series = pref * series;
    // Forward amplitude f(0) = (i/k) sum (2l+1) c_l; sigma = -(4pi/k) Im f(0).
    out.forward = -pref * csum.real();
    return out;
}

} // namespace hfscat

#pragma once

#include <vector>

#include "hfscat/rays.hpp"

namespace hfscat {

/// Tangential Hessian blocks of the path phase at a solved stationary path,
/// and the Schur-complement matrices M_j obtained by block elimination of the
/// tridiagonal Hessian. All 2x2 matrices live in the node principal frames.
struct StationaryData {
    RayPath path;
    std::vector<Mat2> diag_blocks; // EH_{j,j}
    std::vector<Mat2> off_blocks;  // EH coupling j,j+1 (rows: frame j+1, cols: frame j)
    std::vector<Mat2> M;
    std::vector<double> dets;       // det M_j
    std::vector<int> signatures;    // eigenvalue-sign signature of M_j
};

/// Fills the diagonal and off-diagonal blocks only.
StationaryData hessian_blocks(const RayPath& path);

/// Runs the recursion M_1 = EH_{1,1}, M_j = EH_{j,j} - C M_{j-1}^{-1} C^t and
/// fills determinants and signatures. Throws SingularError when some M_j is
/// numerically singular (the target sits on the caustic set).
StationaryData schur_M(StationaryData data);

struct Lemma2Report {
    struct PerNode {
        double m_vs_p_abs = 0.0;      // ||M_j - P_j|_T - (1/lambda_j)(I - xi xi^t)|_T||
        double m_vs_p_rel = 0.0;
        double det_identity_abs = 0.0; // |det M_j - (<xi_j,n_j>/lambda_j)^2 det(I+lambda_j P_j)|
        double det_identity_rel = 0.0;
        int signature = 0;
        double det_M = 0.0;
        double min_singular_value = 0.0;
    };
    std::vector<PerNode> nodes;

    double max_m_vs_p_rel() const;
    double max_det_identity_rel() const;
    bool signatures_all_two() const;
    double min_det() const;
};

/// Numeric residuals of the curvature/Hessian identities along a solved path.
Lemma2Report lemma2_residuals(const RayPath& path);

struct Lemma3Residuals {
    double phase_diff = 0.0;
    double det_product_diff = 0.0; // absolute
    double det_product_rel = 0.0;
};

/// Residuals of the transmission-insertion identities: equal phases and equal
/// amplitude-denominator products between a path and its inserted extension.
Lemma3Residuals lemma3_residuals(const RayPath& nu, const RayPath& mu);

struct StationaryTerm {
    RayPath path;
    Complex term{0.0, 0.0};
};

/// Per-stationary-point leading terms of the level-l field increment:
/// (-1)^l (Dirichlet) or (+1)^l (Neumann) e^{-ik psi} / sqrt(prod det(I+lambda P)).
std::vector<StationaryTerm> asymptotic_contributions(const Scene& scene,
                                                     const IncidentWave& wave,
                                                     const Vec3& x, BoundaryCondition bc,
                                                     int level,
                                                     const SolveOptions& options = {});

/// Sum of the contributions; throws CausticError near the caustic set.
Complex asymptotic_field(const Scene& scene, const IncidentWave& wave, const Vec3& x,
                         BoundaryCondition bc, int level, const SolveOptions& options = {});

} // namespace hfscat

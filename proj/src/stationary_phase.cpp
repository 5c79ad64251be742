#include "hfscat/stationary_phase.hpp"

#include <algorithm>
#include <cmath>

#include "hfscat/errors.hpp"
#include "path_blocks.hpp"

namespace hfscat {

namespace {

Mat2 restrict_to_tangent(const Mat3& m, const SurfacePoint& sp) {
    Eigen::Matrix<double, 3, 2> t = sp.tangent_basis();
    return t.transpose() * m * t;
}

std::pair<double, double> sym2_eigenvalues(const Mat2& m) {
    double tr = m.trace();
    double det = m.determinant();
    double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    return {0.5 * tr - disc, 0.5 * tr + disc};
}

} // namespace

StationaryData hessian_blocks(const RayPath& path) {
    StationaryData data;
    data.path = path;
    auto seg = detail::path_segments(path.nodes, path.target);
    data.diag_blocks = detail::diagonal_blocks(path.incident_dir, path.nodes, seg);
    data.off_blocks = detail::offdiagonal_blocks(path.nodes, seg);
    return data;
}

StationaryData schur_M(StationaryData data) {
    std::size_t l = data.diag_blocks.size();
    data.M.resize(l);
    data.dets.resize(l);
    data.signatures.resize(l);
    for (std::size_t j = 0; j < l; ++j) {
        Mat2 m = data.diag_blocks[j];
        if (j > 0) {
            const Mat2& C = data.off_blocks[j - 1];
            m -= C * data.M[j - 1].inverse() * C.transpose();
        }
        m = 0.5 * (m + m.transpose());
        double det = m.determinant();
        double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        if (std::abs(det) < 1e-12 * scale * scale)
            throw SingularError("Schur matrix M_" + std::to_string(j + 1) +
                                " is numerically singular (caustic target)");
        auto [lo, hi] = sym2_eigenvalues(m);
        int sig = 0;
        for (double ev : {lo, hi}) {
            if (std::abs(ev) <= 1e-12 * scale)
                throw SingularError("zero eigenvalue in M_" + std::to_string(j + 1));
            sig += ev > 0.0 ? 1 : -1;
        }
        data.M[j] = m;
        data.dets[j] = det;
        data.signatures[j] = sig;
    }
    return data;
}

double Lemma2Report::max_m_vs_p_rel() const {
    double r = 0.0;
    for (const auto& n : nodes) r = std::max(r, n.m_vs_p_rel);
    return r;
}

double Lemma2Report::max_det_identity_rel() const {
    double r = 0.0;
    for (const auto& n : nodes) r = std::max(r, n.det_identity_rel);
    return r;
}

bool Lemma2Report::signatures_all_two() const {
    return std::all_of(nodes.begin(), nodes.end(),
                       [](const PerNode& n) { return n.signature == 2; });
}

double Lemma2Report::min_det() const {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& n : nodes) r = std::min(r, n.det_M);
    return r;
}

Lemma2Report lemma2_residuals(const RayPath& path) {
    RayPath p = path;
    if (p.P.empty()) p.P = propagate_curvature(p);
    StationaryData data = schur_M(hessian_blocks(p));

    Lemma2Report report;
    report.nodes.resize(p.nodes.size());
    for (std::size_t j = 0; j < p.nodes.size(); ++j) {
        const SurfacePoint& sp = p.nodes[j];
        const Vec3& xi = p.seg_dirs[j];
        double lambda = p.seg_lens[j];

        Mat2 rhs = restrict_to_tangent(p.P[j], sp) +
                   detail::transverse_block(xi, sp) / lambda;
        double m_norm = data.M[j].norm();
        auto& node = report.nodes[j];
        node.m_vs_p_abs = (data.M[j] - rhs).norm();
        node.m_vs_p_rel = node.m_vs_p_abs / std::max(m_norm, 1e-300);

        double cosine = xi.dot(sp.normal);
        double detIP = (Mat3::Identity() + lambda * p.P[j]).determinant();
        double predicted = (cosine / lambda) * (cosine / lambda) * detIP;
        node.det_identity_abs = std::abs(data.dets[j] - predicted);
        node.det_identity_rel = node.det_identity_abs / std::max(std::abs(data.dets[j]), 1e-300);

        node.signature = data.signatures[j];
        node.det_M = data.dets[j];
        auto [lo, hi] = sym2_eigenvalues(data.M[j]);
        node.min_singular_value = std::min(std::abs(lo), std::abs(hi));
    }
    return report;
}

Lemma3Residuals lemma3_residuals(const RayPath& nu, const RayPath& mu) {
    Lemma3Residuals res;
    res.phase_diff = std::abs(nu.phase - mu.phase);
    auto det_product = [](const RayPath& p) {
        double prod = 1.0;
        for (double d : p.dets) prod *= d;
        return prod;
    };
    double dn = det_product(nu);
    double dm = det_product(mu);
    res.det_product_diff = std::abs(dn - dm);
    res.det_product_rel = res.det_product_diff / std::max(std::abs(dn), 1e-300);
    return res;
}

std::vector<StationaryTerm> asymptotic_contributions(const Scene& scene,
                                                     const IncidentWave& wave,
                                                     const Vec3& x, BoundaryCondition bc,
                                                     int level,
                                                     const SolveOptions& options) {
    std::vector<StationaryTerm> terms;
    for (auto& path : stationary_points(scene, wave, x, level, options)) {
        if (path.caustic)
            throw CausticError("stationary configuration near the caustic set");
        double amp2 = 1.0;
        for (double d : path.dets) amp2 *= std::abs(d);
        double sign =
            (bc == BoundaryCondition::Dirichlet && (level % 2 == 1)) ? -1.0 : 1.0;
        StationaryTerm term;
        term.term = sign * std::polar(1.0, -wave.k * path.phase) / std::sqrt(amp2);
        term.path = std::move(path);
        terms.push_back(std::move(term));
    }
    return terms;
}

Complex asymptotic_field(const Scene& scene, const IncidentWave& wave, const Vec3& x,
                         BoundaryCondition bc, int level, const SolveOptions& options) {
    Complex value{0.0, 0.0};
    for (const auto& t : asymptotic_contributions(scene, wave, x, bc, level, options))
        value += t.term;
    return value;
}

} // namespace hfscat

#pragma once

// Shared assembly of the tangential derivatives of the path phase. The phase
// couples consecutive nodes only, so its tangential Hessian is block
// tridiagonal with 2x2 blocks expressed in each node's principal frame.

#include <vector>

#include "hfscat/geometry.hpp"
#include "hfscat/wave.hpp"

namespace hfscat::detail {

// Segment data for nodes sigma_1..sigma_l and target x: dirs[j] is the unit
// direction leaving node j (dirs[l-1] points at x), lens[j] its length.
struct PathSegments {
    std::vector<Vec3> dirs;
    std::vector<double> lens;
};

inline PathSegments path_segments(const std::vector<SurfacePoint>& nodes, const Vec3& x) {
    PathSegments seg;
    std::size_t l = nodes.size();
    seg.dirs.resize(l);
    seg.lens.resize(l);
    for (std::size_t j = 0; j < l; ++j) {
        Vec3 next = (j + 1 < l) ? nodes[j + 1].position : x;
        Vec3 d = next - nodes[j].position;
        seg.lens[j] = d.norm();
        seg.dirs[j] = d / seg.lens[j];
    }
    return seg;
}

// Tangential gradient per node: projection of xi_{j-1} - xi_j (xi_0 = wave
// direction) on the node frame.
inline std::vector<Vec2> tangential_gradient(const Vec3& incident,
                                             const std::vector<SurfacePoint>& nodes,
                                             const PathSegments& seg) {
    std::vector<Vec2> grad(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        Vec3 g = (j == 0 ? incident : seg.dirs[j - 1]) - seg.dirs[j];
        grad[j] = Vec2(g.dot(nodes[j].dir_u), g.dot(nodes[j].dir_v));
    }
    return grad;
}

// (I - xi xi^t) restricted to the node tangent plane.
inline Mat2 transverse_block(const Vec3& xi, const SurfacePoint& sp) {
    double xu = xi.dot(sp.dir_u), xv = xi.dot(sp.dir_v);
    Mat2 m;
    m(0, 0) = 1.0 - xu * xu;
    m(1, 1) = 1.0 - xv * xv;
    m(0, 1) = m(1, 0) = -xu * xv;
    return m;
}

// Diagonal Hessian blocks, valid at arbitrary node positions:
//   EH_{j,j} = (1/lambda_{j-1})(I - xi_{j-1} xi_{j-1}^t)|_T
//            + (1/lambda_j)(I - xi_j xi_j^t)|_T
//            + (<xi_j,n_j> - <xi_{j-1},n_j>) B_j|_T ,
// the first block using the incident plane-wave term instead of an incoming
// segment. At a solved path the curvature coefficient collapses to
// -2 delta_j <xi_{j-1}, n_j>.
inline std::vector<Mat2> diagonal_blocks(const Vec3& incident,
                                         const std::vector<SurfacePoint>& nodes,
                                         const PathSegments& seg) {
    std::vector<Mat2> blocks(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const SurfacePoint& sp = nodes[j];
        Vec3 in = (j == 0 ? incident : seg.dirs[j - 1]);
        Mat2 m = Mat2::Zero();
        if (j > 0) m += transverse_block(in, sp) / seg.lens[j - 1];
        m += transverse_block(seg.dirs[j], sp) / seg.lens[j];
        double coeff = seg.dirs[j].dot(sp.normal) - in.dot(sp.normal);
        m(0, 0) += coeff * sp.k1;
        m(1, 1) += coeff * sp.k2;
        blocks[j] = m;
    }
    return blocks;
}

// Off-diagonal blocks (1/lambda_j) L_j coupling nodes j and j+1, with
//   (L_j)_{pq} = <e_q^j, xi_j><e_p^{j+1}, xi_j> - <e_q^j, e_p^{j+1}>.
// Row index p lives in the frame of node j+1, column index q in node j.
inline std::vector<Mat2> offdiagonal_blocks(const std::vector<SurfacePoint>& nodes,
                                            const PathSegments& seg) {
    if (nodes.size() < 2) return {};
    std::vector<Mat2> blocks(nodes.size() - 1);
    for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
        const Vec3& xi = seg.dirs[j];
        Eigen::Matrix<double, 3, 2> ej = nodes[j].tangent_basis();
        Eigen::Matrix<double, 3, 2> ejn = nodes[j + 1].tangent_basis();
        Mat2 L;
        for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q)
                L(p, q) = ej.col(q).dot(xi) * ejn.col(p).dot(xi) - ej.col(q).dot(ejn.col(p));
        blocks[j] = L / seg.lens[j];
    }
    return blocks;
}

} // namespace hfscat::detail

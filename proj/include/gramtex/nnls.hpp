#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "gramtex/error.hpp"

namespace gramtex {

struct NnlsOptions {
    /// Outer iteration budget as a multiple of the column count.
    std::size_t iteration_factor = 3;
};

struct NnlsResult {
    Eigen::VectorXd solution;
    double residual = 0.0;
    std::size_t iterations = 0;
};

/// Lawson-Hanson active-set solver for min ||A s - b|| subject to s >= 0.
inline NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const NnlsOptions& opts = {})
{
    const Eigen::Index cols = a.cols();
    require(a.rows() == b.size(), ErrorCode::shape_mismatch, "nnls: row count differs from rhs length");

    Eigen::VectorXd s = Eigen::VectorXd::Zero(cols);
    std::vector<bool> passive(static_cast<std::size_t>(cols), false);
    const double eps = std::numeric_limits<double>::epsilon();
    const double tol = 10.0 * eps * static_cast<double>(std::max(a.rows(), cols)) * a.norm() * b.norm();

    auto solve_passive = [&](Eigen::VectorXd& z) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < cols; ++j)
            if (passive[static_cast<std::size_t>(j)])
                idx.push_back(j);
        Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k)
            sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
        const Eigen::VectorXd zp = sub.completeOrthogonalDecomposition().solve(b);
        z.setZero(cols);
        for (std::size_t k = 0; k < idx.size(); ++k)
            z(idx[k]) = zp(static_cast<Eigen::Index>(k));
    };

    const std::size_t budget = opts.iteration_factor * static_cast<std::size_t>(std::max<Eigen::Index>(cols, 1));
    std::size_t iter = 0;
    Eigen::VectorXd w = a.transpose() * (b - a * s);
    while (true) {
        Eigen::Index best = -1;
        double best_w = tol;
        for (Eigen::Index j = 0; j < cols; ++j)
            if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
                best_w = w(j);
                best = j;
            }
        if (best < 0)
            break;
        if (++iter > budget)
            throw Error(ErrorCode::non_convergence, "nnls exceeded its iteration budget");
        passive[static_cast<std::size_t>(best)] = true;

        Eigen::VectorXd z;
        while (true) {
            solve_passive(z);
            double alpha = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < cols; ++j)
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0)
                    alpha = std::min(alpha, s(j) / (s(j) - z(j)));
            if (!std::isfinite(alpha))
                break;
            s += alpha * (z - s);
            for (Eigen::Index j = 0; j < cols; ++j)
                if (passive[static_cast<std::size_t>(j)] && s(j) <= eps * std::max(1.0, s.cwiseAbs().maxCoeff())) {
                    passive[static_cast<std::size_t>(j)] = false;
                    s(j) = 0.0;
                }
            if (++iter > budget)
                throw Error(ErrorCode::non_convergence, "nnls exceeded its iteration budget");
        }
        s = z;
        w = a.transpose() * (b - a * s);
    }
    return {s, (a * s - b).norm(), iter};
}

} // namespace gramtex

#pragma once

#include <Eigen/Dense>

namespace daqc {

struct NnlsResult {
    Eigen::VectorXd x;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Lawson-Hanson active-set solver for min ||A x - b|| subject to x >= 0.
/// Deterministic: ties in the dual vector break toward the lowest column
/// index. `dual_tol` < 0 selects an eps-based default; `max_iterations` < 0
/// selects the classic 3 * cols budget.
NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double dual_tol = -1.0,
                int max_iterations = -1);

}  // namespace daqc

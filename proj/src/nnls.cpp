#include "daqc/nnls.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace daqc {

namespace {

// Least squares on the passive columns only.
Eigen::VectorXd passive_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const std::vector<int>& passive) {
    Eigen::MatrixXd ap(a.rows(), static_cast<Eigen::Index>(passive.size()));
    for (std::size_t k = 0; k < passive.size(); ++k) ap.col(static_cast<Eigen::Index>(k)) = a.col(passive[k]);
    return ap.colPivHouseholderQr().solve(b);
}

}  // namespace

NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double dual_tol,
                int max_iterations) {
    const Eigen::Index m = a.rows(), n = a.cols();
    if (b.size() != m) throw std::invalid_argument("nnls: dimension mismatch");
    if (max_iterations < 0) max_iterations = static_cast<int>(3 * n);
    if (dual_tol < 0.0) {
        dual_tol = 10.0 * std::numeric_limits<double>::epsilon() *
                   a.cwiseAbs().colwise().sum().maxCoeff() * static_cast<double>(std::max(m, n));
    }

    NnlsResult out;
    out.x = Eigen::VectorXd::Zero(n);
    std::vector<bool> in_passive(n, false);
    std::vector<int> passive;

    Eigen::VectorXd resid = b;
    int iter = 0;
    while (iter < max_iterations) {
        const Eigen::VectorXd w = a.transpose() * resid;
        int best = -1;
        double wbest = dual_tol;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (!in_passive[k] && w(k) > wbest) {
                wbest = w(k);
                best = static_cast<int>(k);
            }
        }
        if (best < 0) {
            out.converged = true;
            break;
        }
        in_passive[best] = true;
        passive.push_back(best);

        Eigen::VectorXd z = passive_solve(a, b, passive);
        // Inner loop: walk back toward the previous feasible point until all
        // passive coefficients are positive again.
        while (z.minCoeff() <= 0.0) {
            ++iter;
            double alpha = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < passive.size(); ++k) {
                const auto ek = static_cast<Eigen::Index>(k);
                if (z(ek) <= 0.0) {
                    const double xk = out.x(passive[k]);
                    const double step = xk / (xk - z(ek));
                    alpha = std::min(alpha, step);
                }
            }
            for (std::size_t k = 0; k < passive.size(); ++k) {
                const auto ek = static_cast<Eigen::Index>(k);
                out.x(passive[k]) += alpha * (z(ek) - out.x(passive[k]));
            }
            std::vector<int> kept;
            for (int idx : passive) {
                if (out.x(idx) > 1e-14) {
                    kept.push_back(idx);
                } else {
                    out.x(idx) = 0.0;
                    in_passive[idx] = false;
                }
            }
            passive = std::move(kept);
            if (passive.empty()) {
                z.resize(0);
                break;
            }
            z = passive_solve(a, b, passive);
        }
        for (std::size_t k = 0; k < passive.size(); ++k)
            out.x(passive[k]) = z(static_cast<Eigen::Index>(k));

        resid = b;
        for (int idx : passive) resid -= out.x(idx) * a.col(idx);
        ++iter;
    }
    out.iterations = iter;
    if (iter >= max_iterations) out.converged = false;
    out.residual_norm = resid.norm();
    return out;
}

}  // namespace daqc

#include "daqc/simulator.hpp"

#include <complex>
#include <stdexcept>

namespace daqc {

namespace {

using Cplx = std::complex<double>;

Eigen::Matrix2cd pauli_matrix(Gate g) {
    Eigen::Matrix2cd m;
    switch (g) {
        case Gate::I: m << 1, 0, 0, 1; break;
        case Gate::X: m << 0, 1, 1, 0; break;
        case Gate::Y: m << 0, Cplx(0, -1), Cplx(0, 1), 0; break;
        default: m << 1, 0, 0, -1; break;
    }
    return m;
}

// Left-multiplies the accumulator by the pair unitary u4 acting on qubits
// (i, j); every row of the result mixes only 4 rows of the input.
void apply_pair_factor_left(const Eigen::Matrix4cd& u4, int i, int j, int n,
                            Eigen::MatrixXcd& acc) {
    const int bi = n - i, bj = n - j;
    const std::size_t dim = std::size_t{1} << n;
    const std::size_t mi = std::size_t{1} << bi, mj = std::size_t{1} << bj;
    Eigen::MatrixXcd out(dim, acc.cols());
    for (std::size_t r = 0; r < dim; ++r) {
        const int ri = static_cast<int>((r >> bi) & 1), rj = static_cast<int>((r >> bj) & 1);
        const std::size_t base = r & ~(mi | mj);
        const int row4 = 2 * ri + rj;
        out.row(r) = u4(row4, 0) * acc.row(base) + u4(row4, 1) * acc.row(base | mj) +
                     u4(row4, 2) * acc.row(base | mi) + u4(row4, 3) * acc.row(base | mi | mj);
    }
    acc = std::move(out);
}

}  // namespace

double unitarity_defect(const Unitary& u) {
    return (u * u.adjoint() - Unitary::Identity(u.rows(), u.cols())).norm();
}

double frobenius_distance(const Unitary& u, const Unitary& v) {
    if (u.rows() != v.rows() || u.cols() != v.cols())
        throw std::invalid_argument("frobenius_distance: dimension mismatch");
    return (u - v).norm();
}

Propagator::Propagator(const TwoBodyHamiltonian& h, int qubit_cap) {
    const Eigen::MatrixXcd dense = dense_matrix(h, qubit_cap);
    const double herm_defect = (dense - dense.adjoint()).norm();
    if (herm_defect > 1e-10 * std::max(1.0, dense.norm()))
        throw std::logic_error("dense Hamiltonian is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
    values_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
    norm_ = dense.norm();
}

Unitary Propagator::operator()(double t) const {
    const Eigen::VectorXcd phases =
        (Cplx(0, -t) * values_.cast<Cplx>().array()).exp().matrix();
    return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

Unitary evolve(const TwoBodyHamiltonian& h, double t, int qubit_cap) {
    return Propagator(h, qubit_cap)(t);
}

Unitary evolve_pairwise_trotter(const TwoBodyHamiltonian& h, double t, int qubit_cap) {
    const int n = h.n();
    if (n > qubit_cap)
        throw std::invalid_argument("evolve_pairwise_trotter: qubit cap exceeded");
    const std::size_t dim = std::size_t{1} << n;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    const int N = n * (n - 1) / 2;
    for (int b = 1; b <= N; ++b) {
        const auto [i, j] = pair_unindex(b, n);
        Eigen::Matrix4cd h4 = Eigen::Matrix4cd::Zero();
        bool coupled = false;
        for (int mu = 0; mu < 3; ++mu) {
            for (int nu = 0; nu < 3; ++nu) {
                const double s =
                    h.strength(i, j, static_cast<PauliAxis>(mu), static_cast<PauliAxis>(nu));
                if (s == 0.0) continue;
                coupled = true;
                const Eigen::Matrix2cd pm = pauli_matrix(static_cast<Gate>(mu + 1));
                const Eigen::Matrix2cd pn = pauli_matrix(static_cast<Gate>(nu + 1));
                for (int r = 0; r < 4; ++r)
                    for (int c = 0; c < 4; ++c)
                        h4(r, c) += s * pm(r / 2, c / 2) * pn(r % 2, c % 2);
            }
        }
        if (!coupled) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h4);
        const Eigen::Vector4cd phases =
            (Cplx(0, -t) * es.eigenvalues().cast<Cplx>().array()).exp().matrix();
        const Eigen::Matrix4cd u4 =
            es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
        apply_pair_factor_left(u4, i, j, n, u);
    }
    return u;
}

TwoBodyHamiltonian conjugate_by_gates(const TwoBodyHamiltonian& h, const GateSelection& sel) {
    if (static_cast<int>(sel.size()) != h.n())
        throw std::invalid_argument("conjugate_by_gates: selection length differs from n");
    TwoBodyHamiltonian out(h.n());
    for (const auto& [key, s] : h.couplings()) {
        const int sign =
            conjugation_sign(sel[key.i - 1], key.mu) * conjugation_sign(sel[key.j - 1], key.nu);
        out.set(key.i, key.j, key.mu, key.nu, sign * s);
    }
    return out;
}

Unitary gate_layer_unitary(const GateSelection& sel) {
    const int n = static_cast<int>(sel.size());
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Ones(1, 1);
    // qubit 1 is the leftmost tensor factor: apply it outermost
    for (int q = n - 1; q >= 0; --q) {
        const Eigen::Matrix2cd g = pauli_matrix(sel[q]);
        Eigen::MatrixXcd next(u.rows() * 2, u.cols() * 2);
        next.topLeftCorner(u.rows(), u.cols()) = g(0, 0) * u;
        next.topRightCorner(u.rows(), u.cols()) = g(0, 1) * u;
        next.bottomLeftCorner(u.rows(), u.cols()) = g(1, 0) * u;
        next.bottomRightCorner(u.rows(), u.cols()) = g(1, 1) * u;
        u = std::move(next);
    }
    return u;
}

Unitary run_schedule(const Schedule& s, SimulationMode mode, int qubit_cap) {
    const int n = s.n;
    if (n > qubit_cap) throw std::invalid_argument("run_schedule: qubit cap exceeded");
    for (const auto& b : s.blocks)
        if (b.duration < 0.0)
            throw std::invalid_argument("run_schedule: negative block duration");
    const std::size_t dim = std::size_t{1} << n;
    const int nt = s.trotter_steps;

    Eigen::MatrixXcd step = Eigen::MatrixXcd::Identity(dim, dim);
    if (mode == SimulationMode::Exact) {
        // One eigendecomposition of the source; each block is the Pauli
        // sandwich G E(t/n_T) G of the same propagator.
        const Propagator prop(s.source, qubit_cap);
        for (const auto& b : s.blocks) {
            const Unitary g = gate_layer_unitary(b.sandwich);
            step = g * prop(b.duration / nt) * g * step;
        }
    } else {
        for (const auto& b : s.blocks) {
            const TwoBodyHamiltonian hk = conjugate_by_gates(s.source, b.sandwich);
            step = evolve_pairwise_trotter(hk, b.duration / nt, qubit_cap) * step;
        }
    }
    Unitary u = Eigen::MatrixXcd::Identity(dim, dim);
    for (int rep = 0; rep < nt; ++rep) u = step * u;
    return u;
}

}  // namespace daqc

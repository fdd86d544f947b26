#pragma once

#include <Eigen/Dense>

#include "daqc/hamiltonian.hpp"
#include "daqc/scheduler.hpp"

namespace daqc {

using Unitary = Eigen::MatrixXcd;

enum class SimulationMode { Exact, PairwiseTrotter };

/// ||U U^dag - I||, the unitarity defect.
double unitarity_defect(const Unitary& u);

double frobenius_distance(const Unitary& u, const Unitary& v);

/// exp(-i t H) via Hermitian eigendecomposition of the dense matrix.
Unitary evolve(const TwoBodyHamiltonian& h, double t, int qubit_cap = 10);

/// Cached eigendecomposition of one Hamiltonian for repeated evolution times.
class Propagator {
public:
    explicit Propagator(const TwoBodyHamiltonian& h, int qubit_cap = 10);
    Unitary operator()(double t) const;
    double norm() const { return norm_; }
    const Eigen::MatrixXcd& eigenvectors() const { return vectors_; }
    const Eigen::VectorXd& eigenvalues() const { return values_; }

private:
    Eigen::VectorXd values_;
    Eigen::MatrixXcd vectors_;
    double norm_ = 0.0;
};

/// First-order pairwise Trotter factorization: ordered product over qubit
/// pairs (ascending b_l) of the pair-local exponential embedded with
/// identities on the remaining qubits.
Unitary evolve_pairwise_trotter(const TwoBodyHamiltonian& h, double t, int qubit_cap = 10);

/// Coupling signs multiplied by the conjugation signs of the selection.
TwoBodyHamiltonian conjugate_by_gates(const TwoBodyHamiltonian& h, const GateSelection& sel);

/// Dense unitary of one digital layer (tensor product of the selection).
Unitary gate_layer_unitary(const GateSelection& sel);

/// Simulates the schedule: blocks applied left to right in time,
/// repeated trotter_steps times with durations scaled by 1/n_T.
Unitary run_schedule(const Schedule& s, SimulationMode mode = SimulationMode::Exact,
                     int qubit_cap = 10);

}  // namespace daqc

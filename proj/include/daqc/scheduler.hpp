#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "daqc/hamiltonian.hpp"
#include "daqc/pauli.hpp"
#include "daqc/signmatrix.hpp"

namespace daqc {

/// One analog evolution sandwiched by a digital gate layer applied before
/// and after. Emitted schedules always have duration >= 0; negative values
/// appear only in raw solver output.
struct AnalogBlock {
    double duration = 0.0;
    GateSelection sandwich;
};

struct Schedule {
    int n = 0;
    TwoBodyHamiltonian source;
    double total_time = 0.0;  // simulation time T of the compiled target
    int trotter_steps = 1;
    std::vector<AnalogBlock> blocks;

    double total_analog_time() const;
};

struct SolveReport {
    double residual = 0.0;
    int negative_time_count = 0;
    double total_analog_time = 0.0;
    double error_bound = 0.0;
    // analog-time diagnostics
    double analog_lower_bound = 0.0;   // T ||H_T|| / ||H_S||
    double coupling_ratio = 0.0;       // max|g| / min|h| over active rows
    double min_block_time = 0.0;
    double bang_rule_metric = 0.0;     // min(t_k) / t_SQG
    int block_count = 0;
};

enum class Protocol { AutoDetect, ZZ, General };

/// Solves M t = b. Square systems use a rank-checked QR; wide systems
/// (rows dropped for absent couplings) take the minimum-norm solution.
/// Throws SingularSystemError when the residual exceeds 1e-9 ||b||.
Eigen::VectorXd solve_times(const Eigen::MatrixXd& m, const Eigen::VectorXd& b);

/// Exact protocol schedule: one block per protocol column, X-pair sandwiches
/// for the ZZ warm-up protocol or Pauli-pair sandwiches for the general one.
/// Throws NegativeTimesError when the raw solve contains negative times
/// (the caller should use solve_positive_times instead).
Schedule build_exact_schedule(const TwoBodyHamiltonian& source, const TwoBodyHamiltonian& target,
                              double T, Protocol protocol = Protocol::AutoDetect);

/// Non-negative schedule via Lawson-Hanson NNLS over the 4^n selection pool
/// (identity first, then protocol columns, then the rest lexicographically).
/// Blocks below the zero threshold 1e-12 T are dropped.
Schedule solve_positive_times(const TwoBodyHamiltonian& source, const TwoBodyHamiltonian& target,
                              double T, SolveReport* report = nullptr, int pool_cap = 8);

/// Splits every duration by n_T and repeats the block sequence n_T times.
Schedule trotterize(const Schedule& s, int n_t);

/// First-order Trotter bound
/// (2/n_T) (t_A ||H_S||)^2 exp(((n_T+2)/n_T) t_A ||H_S||).
double error_bound(const Schedule& s);

/// t_A, its lower bound, the coupling ratio and the bang-rule metric.
SolveReport analog_time_diagnostics(const Schedule& s, const TwoBodyHamiltonian& target,
                                    double t_sqg = 1e-2);

void write_schedule(std::ostream& out, const Schedule& s);
Schedule read_schedule(std::istream& in);
Schedule load_schedule(const std::string& path);

}  // namespace daqc

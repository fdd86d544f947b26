#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "daqc/hamiltonian.hpp"
#include "daqc/simulator.hpp"

namespace daqc {

/// Angles of the arbitrary single-qubit rotation
/// R(theta, phi, lambda) = [[cos(t/2), -e^{i lambda} sin(t/2)],
///                          [e^{i phi} sin(t/2), e^{i(lambda+phi)} cos(t/2)]],
/// wrapped into [0, 2pi) on construction.
struct RotationAngles {
    double theta = 0.0, phi = 0.0, lambda = 0.0;
    RotationAngles() = default;
    RotationAngles(double t, double p, double l);
};

/// One digital layer: the same rotation on all even 1-based positions and
/// another on all odd positions (odd = {1, 3, ...}).
struct RotationLayer {
    RotationAngles even, odd;
};

enum class TimeMode { Fixed, Free };

/// K analog blocks sandwiched by K+1 rotation layers:
/// U = L_{K+1} A_K L_K ... A_1 L_1.
struct LayeredCircuit {
    int n = 0;
    int K = 0;
    std::vector<RotationLayer> layers;  // K+1
    std::vector<double> block_times;    // K, nonnegative
    TimeMode time_mode = TimeMode::Fixed;
};

struct OptimizationProblem {
    TwoBodyHamiltonian source;
    TwoBodyHamiltonian target;
    double T = 1.0;
    int K = 1;
    TimeMode time_mode = TimeMode::Fixed;
    SimulationMode cost_mode = SimulationMode::Exact;
};

struct OptimizationConfig {
    int bayes_steps = 10;
    int runs = 20;
    std::uint64_t seed = 0;
    SimulationMode cost_mode = SimulationMode::Exact;
    TimeMode time_mode = TimeMode::Fixed;
    int gd_max_iters = 1200;
    double gd_step = 0.05;       // initial line-search step, box-normalized
    double gd_tolerance = 1e-8;  // stop when the gradient norm drops below
    double fd_step = 1e-4;       // central-difference step, box-normalized
    bool baseline_seeding = true;
    int threads = 0;  // 0 = hardware concurrency
    int init_design_cap = 40;
    int acquisition_candidates = 2048;
    double gp_length_scale = 0.2;
    double gp_noise = 1e-6;
};

struct OptimizationResult {
    LayeredCircuit best_circuit;
    double best_cost = 0.0;  // under the optimization cost mode
    double exact_cost = 0.0; // best circuit re-evaluated with the exact simulator
    std::vector<std::vector<double>> cost_trace;  // per run, in evaluation order
    double baseline_cost = std::numeric_limits<double>::quiet_NaN();
    double improvement = std::numeric_limits<double>::quiet_NaN();
    int best_run = -1;
};

Eigen::Matrix2cd rotation_unitary(const RotationAngles& a);

/// Tensor product of the layer rotations over all qubits.
Unitary layer_unitary(const RotationLayer& layer, int n);

Unitary circuit_unitary(const LayeredCircuit& c, const TwoBodyHamiltonian& source,
                        SimulationMode mode = SimulationMode::Exact, int qubit_cap = 10);

double cost(const LayeredCircuit& c, const TwoBodyHamiltonian& source,
            const Unitary& target_unitary, SimulationMode mode = SimulationMode::Exact);

/// XY chain target (nearest-neighbour XX + YY couplings of strength g).
TwoBodyHamiltonian xy_chain_target(int n, double g);

/// Nearest-neighbour xz/zx/zz source with strengths drawn from
/// Normal(g, sigma^2); sigma = 0 gives the homogeneous chain.
TwoBodyHamiltonian sample_inhomogeneous_source(double g, double sigma, int n,
                                               std::uint64_t seed);

struct BaselineResult {
    LayeredCircuit circuit;
    /// The plain gate-product unitary (the reference Fig.-3 baseline).
    Unitary unitary;
    /// circuit_unitary(circuit) = phase_vs_product * unitary. The layered
    /// form is exact (phase 1) when the qubit count allows it; otherwise the
    /// leftover phase is +-i and recorded here.
    std::complex<double> phase_vs_product{1.0, 0.0};
};

/// Two-stage first-order Trotter baseline for the homogeneous XY problem:
/// X-sandwich synthesis of the ZZ chain, conjugated into YY and XX parts,
/// 4 analog blocks per Trotter step, expressed as a LayeredCircuit.
BaselineResult make_trotter_baseline(int n, double g, double T, int n_trotter);

/// True when the optimizer can attach a Trotter baseline to the problem:
/// XY-chain target and K a positive multiple of 4. Returns the chain
/// coupling g through the out parameter.
bool baseline_applies(const OptimizationProblem& p, double* g_out = nullptr);

/// Zero-mean Gaussian process with a squared-exponential kernel on
/// box-normalized inputs (y is standardized internally).
class GaussianProcess {
public:
    GaussianProcess(double length_scale, double noise)
        : length_scale_(length_scale), noise_(noise) {}
    void fit(const std::vector<Eigen::VectorXd>& x, const std::vector<double>& y);
    /// Posterior mean and standard deviation.
    std::pair<double, double> predict(const Eigen::VectorXd& q) const;

private:
    double length_scale_, noise_;
    std::vector<Eigen::VectorXd> x_;
    Eigen::MatrixXd chol_;  // lower Cholesky factor
    Eigen::VectorXd alpha_;
    double y_mean_ = 0.0, y_scale_ = 1.0;
};

double expected_improvement(double mean, double stddev, double best);

struct BayesRun {
    std::vector<Eigen::VectorXd> points;  // box-normalized coordinates
    std::vector<double> costs;
    int incumbent = -1;
};

/// The Bayesian stage alone: cfg.runs independent seeded runs, each an
/// initial design (baseline-equivalent point when applicable, plus Latin
/// hypercube fill) followed by cfg.bayes_steps expected-improvement
/// acquisitions.
std::vector<BayesRun> bayesian_search(const OptimizationProblem& p,
                                      const OptimizationConfig& cfg);

/// Projected gradient descent with central finite differences and a
/// backtracking (Barzilai-Borwein seeded) line search. Angles phi/lambda
/// wrap, theta and block times are box-clamped. Never returns a circuit
/// worse than the start.
LayeredCircuit gradient_descent(const LayeredCircuit& start, const OptimizationProblem& p,
                                const OptimizationConfig& cfg);

/// Full strategy: per run a Bayesian search then gradient descent from the
/// run's incumbent; global best across runs, compared against the Trotter
/// baseline when one applies.
OptimizationResult optimize(const OptimizationProblem& p, const OptimizationConfig& cfg);

void write_optimization_result(std::ostream& out, const OptimizationProblem& p,
                               const OptimizationConfig& cfg, const OptimizationResult& r);

}  // namespace daqc

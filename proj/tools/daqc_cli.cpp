#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "daqc/errors.hpp"
#include "daqc/hamiltonian.hpp"
#include "daqc/optimizer.hpp"
#include "daqc/scheduler.hpp"
#include "daqc/signmatrix.hpp"
#include "daqc/simulator.hpp"

namespace {

using namespace daqc;

constexpr int kExitUsage = 1;
constexpr int kExitUnsimulable = 2;
constexpr int kExitSingular = 3;
constexpr int kExitOptimizationFailed = 4;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void print_report(const SolveReport& r) {
    std::cout << "blocks " << r.block_count << "\n"
              << "residual " << fmt17(r.residual) << "\n"
              << "total_analog_time " << fmt17(r.total_analog_time) << "\n"
              << "analog_lower_bound " << fmt17(r.analog_lower_bound) << "\n"
              << "coupling_ratio " << fmt17(r.coupling_ratio) << "\n"
              << "min_block_time " << fmt17(r.min_block_time) << "\n"
              << "bang_rule_metric " << fmt17(r.bang_rule_metric) << "\n"
              << "error_bound " << fmt17(r.error_bound) << "\n";
}

int cmd_compile(const std::string& source_file, const std::string& target_file, double T,
                bool positive, int trotter_steps, const std::string& protocol_name,
                const std::string& out_file) {
    const TwoBodyHamiltonian source = load_hamiltonian(source_file);
    const TwoBodyHamiltonian target = load_hamiltonian(target_file);
    Protocol protocol = Protocol::AutoDetect;
    if (protocol_name == "zz") protocol = Protocol::ZZ;
    else if (protocol_name == "general") protocol = Protocol::General;

    Schedule s;
    SolveReport report;
    if (positive) {
        s = solve_positive_times(source, target, T, &report);
    } else {
        s = build_exact_schedule(source, target, T, protocol);
        report.residual = 0.0;
        report.block_count = static_cast<int>(s.blocks.size());
        report.total_analog_time = s.total_analog_time();
        report.error_bound = error_bound(s);
    }
    if (trotter_steps > 1) s.trotter_steps = trotter_steps;

    const SolveReport diag = analog_time_diagnostics(s, target);
    report.analog_lower_bound = diag.analog_lower_bound;
    report.coupling_ratio = diag.coupling_ratio;
    report.min_block_time = diag.min_block_time;
    report.bang_rule_metric = diag.bang_rule_metric;
    print_report(report);

    if (!out_file.empty()) {
        std::ofstream out(out_file);
        if (!out) throw std::runtime_error("cannot write " + out_file);
        write_schedule(out, s);
        std::cout << "schedule written to " << out_file << "\n";
    }
    return 0;
}

int cmd_verify(const std::string& schedule_file, const std::string& target_file,
               const std::string& mode_name, const std::vector<int>& sweep,
               const std::string& csv_file) {
    Schedule s = load_schedule(schedule_file);
    const TwoBodyHamiltonian target = load_hamiltonian(target_file);
    if (target.n() != s.n) throw std::invalid_argument("schedule and target qubit counts differ");
    const SimulationMode mode = (mode_name == "pairwise_trotter") ? SimulationMode::PairwiseTrotter
                                                                  : SimulationMode::Exact;
    const Unitary ut = evolve(target, s.total_time);

    const auto measure = [&](int nt) {
        Schedule sp = s;
        sp.trotter_steps = nt;
        const Unitary u = run_schedule(sp, mode);
        return std::make_pair(frobenius_distance(u, ut), error_bound(sp));
    };

    const auto [dist, bound] = measure(s.trotter_steps);
    std::cout << "distance " << fmt17(dist) << "\n"
              << "bound " << fmt17(bound) << "\n";
    const SolveReport diag = analog_time_diagnostics(s, target);
    std::cout << "total_analog_time " << fmt17(diag.total_analog_time) << "\n"
              << "analog_lower_bound " << fmt17(diag.analog_lower_bound) << "\n"
              << "coupling_ratio " << fmt17(diag.coupling_ratio) << "\n"
              << "bang_rule_metric " << fmt17(diag.bang_rule_metric) << "\n";

    if (!sweep.empty()) {
        std::ostream* os = &std::cout;
        std::ofstream fout;
        if (!csv_file.empty()) {
            fout.open(csv_file);
            if (!fout) throw std::runtime_error("cannot write " + csv_file);
            os = &fout;
        }
        *os << "# daqc verify sweep schedule=" << schedule_file << " target=" << target_file
            << " mode=" << mode_name << "\n";
        *os << "n_T,distance,bound\n";
        for (int nt : sweep) {
            const auto [d, b] = measure(nt);
            *os << nt << "," << fmt17(d) << "," << fmt17(b) << "\n";
        }
    }
    return 0;
}

int cmd_optimize(const std::string& source_file, const std::string& target_file, double T, int K,
                 bool free_time, const std::string& mode_name, std::uint64_t seed, int runs,
                 int bayes_steps, int threads, const std::string& out_file) {
    OptimizationProblem p;
    p.source = load_hamiltonian(source_file);
    p.target = load_hamiltonian(target_file);
    p.T = T;
    p.K = K;
    OptimizationConfig cfg;
    cfg.seed = seed;
    cfg.runs = runs;
    cfg.bayes_steps = bayes_steps;
    cfg.threads = threads;
    cfg.time_mode = free_time ? TimeMode::Free : TimeMode::Fixed;
    cfg.cost_mode = (mode_name == "pairwise_trotter") ? SimulationMode::PairwiseTrotter
                                                      : SimulationMode::Exact;
    p.time_mode = cfg.time_mode;
    p.cost_mode = cfg.cost_mode;

    const OptimizationResult r = optimize(p, cfg);

    std::vector<double> finals;
    for (const auto& trace : r.cost_trace)
        if (!trace.empty()) finals.push_back(trace.back());
    std::sort(finals.begin(), finals.end());
    const auto quantile = [&](double q) {
        if (finals.empty()) return 0.0;
        const double pos = q * static_cast<double>(finals.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, finals.size() - 1);
        return finals[lo] + (pos - static_cast<double>(lo)) * (finals[hi] - finals[lo]);
    };

    std::cout << "best_cost " << fmt17(r.best_cost) << "\n"
              << "exact_cost " << fmt17(r.exact_cost) << "\n"
              << "baseline_cost " << fmt17(r.baseline_cost) << "\n"
              << "improvement " << fmt17(r.improvement) << "\n"
              << "run_median " << fmt17(quantile(0.5)) << "\n"
              << "run_iqr " << fmt17(quantile(0.75) - quantile(0.25)) << "\n";

    if (!out_file.empty()) {
        std::ofstream out(out_file);
        if (!out) throw std::runtime_error("cannot write " + out_file);
        write_optimization_result(out, p, cfg, r);
        std::cout << "result written to " << out_file << "\n";
    }
    if (!std::isnan(r.improvement) && r.improvement < 0.0) return kExitOptimizationFailed;
    return 0;
}

int cmd_baseline(int n, double g, double T, int trotter_steps) {
    const BaselineResult res = make_trotter_baseline(n, g, T, trotter_steps);
    const TwoBodyHamiltonian target = xy_chain_target(n, g);
    const Unitary ut = evolve(target, T);
    const TwoBodyHamiltonian source = sample_inhomogeneous_source(g, 0.0, n, 0);
    std::cout << "blocks " << res.circuit.K << "\n"
              << "cost " << fmt17(frobenius_distance(res.unitary, ut)) << "\n"
              << "phase_vs_product " << fmt17(res.phase_vs_product.real()) << "+"
              << fmt17(res.phase_vs_product.imag()) << "i\n"
              << "total_analog_time "
              << fmt17(static_cast<double>(res.circuit.K) * T / (2.0 * trotter_steps)) << "\n";
    (void)source;
    return 0;
}

int run_fig3_series(std::ostream& csv, const TwoBodyHamiltonian& source,
                    const TwoBodyHamiltonian& target, const std::string& series, double T,
                    TimeMode tm, SimulationMode mode, std::uint64_t seed, int runs, int kmax,
                    int threads) {
    for (int K = 1; K <= kmax; ++K) {
        OptimizationProblem p;
        p.source = source;
        p.target = target;
        p.T = T;
        p.K = K;
        p.time_mode = tm;
        p.cost_mode = mode;
        OptimizationConfig cfg;
        cfg.seed = seed;
        cfg.runs = runs;
        cfg.time_mode = tm;
        cfg.cost_mode = mode;
        cfg.threads = threads;
        const OptimizationResult r = optimize(p, cfg);
        std::vector<double> finals;
        for (const auto& trace : r.cost_trace)
            if (!trace.empty()) finals.push_back(trace.back());
        std::sort(finals.begin(), finals.end());
        const double med = finals[finals.size() / 2];
        const double q1 = finals[finals.size() / 4];
        const double q3 = finals[(3 * finals.size()) / 4];
        csv << series << "," << K << "," << fmt17(r.exact_cost) << "," << fmt17(med) << ","
            << fmt17(q3 - q1) << "," << fmt17(r.baseline_cost) << "\n";
        csv.flush();
    }
    return 0;
}

int cmd_repro(double T, const std::string& out_dir, std::uint64_t seed, int runs, int kmax,
              int threads) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const int n = 6;
    const double g = 1.0;
    const TwoBodyHamiltonian target = xy_chain_target(n, g);
    const TwoBodyHamiltonian homog = sample_inhomogeneous_source(g, 0.0, n, 0);
    const TwoBodyHamiltonian inhomog = sample_inhomogeneous_source(g, 0.175, n, seed);

    {
        std::ofstream csv(out_dir + "/baseline.csv");
        csv << "# daqc repro fig3 baseline T=" << fmt17(T) << "\n";
        csv << "n_T,blocks,cost\n";
        const Unitary ut = evolve(target, T);
        for (int nt = 1; nt <= 19; ++nt) {
            const BaselineResult res = make_trotter_baseline(n, g, T, nt);
            csv << nt << "," << res.circuit.K << ","
                << fmt17(frobenius_distance(res.unitary, ut)) << "\n";
        }
    }
    {
        std::ofstream csv(out_dir + "/optimized.csv");
        csv << "# daqc repro fig3 optimized T=" << fmt17(T) << " seed=" << seed
            << " runs=" << runs << "\n";
        csv << "series,K,best_exact_cost,median_cost,iqr,baseline_cost\n";
        run_fig3_series(csv, homog, target, "homogeneous_fixed", T, TimeMode::Fixed,
                        SimulationMode::Exact, seed, runs, kmax, threads);
        run_fig3_series(csv, inhomog, target, "inhomogeneous_fixed", T, TimeMode::Fixed,
                        SimulationMode::Exact, seed, runs, kmax, threads);
        run_fig3_series(csv, homog, target, "homogeneous_free", T, TimeMode::Free,
                        SimulationMode::Exact, seed, runs, kmax, threads);
        run_fig3_series(csv, inhomog, target, "inhomogeneous_free", T, TimeMode::Free,
                        SimulationMode::Exact, seed, runs, kmax, threads);
    }
    {
        std::ofstream csv(out_dir + "/optimized_pairwise.csv");
        csv << "# daqc repro fig3b pairwise-trotter cost T=" << fmt17(T) << " seed=" << seed
            << "\n";
        csv << "series,K,best_exact_cost,median_cost,iqr,baseline_cost\n";
        run_fig3_series(csv, homog, target, "homogeneous_fixed_pairwise", T, TimeMode::Fixed,
                        SimulationMode::PairwiseTrotter, seed, 1, kmax, threads);
        run_fig3_series(csv, inhomog, target, "inhomogeneous_fixed_pairwise", T, TimeMode::Fixed,
                        SimulationMode::PairwiseTrotter, seed, 1, kmax, threads);
    }
    std::cout << "wrote " << out_dir << "/baseline.csv, optimized.csv, optimized_pairwise.csv\n";
    return 0;
}

int cmd_matrix(int n, const std::string& protocol, bool check, const std::string& out_file) {
    Eigen::MatrixXi m;
    if (protocol == "zz") {
        m = zz_matrix(n);
    } else {
        m = build_protocol_matrix(n).entries;
    }
    std::ostream* os = &std::cout;
    std::ofstream fout;
    if (!out_file.empty()) {
        fout.open(out_file);
        if (!fout) throw std::runtime_error("cannot write " + out_file);
        os = &fout;
    }
    *os << "# daqc matrix n=" << n << " protocol=" << protocol << " dim=" << m.rows() << "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            *os << (c ? "," : "") << m(r, c);
        *os << "\n";
    }
    if (check) {
        bool ok = true;
        const bool nonsingular = is_nonsingular(m);
        const bool nonsingular_exact = rank_mod_prime(m) == m.rows();
        std::cout << "dimension " << m.rows() << "\n";
        std::cout << "nonsingular " << (nonsingular ? "true" : "false") << "\n";
        std::cout << "nonsingular_exact_gf(1000000007) "
                  << (nonsingular_exact ? "true" : "false") << "\n";
        if (protocol == "general") {
            const SignMatrix sm = build_protocol_matrix(n);
            const bool recursive_equal = (build_protocol_matrix_recursive(n) == sm.entries);
            std::cout << "recursive_equals_columns " << (recursive_equal ? "true" : "false")
                      << "\n";
            ok = ok && recursive_equal;
            bool columns_ok = true;
            for (Eigen::Index c = 0; c < sm.entries.cols(); ++c)
                columns_ok = columns_ok &&
                             (sm.entries.col(c) == column_for_selection(sm.column_gates[c], n));
            std::cout << "columns_match_selections " << (columns_ok ? "true" : "false") << "\n";
            ok = ok && columns_ok;
            // sub-block identities, exact integer arithmetic
            using B = Eigen::Matrix<int, 9, 9>;
            const B m2 = subblock(SubBlockKind::M2), m11 = subblock(SubBlockKind::M11),
                    m12 = subblock(SubBlockKind::M12), m0 = subblock(SubBlockKind::M0);
            const bool s_ok = (m11 * m12 == m12 * m11) && (m2 * m0 == m0 * m2) &&
                              (m11 * m12 == m2 * m0) && (m11 * m12 == m0) &&
                              (m11 * m0 == -3 * m0) && (m12 * m0 == -3 * m0) &&
                              (m0 * m0 == 9 * m0) && (m11 * m11 == -3 * m2 * m11) &&
                              (m12 * m12 == -3 * m2 * m12);
            std::cout << "subblock_identities " << (s_ok ? "true" : "false") << "\n";
            ok = ok && s_ok;
            if (n <= 3) {
                Eigen::VectorXi sum = Eigen::VectorXi::Zero(9 * n * (n - 1) / 2);
                const std::size_t total = std::size_t{1} << (2 * n);
                for (std::size_t code = 0; code < total; ++code) {
                    GateSelection sel(n);
                    std::size_t cc = code;
                    for (int q = n - 1; q >= 0; --q) {
                        sel[q] = static_cast<Gate>(cc & 3);
                        cc >>= 2;
                    }
                    sum += column_for_selection(sel, n);
                }
                const bool bary = (sum.cwiseAbs().maxCoeff() == 0);
                std::cout << "barycenter_identity " << (bary ? "true" : "false") << "\n";
                ok = ok && bary;
            }
        }
        if (!ok) return kExitSingular;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"daqc: compile, verify and optimize digital-analog schedules"};
    app.require_subcommand(1);

    // compile
    auto* compile = app.add_subcommand("compile", "compile a target Hamiltonian into a schedule");
    std::string source_file, target_file, out_file, protocol = "auto";
    double T = 0.0;
    bool positive = false;
    int trotter_steps = 1;
    compile->add_option("--source", source_file, "source Hamiltonian file")->required();
    compile->add_option("--target", target_file, "target Hamiltonian file")->required();
    compile->add_option("-T,--time", T, "simulation time T")->required();
    compile->add_flag("--positive", positive, "use the non-negative (NNLS) solver");
    compile->add_option("--trotter-steps", trotter_steps, "Trotter repetitions recorded");
    compile->add_option("--protocol", protocol, "auto|zz|general")
        ->check(CLI::IsMember({"auto", "zz", "general"}));
    compile->add_option("-o,--out", out_file, "schedule output file");

    // verify
    auto* verify = app.add_subcommand("verify", "simulate a schedule against a target");
    std::string schedule_file, mode = "exact", csv_file;
    std::vector<int> sweep;
    verify->add_option("--schedule", schedule_file, "schedule file")->required();
    verify->add_option("--target", target_file, "target Hamiltonian file")->required();
    verify->add_option("--mode", mode, "exact|pairwise_trotter")
        ->check(CLI::IsMember({"exact", "pairwise_trotter"}));
    verify->add_option("--trotter-steps-sweep", sweep, "sweep n_T values, CSV rows out");
    verify->add_option("--csv", csv_file, "sweep CSV output file");

    // optimize
    auto* opt = app.add_subcommand("optimize", "fixed-depth schedule optimization");
    int K = 4, runs = 20, bayes_steps = 10, threads = 0;
    std::uint64_t seed = 0;
    bool free_time = false, fixed_time = false;
    opt->add_option("--source", source_file, "source Hamiltonian file")->required();
    opt->add_option("--target", target_file, "target Hamiltonian file")->required();
    opt->add_option("-T,--time", T, "simulation time T")->required();
    opt->add_option("-K,--blocks", K, "number of analog blocks")->required();
    opt->add_flag("--free-time", free_time, "optimize block times too");
    opt->add_flag("--fixed-time", fixed_time, "fix block times to T/K (default)");
    opt->add_option("--mode", mode, "exact|pairwise_trotter")
        ->check(CLI::IsMember({"exact", "pairwise_trotter"}));
    opt->add_option("--seed", seed, "master seed");
    opt->add_option("--runs", runs, "independent optimization runs");
    opt->add_option("--bayes-steps", bayes_steps, "acquisitions per run");
    opt->add_option("--threads", threads, "worker threads (0 = all cores)");
    opt->add_option("-o,--out", out_file, "result output file");

    // baseline
    auto* baseline = app.add_subcommand("baseline", "Trotter baseline for the XY chain");
    int bn = 6;
    double bg = 1.0;
    baseline->add_option("-n,--qubits", bn, "qubit count");
    baseline->add_option("--g", bg, "chain coupling strength");
    baseline->add_option("-T,--time", T, "simulation time T")->required();
    baseline->add_option("--trotter-steps", trotter_steps, "Trotter steps (4 blocks each)");

    // repro
    auto* repro = app.add_subcommand("repro", "reproduce the distance-vs-blocks experiment");
    std::string fig_name;
    std::string out_dir = "repro-out";
    int kmax = 8;
    repro->add_option("figure", fig_name, "which figure (fig3)")->required();
    repro->add_option("-T,--time", T, "simulation time T")->required();
    repro->add_option("--out-dir", out_dir, "output directory");
    repro->add_option("--seed", seed, "master seed");
    repro->add_option("--runs", runs, "runs per point");
    repro->add_option("--kmax", kmax, "largest block count");
    repro->add_option("--threads", threads, "worker threads");

    // matrix
    auto* matrix = app.add_subcommand("matrix", "emit a protocol sign matrix as CSV");
    int mn = 2;
    bool check = false;
    matrix->add_option("-n,--qubits", mn, "qubit count")->required();
    matrix->add_option("--protocol", protocol, "zz|general")
        ->check(CLI::IsMember({"zz", "general"}));
    matrix->add_flag("--check", check, "run structural checks");
    matrix->add_option("-o,--out", out_file, "CSV output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (compile->parsed())
            return cmd_compile(source_file, target_file, T, positive, trotter_steps, protocol,
                               out_file);
        if (verify->parsed()) return cmd_verify(schedule_file, target_file, mode, sweep, csv_file);
        if (opt->parsed())
            return cmd_optimize(source_file, target_file, T, K, free_time, mode, seed, runs,
                                bayes_steps, threads, out_file);
        if (baseline->parsed()) return cmd_baseline(bn, bg, T, trotter_steps);
        if (repro->parsed()) {
            if (fig_name != "fig3") {
                std::cerr << "unknown figure '" << fig_name << "' (expected fig3)\n";
                return kExitUsage;
            }
            return cmd_repro(T, out_dir, seed, runs, kmax, threads);
        }
        if (matrix->parsed()) return cmd_matrix(mn, protocol == "auto" ? "general" : protocol,
                                                check, out_file);
    } catch (const UnsimulableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnsimulable;
    } catch (const SingularSystemError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSingular;
    } catch (const NegativeTimesError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSingular;
    } catch (const OptimizationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOptimizationFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

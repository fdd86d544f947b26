#include "daqc/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "daqc/errors.hpp"
#include "daqc/nnls.hpp"

namespace daqc {

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// Pool ordering: identity, the 9 n(n-1)/2 protocol selections, then every
// remaining selection in lexicographic gate order.
std::vector<GateSelection> full_selection_pool(int n) {
    std::vector<GateSelection> pool;
    std::set<std::string> seen;
    const auto push = [&](GateSelection sel) {
        auto key = selection_string(sel);
        if (seen.insert(std::move(key)).second) pool.push_back(std::move(sel));
    };
    push(GateSelection(n, Gate::I));
    const int N = n * (n - 1) / 2;
    for (int b = 1; b <= N; ++b) {
        const auto [k, l] = pair_unindex(b, n);
        for (int a = 1; a <= 3; ++a)
            for (int bb = 1; bb <= 3; ++bb) {
                GateSelection sel(n, Gate::I);
                sel[k - 1] = static_cast<Gate>(a);
                sel[l - 1] = static_cast<Gate>(bb);
                push(std::move(sel));
            }
    }
    const std::size_t total = std::size_t{1} << (2 * n);
    for (std::size_t code = 0; code < total; ++code) {
        GateSelection sel(n);
        std::size_t c = code;
        // qubit 1 varies slowest
        for (int q = n - 1; q >= 0; --q) {
            sel[q] = static_cast<Gate>(c & 3);
            c >>= 2;
        }
        push(std::move(sel));
    }
    return pool;
}

}  // namespace

double Schedule::total_analog_time() const {
    double t = 0.0;
    for (const auto& b : blocks) t += b.duration;
    return t;
}

Eigen::VectorXd solve_times(const Eigen::MatrixXd& m, const Eigen::VectorXd& b) {
    if (m.rows() != b.size()) throw std::invalid_argument("solve_times: dimension mismatch");
    if (m.rows() > m.cols())
        throw std::invalid_argument("solve_times: more equations than protocol columns");
    Eigen::VectorXd t;
    if (m.rows() == m.cols()) {
        const auto qr = m.colPivHouseholderQr();
        if (qr.rank() < m.rows())
            throw SingularSystemError("square system of dimension " + std::to_string(m.rows()) +
                                      " has rank " + std::to_string(qr.rank()));
        t = qr.solve(b);
    } else {
        t = m.completeOrthogonalDecomposition().solve(b);
    }
    const double scale = std::max(b.norm(), 1.0);
    const double resid = (m * t - b).norm();
    if (resid > 1e-9 * scale)
        throw SingularSystemError("linear system is singular or inconsistent (residual " +
                                  fmt17(resid) + ")");
    return t;
}

Schedule build_exact_schedule(const TwoBodyHamiltonian& source, const TwoBodyHamiltonian& target,
                              double T, Protocol protocol) {
    const int n = source.n();
    const CouplingVector rhs = ratio_vector(target, source, T);

    if (protocol == Protocol::AutoDetect)
        protocol = (source.is_pure_zz() && target.is_pure_zz()) ? Protocol::ZZ : Protocol::General;

    std::vector<GateSelection> sandwiches;
    Eigen::MatrixXd m;
    if (protocol == Protocol::ZZ) {
        if (!source.is_pure_zz() || !target.is_pure_zz())
            throw std::invalid_argument("ZZ protocol requires pure-ZZ source and target");
        const Eigen::MatrixXi mz = zz_matrix(n);
        // active pair rows: global row g_l(i,j,z,z) -> pair index b
        std::vector<int> rows;
        for (int gidx : rhs.active_rows) rows.push_back((gidx - 1) / 9 + 1);
        m.resize(static_cast<Eigen::Index>(rows.size()), mz.cols());
        for (std::size_t r = 0; r < rows.size(); ++r)
            m.row(static_cast<Eigen::Index>(r)) = mz.row(rows[r] - 1).cast<double>();
        const int N = n * (n - 1) / 2;
        for (int bcol = 1; bcol <= N; ++bcol) sandwiches.push_back(zz_selection(bcol, n));
    } else {
        const SignMatrix sm = build_protocol_matrix(n);
        m.resize(static_cast<Eigen::Index>(rhs.active_rows.size()), sm.entries.cols());
        for (std::size_t r = 0; r < rhs.active_rows.size(); ++r)
            m.row(static_cast<Eigen::Index>(r)) =
                sm.entries.row(rhs.active_rows[r] - 1).cast<double>();
        sandwiches = sm.column_gates;
    }

    const Eigen::VectorXd t = solve_times(m, rhs.entries);

    const double zero_threshold = 1e-12 * std::max(std::abs(T), 1.0);
    int negatives = 0;
    std::ostringstream bad;
    for (Eigen::Index k = 0; k < t.size(); ++k) {
        if (t(k) < -zero_threshold) {
            ++negatives;
            if (negatives <= 8)
                bad << (negatives > 1 ? ", " : "") << selection_string(sandwiches[k]) << ":"
                    << fmt17(t(k));
        }
    }
    if (negatives > 0)
        throw NegativeTimesError(negatives, "exact solve produced " + std::to_string(negatives) +
                                                " negative block times (" + bad.str() +
                                                "); use solve_positive_times");

    Schedule s;
    s.n = n;
    s.source = source;
    s.total_time = T;
    s.trotter_steps = 1;
    for (Eigen::Index k = 0; k < t.size(); ++k) {
        if (t(k) >= zero_threshold)
            s.blocks.push_back(AnalogBlock{t(k), sandwiches[k]});
    }
    return s;
}

Schedule solve_positive_times(const TwoBodyHamiltonian& source, const TwoBodyHamiltonian& target,
                              double T, SolveReport* report, int pool_cap) {
    const int n = source.n();
    if (n > pool_cap)
        throw std::invalid_argument("solve_positive_times: n=" + std::to_string(n) +
                                    " exceeds the 4^n pool cap of " + std::to_string(pool_cap));
    const CouplingVector rhs = ratio_vector(target, source, T);
    const auto pool = full_selection_pool(n);

    Eigen::MatrixXd a(static_cast<Eigen::Index>(rhs.active_rows.size()),
                      static_cast<Eigen::Index>(pool.size()));
    for (std::size_t c = 0; c < pool.size(); ++c) {
        const Eigen::VectorXi col = column_for_selection(pool[c], n);
        for (std::size_t r = 0; r < rhs.active_rows.size(); ++r)
            a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                static_cast<double>(col(rhs.active_rows[r] - 1));
    }

    const NnlsResult res = nnls(a, rhs.entries);
    const double tol = 1e-8 * std::max(rhs.entries.norm(), 1.0);
    if (!res.converged || res.residual_norm > tol)
        throw SingularSystemError("NNLS did not reach the residual tolerance (residual " +
                                  fmt17(res.residual_norm) + ")");

    Schedule s;
    s.n = n;
    s.source = source;
    s.total_time = T;
    s.trotter_steps = 1;
    const double zero_threshold = 1e-12 * std::max(std::abs(T), 1.0);
    for (Eigen::Index k = 0; k < res.x.size(); ++k) {
        if (res.x(k) > zero_threshold)
            s.blocks.push_back(AnalogBlock{res.x(k), pool[static_cast<std::size_t>(k)]});
    }
    if (report) {
        *report = SolveReport{};
        report->residual = res.residual_norm;
        report->negative_time_count = 0;
        report->total_analog_time = s.total_analog_time();
        report->error_bound = error_bound(s);
        report->block_count = static_cast<int>(s.blocks.size());
    }
    return s;
}

Schedule trotterize(const Schedule& s, int n_t) {
    if (n_t < 1) throw std::invalid_argument("trotterize: n_T must be >= 1");
    Schedule out = s;
    out.blocks.clear();
    out.blocks.reserve(s.blocks.size() * static_cast<std::size_t>(n_t));
    for (int rep = 0; rep < n_t; ++rep)
        for (const auto& b : s.blocks)
            out.blocks.push_back(AnalogBlock{b.duration / n_t, b.sandwich});
    return out;
}

double error_bound(const Schedule& s) {
    double ta = 0.0;
    for (const auto& b : s.blocks) {
        if (b.duration < 0.0)
            throw std::invalid_argument("error_bound: schedule has negative durations");
        ta += b.duration;
    }
    if (ta == 0.0) return 0.0;
    const double nt = static_cast<double>(s.trotter_steps);
    const double hnorm = frobenius_norm(dense_matrix(s.source));
    const double w = ta * hnorm;
    return 2.0 / nt * w * w * std::exp((nt + 2.0) / nt * w);
}

SolveReport analog_time_diagnostics(const Schedule& s, const TwoBodyHamiltonian& target,
                                    double t_sqg) {
    SolveReport r;
    r.total_analog_time = s.total_analog_time();
    r.block_count = static_cast<int>(s.blocks.size());
    const double hs = frobenius_norm(dense_matrix(s.source));
    const double ht = frobenius_norm(dense_matrix(target));
    r.analog_lower_bound = hs > 0.0 ? s.total_time * ht / hs : 0.0;

    double maxg = 0.0;
    double minh = std::numeric_limits<double>::infinity();
    for (const auto& [key, g] : target.couplings()) {
        const double h = s.source.strength(key.i, key.j, key.mu, key.nu);
        if (h != 0.0) {
            maxg = std::max(maxg, std::abs(g));
            minh = std::min(minh, std::abs(h));
        }
    }
    r.coupling_ratio = std::isfinite(minh) && minh > 0.0 ? maxg / minh : 0.0;

    double tmin = std::numeric_limits<double>::infinity();
    for (const auto& b : s.blocks)
        if (b.duration > 0.0) tmin = std::min(tmin, b.duration);
    r.min_block_time = std::isfinite(tmin) ? tmin : 0.0;
    r.bang_rule_metric = t_sqg > 0.0 ? r.min_block_time / t_sqg : 0.0;
    for (const auto& b : s.blocks)
        if (b.duration < 0.0) ++r.negative_time_count;
    r.error_bound = r.negative_time_count == 0 ? error_bound(s) : 0.0;
    return r;
}

void write_schedule(std::ostream& out, const Schedule& s) {
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(hamiltonian_hash(s.source)));
    out << "n " << s.n << "\n";
    out << "trotter_steps " << s.trotter_steps << "\n";
    out << "T " << fmt17(s.total_time) << "\n";
    out << "source_hash " << hash << "\n";
    // the source couplings ride along so a schedule file is self-contained
    for (const auto& [key, v] : s.source.couplings())
        out << "source " << key.i << " " << key.j << " " << axis_char(key.mu) << " "
            << axis_char(key.nu) << " " << fmt17(v) << "\n";
    for (const auto& b : s.blocks)
        out << "block " << fmt17(b.duration) << " " << selection_string(b.sandwich) << "\n";
}

Schedule read_schedule(std::istream& in) {
    Schedule s;
    std::string line;
    int lineno = 0;
    bool have_n = false;
    std::string declared_hash;
    TwoBodyHamiltonian source;
    std::vector<std::array<std::string, 5>> source_records;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        const auto fail = [&](const std::string& what) {
            throw ParseError("schedule line " + std::to_string(lineno) + ": " + what);
        };
        if (keyword == "n") {
            int n;
            if (!(ls >> n) || n < 2) fail("invalid qubit count");
            s.n = n;
            source = TwoBodyHamiltonian(n);
            have_n = true;
        } else if (keyword == "trotter_steps") {
            if (!(ls >> s.trotter_steps) || s.trotter_steps < 1) fail("invalid trotter_steps");
        } else if (keyword == "T") {
            if (!(ls >> s.total_time)) fail("invalid T");
        } else if (keyword == "source_hash") {
            if (!(ls >> declared_hash)) fail("invalid source_hash");
        } else if (keyword == "source") {
            if (!have_n) fail("source record before n");
            int i, j;
            std::string mus, nus;
            double v;
            if (!(ls >> i >> j >> mus >> nus >> v) || mus.size() != 1 || nus.size() != 1)
                fail("malformed source record");
            source.set(i, j, axis_from_char(mus[0]), axis_from_char(nus[0]), v);
        } else if (keyword == "block") {
            if (!have_n) fail("block record before n");
            double d;
            std::string gates;
            if (!(ls >> d >> gates)) fail("malformed block record");
            if (static_cast<int>(gates.size()) != s.n) fail("gate string length differs from n");
            if (!(d >= 0.0)) fail("negative block duration");
            s.blocks.push_back(AnalogBlock{d, selection_from_string(gates)});
        } else {
            fail("unknown field '" + keyword + "'");
        }
    }
    if (!have_n) throw ParseError("schedule: missing n field");
    s.source = source;
    if (!declared_hash.empty()) {
        char hash[20];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(hamiltonian_hash(s.source)));
        if (declared_hash != hash)
            throw ParseError("schedule: source_hash does not match the embedded source");
    }
    return s;
}

Schedule load_schedule(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return read_schedule(in);
}

}  // namespace daqc

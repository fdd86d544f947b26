#include "daqc/hamiltonian.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "daqc/errors.hpp"
#include "daqc/rng.hpp"
#include "daqc/signmatrix.hpp"

namespace daqc {

namespace {

std::string key_string(int i, int j, PauliAxis mu, PauliAxis nu) {
    std::ostringstream os;
    os << "(" << i << "," << j << "," << axis_char(mu) << "," << axis_char(nu) << ")";
    return os.str();
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

TwoBodyHamiltonian::TwoBodyHamiltonian(int n) : n_(n) {
    if (n < 2) throw std::invalid_argument("qubit count must be at least 2");
}

void TwoBodyHamiltonian::set(int i, int j, PauliAxis mu, PauliAxis nu, double strength) {
    if (i < 1 || j < 1 || i > n_ || j > n_)
        throw ParseError("qubit index out of range [1," + std::to_string(n_) + "] in coupling " +
                         key_string(i, j, mu, nu));
    if (i >= j)
        throw ParseError("non-canonical pair order (need i < j) in coupling " +
                         key_string(i, j, mu, nu));
    if (!std::isfinite(strength))
        throw ParseError("non-finite strength in coupling " + key_string(i, j, mu, nu));
    const CouplingKey key{i, j, mu, nu};
    if (couplings_.count(key))
        throw ParseError("duplicate coupling " + key_string(i, j, mu, nu));
    if (strength != 0.0) couplings_.emplace(key, strength);
}

double TwoBodyHamiltonian::strength(int i, int j, PauliAxis mu, PauliAxis nu) const {
    const auto it = couplings_.find(CouplingKey{i, j, mu, nu});
    return it == couplings_.end() ? 0.0 : it->second;
}

bool TwoBodyHamiltonian::is_pure_zz() const {
    for (const auto& [key, s] : couplings_) {
        (void)s;
        if (key.mu != PauliAxis::Z || key.nu != PauliAxis::Z) return false;
    }
    return true;
}

TwoBodyHamiltonian parse_hamiltonian(std::istream& in) {
    std::string line;
    int lineno = 0;
    bool have_n = false;
    TwoBodyHamiltonian h;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword == "n") {
            if (have_n) throw ParseError("line " + std::to_string(lineno) + ": duplicate n field");
            int n = 0;
            if (!(ls >> n) || n < 2)
                throw ParseError("line " + std::to_string(lineno) + ": invalid qubit count");
            h = TwoBodyHamiltonian(n);
            have_n = true;
        } else if (keyword == "coupling") {
            if (!have_n)
                throw ParseError("line " + std::to_string(lineno) + ": coupling before n field");
            int i, j;
            std::string mus, nus;
            double s;
            if (!(ls >> i >> j >> mus >> nus >> s) || mus.size() != 1 || nus.size() != 1)
                throw ParseError("line " + std::to_string(lineno) + ": malformed coupling record");
            PauliAxis mu, nu;
            try {
                mu = axis_from_char(mus[0]);
                nu = axis_from_char(nus[0]);
            } catch (const std::invalid_argument& e) {
                throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
            }
            if (!std::isfinite(s))
                throw ParseError("line " + std::to_string(lineno) + ": non-finite strength");
            h.set(i, j, mu, nu, s);
        } else {
            throw ParseError("line " + std::to_string(lineno) + ": unknown field '" + keyword + "'");
        }
        std::string trailing;
        if (ls >> trailing)
            throw ParseError("line " + std::to_string(lineno) + ": trailing tokens");
    }
    if (!have_n) throw ParseError("missing n field");
    return h;
}

TwoBodyHamiltonian load_hamiltonian(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return parse_hamiltonian(in);
}

void write_hamiltonian(std::ostream& out, const TwoBodyHamiltonian& h) {
    out << "n " << h.n() << "\n";
    for (const auto& [key, s] : h.couplings()) {
        out << "coupling " << key.i << " " << key.j << " " << axis_char(key.mu) << " "
            << axis_char(key.nu) << " " << fmt17(s) << "\n";
    }
}

std::string hamiltonian_to_string(const TwoBodyHamiltonian& h) {
    std::ostringstream os;
    write_hamiltonian(os, h);
    return os.str();
}

std::uint64_t hamiltonian_hash(const TwoBodyHamiltonian& h) {
    return fnv1a64(hamiltonian_to_string(h));
}

Eigen::MatrixXcd dense_matrix(const TwoBodyHamiltonian& h, int qubit_cap) {
    const int n = h.n();
    if (n > qubit_cap)
        throw std::invalid_argument("dense matrix for n=" + std::to_string(n) +
                                    " exceeds the cap of " + std::to_string(qubit_cap));
    const std::size_t dim = std::size_t{1} << n;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    const std::complex<double> im(0.0, 1.0);
    // Each Pauli string is a signed permutation: row r couples to r ^ mask.
    for (const auto& [key, s] : h.couplings()) {
        const int bit_i = n - key.i;  // qubit 1 is the most significant bit
        const int bit_j = n - key.j;
        std::size_t mask = 0;
        if (key.mu != PauliAxis::Z) mask |= std::size_t{1} << bit_i;
        if (key.nu != PauliAxis::Z) mask |= std::size_t{1} << bit_j;
        for (std::size_t c = 0; c < dim; ++c) {
            std::complex<double> amp(s, 0.0);
            const int bi = static_cast<int>((c >> bit_i) & 1);
            const int bj = static_cast<int>((c >> bit_j) & 1);
            switch (key.mu) {
                case PauliAxis::X: break;
                case PauliAxis::Y: amp *= bi ? -im : im; break;
                case PauliAxis::Z: amp *= bi ? -1.0 : 1.0; break;
            }
            switch (key.nu) {
                case PauliAxis::X: break;
                case PauliAxis::Y: amp *= bj ? -im : im; break;
                case PauliAxis::Z: amp *= bj ? -1.0 : 1.0; break;
            }
            out(c ^ mask, c) += amp;
        }
    }
    return out;
}

double frobenius_norm(const Eigen::MatrixXcd& a) { return a.norm(); }

CouplingVector ratio_vector(const TwoBodyHamiltonian& target, const TwoBodyHamiltonian& source,
                            double T) {
    if (target.n() != source.n())
        throw std::invalid_argument("target and source qubit counts differ");
    const int n = source.n();
    CouplingVector out;
    std::vector<double> vals;
    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            for (int mu = 0; mu < 3; ++mu) {
                for (int nu = 0; nu < 3; ++nu) {
                    const auto m = static_cast<PauliAxis>(mu);
                    const auto v = static_cast<PauliAxis>(nu);
                    const double hh = source.strength(i, j, m, v);
                    const double gg = target.strength(i, j, m, v);
                    if (hh == 0.0) {
                        if (gg != 0.0) {
                            std::string pauli{axis_char(m), axis_char(v)};
                            throw UnsimulableError(
                                i, j, pauli,
                                "target coupling (" + std::to_string(i) + "," + std::to_string(j) +
                                    "," + pauli + ") has zero source counterpart");
                        }
                        continue;  // both zero: row dropped
                    }
                    out.active_rows.push_back(global_index(i, j, m, v, n));
                    vals.push_back(T * gg / hh);
                }
            }
        }
    }
    out.entries = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    return out;
}

}  // namespace daqc

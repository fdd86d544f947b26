#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "daqc/pauli.hpp"

namespace daqc {

/// Canonical coupling key (i, j, mu, nu) with 1 <= i < j <= n.
struct CouplingKey {
    int i, j;
    PauliAxis mu, nu;

    friend auto operator<=>(const CouplingKey&, const CouplingKey&) = default;
};

/// Two-body Hamiltonian sum_{i<j} sum_{mu,nu} h_{ij}^{mu nu} sigma^mu_i sigma^nu_j
/// with hbar = 1. Absent keys mean strength exactly zero; explicitly stored
/// zeros are not kept. Immutable after construction in normal use.
class TwoBodyHamiltonian {
public:
    TwoBodyHamiltonian() = default;
    explicit TwoBodyHamiltonian(int n);

    int n() const { return n_; }
    const std::map<CouplingKey, double>& couplings() const { return couplings_; }

    /// Validates the key, rejects duplicates and non-finite strengths.
    /// A zero strength is accepted and treated as absent.
    void set(int i, int j, PauliAxis mu, PauliAxis nu, double strength);

    double strength(int i, int j, PauliAxis mu, PauliAxis nu) const;

    bool is_pure_zz() const;

    friend bool operator==(const TwoBodyHamiltonian&, const TwoBodyHamiltonian&) = default;

private:
    int n_ = 0;
    std::map<CouplingKey, double> couplings_;
};

/// Right-hand side of M t = T g/h restricted to the rows with nonzero
/// source coupling. Rows where both couplings vanish are dropped;
/// `active_rows` holds the surviving 1-based global indices g_l.
struct CouplingVector {
    Eigen::VectorXd entries;
    std::vector<int> active_rows;
};

/// Parses the textual Hamiltonian format:
///     n <qubits>
///     coupling <i> <j> <mu> <nu> <strength>
/// Blank lines and lines starting with '#' are ignored; unknown keywords,
/// duplicate keys, i >= j, out-of-range indices and non-finite strengths
/// are rejected.
TwoBodyHamiltonian parse_hamiltonian(std::istream& in);
TwoBodyHamiltonian load_hamiltonian(const std::string& path);

/// Canonical serialization (sorted keys, 17 significant digits).
void write_hamiltonian(std::ostream& out, const TwoBodyHamiltonian& h);
std::string hamiltonian_to_string(const TwoBodyHamiltonian& h);

/// FNV-1a over the canonical serialization; used as the schedule header hash.
std::uint64_t hamiltonian_hash(const TwoBodyHamiltonian& h);

/// Dense 2^n x 2^n Hermitian matrix; qubit 1 is the leftmost tensor factor.
Eigen::MatrixXcd dense_matrix(const TwoBodyHamiltonian& h, int qubit_cap = 10);

double frobenius_norm(const Eigen::MatrixXcd& a);

/// Entries T * g/h on the active rows. Throws UnsimulableError if some
/// target coupling has no source counterpart.
CouplingVector ratio_vector(const TwoBodyHamiltonian& target,
                            const TwoBodyHamiltonian& source, double T);

}  // namespace daqc

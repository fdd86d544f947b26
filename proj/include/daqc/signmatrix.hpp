#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "daqc/pauli.hpp"

namespace daqc {

/// b_l(i,j,n) = n(i-1) - i(i+1)/2 + j, a bijection between ordered qubit
/// pairs and [1, n(n-1)/2].
int pair_index(int i, int j, int n);

/// Inverse of pair_index.
std::pair<int, int> pair_unindex(int b, int n);

/// Index of the gate/coupling pair (mu, nu) in the fixed order
/// {xx, xy, xz, yx, yy, yz, zx, zy, zz}, 1-based.
int gate_pair_index(PauliAxis mu, PauliAxis nu);

/// g_l(i,j,mu,nu) = 9 (b_l(i,j) - 1) + f_l(mu,nu), 1-based.
int global_index(int i, int j, PauliAxis mu, PauliAxis nu, int n);

/// The four 9x9 sub-blocks of the protocol matrix.
enum class SubBlockKind { M2, M11, M12, M0 };

/// The fixed sub-block tables. M2 is the both-qubits-hit block,
/// M11/M12 the first/second-qubit blocks, M0 all ones.
const Eigen::Matrix<int, 9, 9>& subblock(SubBlockKind kind);

/// Which sub-block kind sits at block row I, block column J: M2 on the
/// diagonal, M11 when the coupling's first qubit is in the column pair,
/// M12 when its second qubit is, M0 when the pairs are disjoint.
SubBlockKind subblock_kind_for(int I, int J, int n);

/// Signs of the effective couplings after sandwiching every analog block
/// with the given gate selection; entry order follows global_index.
Eigen::VectorXi column_for_selection(const GateSelection& sel, int n);

/// The general-protocol sign matrix of dimension 9n(n-1)/2 together with
/// the gate selection that generates each column.
struct SignMatrix {
    int n = 0;
    Eigen::MatrixXi entries;
    std::vector<GateSelection> column_gates;
};

/// Column-generator construction: column (J, f) applies the f-th gate pair
/// to the J-th qubit pair (first gate on the smaller qubit).
SignMatrix build_protocol_matrix(int n);

/// Independent route: the block recursion
/// M(n) = [[A(n), P(n)], [Q(n), M(n-1)]] with sub-block contents adjusted
/// for which slot of the column's gate pair acts on the touched qubit
/// (the slot-swapped variants permute gate-pair columns by (a,b) -> (b,a)).
Eigen::MatrixXi build_protocol_matrix_recursive(int n);

/// ZZ warm-up protocol matrix of dimension n(n-1)/2:
/// entry ((i,j),(l,m)) = (-1)^(delta_il + delta_im + delta_jl + delta_jm).
Eigen::MatrixXi zz_matrix(int n);

/// X-sandwich selection on qubit pair b (both qubits get an X gate).
GateSelection zz_selection(int b, int n);

/// Numerical test: smallest singular value > 1e-8 * dimension.
bool is_nonsingular(const Eigen::MatrixXd& m);
bool is_nonsingular(const Eigen::MatrixXi& m);

/// Exact rank of an integer matrix over GF(p); full rank for any prime p
/// certifies a nonzero determinant over the rationals.
int rank_mod_prime(const Eigen::MatrixXi& m, std::int64_t p = 1000000007LL);

}  // namespace daqc

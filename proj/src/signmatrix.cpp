#include "daqc/signmatrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace daqc {

int pair_index(int i, int j, int n) {
    if (!(1 <= i && i < j && j <= n))
        throw std::invalid_argument("pair_index: need 1 <= i < j <= n, got (" + std::to_string(i) +
                                    "," + std::to_string(j) + "," + std::to_string(n) + ")");
    return n * (i - 1) - i * (i + 1) / 2 + j;
}

std::pair<int, int> pair_unindex(int b, int n) {
    const int N = n * (n - 1) / 2;
    if (b < 1 || b > N)
        throw std::invalid_argument("pair_unindex: index " + std::to_string(b) +
                                    " outside [1," + std::to_string(N) + "]");
    int i = n - static_cast<int>(std::floor(std::sqrt(static_cast<double>(n * (n - 1) - 2 * b + 2)) + 0.5));
    // guard the floating-point floor against off-by-one at exact squares
    while (i > 1 && pair_index(i - 1, i, n) >= b) --i;
    while (i < n - 1 && pair_index(i, i + 1, n) > b) ++i;
    const int j = b - n * (i - 1) + i * (i + 1) / 2;
    return {i, j};
}

int gate_pair_index(PauliAxis mu, PauliAxis nu) {
    return 3 * static_cast<int>(mu) + static_cast<int>(nu) + 1;
}

int global_index(int i, int j, PauliAxis mu, PauliAxis nu, int n) {
    return 9 * (pair_index(i, j, n) - 1) + gate_pair_index(mu, nu);
}

namespace {

using Block9 = Eigen::Matrix<int, 9, 9>;

// Sub-block tables as two independent encodings of the same conjugation
// rules: literal constants matching the tables in the construction notes,
// cross-checked against conjugation_sign in the test suite.
Block9 make_m2() {
    Block9 m;
    m << 1, -1, -1, -1, 1, 1, -1, 1, 1,
        -1, 1, -1, 1, -1, 1, 1, -1, 1,
        -1, -1, 1, 1, 1, -1, 1, 1, -1,
        -1, 1, 1, 1, -1, -1, -1, 1, 1,
        1, -1, 1, -1, 1, -1, 1, -1, 1,
        1, 1, -1, -1, -1, 1, 1, 1, -1,
        -1, 1, 1, -1, 1, 1, 1, -1, -1,
        1, -1, 1, 1, -1, 1, -1, 1, -1,
        1, 1, -1, 1, 1, -1, -1, -1, 1;
    return m;
}

Block9 make_m11() {
    Block9 m;
    m << 1, 1, 1, -1, -1, -1, -1, -1, -1,
        1, 1, 1, -1, -1, -1, -1, -1, -1,
        1, 1, 1, -1, -1, -1, -1, -1, -1,
        -1, -1, -1, 1, 1, 1, -1, -1, -1,
        -1, -1, -1, 1, 1, 1, -1, -1, -1,
        -1, -1, -1, 1, 1, 1, -1, -1, -1,
        -1, -1, -1, -1, -1, -1, 1, 1, 1,
        -1, -1, -1, -1, -1, -1, 1, 1, 1,
        -1, -1, -1, -1, -1, -1, 1, 1, 1;
    return m;
}

Block9 make_m12() {
    Block9 m;
    m << 1, -1, -1, 1, -1, -1, 1, -1, -1,
        -1, 1, -1, -1, 1, -1, -1, 1, -1,
        -1, -1, 1, -1, -1, 1, -1, -1, 1,
        1, -1, -1, 1, -1, -1, 1, -1, -1,
        -1, 1, -1, -1, 1, -1, -1, 1, -1,
        -1, -1, 1, -1, -1, 1, -1, -1, 1,
        1, -1, -1, 1, -1, -1, 1, -1, -1,
        -1, 1, -1, -1, 1, -1, -1, 1, -1,
        -1, -1, 1, -1, -1, 1, -1, -1, 1;
    return m;
}

// Column permutation swapping the gate-pair label (a,b) -> (b,a); applied
// when the touched qubit is hit by the other slot of the pair.
Block9 swap_gate_slots(const Block9& m) {
    Block9 out;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            out.col(3 * a + b) = m.col(3 * b + a);
    return out;
}

const Block9& m2_table() {
    static const Block9 m = make_m2();
    return m;
}
const Block9& m11_table() {
    static const Block9 m = make_m11();
    return m;
}
const Block9& m12_table() {
    static const Block9 m = make_m12();
    return m;
}
const Block9& m0_table() {
    static const Block9 m = Block9::Ones();
    return m;
}
const Block9& m11_swapped() {
    static const Block9 m = swap_gate_slots(make_m11());
    return m;
}
const Block9& m12_swapped() {
    static const Block9 m = swap_gate_slots(make_m12());
    return m;
}

}  // namespace

const Eigen::Matrix<int, 9, 9>& subblock(SubBlockKind kind) {
    switch (kind) {
        case SubBlockKind::M2: return m2_table();
        case SubBlockKind::M11: return m11_table();
        case SubBlockKind::M12: return m12_table();
        default: return m0_table();
    }
}

SubBlockKind subblock_kind_for(int I, int J, int n) {
    if (I == J) return SubBlockKind::M2;
    const auto [i, j] = pair_unindex(I, n);
    const auto [k, l] = pair_unindex(J, n);
    if (i == k || i == l) return SubBlockKind::M11;
    if (j == k || j == l) return SubBlockKind::M12;
    return SubBlockKind::M0;
}

Eigen::VectorXi column_for_selection(const GateSelection& sel, int n) {
    if (static_cast<int>(sel.size()) != n)
        throw std::invalid_argument("gate selection length differs from qubit count");
    const int N = n * (n - 1) / 2;
    Eigen::VectorXi col(9 * N);
    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            const int base = 9 * (pair_index(i, j, n) - 1);
            for (int mu = 0; mu < 3; ++mu) {
                const int si = conjugation_sign(sel[i - 1], static_cast<PauliAxis>(mu));
                for (int nu = 0; nu < 3; ++nu) {
                    const int sj = conjugation_sign(sel[j - 1], static_cast<PauliAxis>(nu));
                    col(base + 3 * mu + nu) = si * sj;
                }
            }
        }
    }
    return col;
}

SignMatrix build_protocol_matrix(int n) {
    if (n < 2) throw std::invalid_argument("protocol matrix needs n >= 2");
    const int N = n * (n - 1) / 2;
    SignMatrix out;
    out.n = n;
    out.entries.resize(9 * N, 9 * N);
    out.column_gates.reserve(9 * N);
    for (int J = 1; J <= N; ++J) {
        const auto [k, l] = pair_unindex(J, n);
        for (int a = 1; a <= 3; ++a) {
            for (int b = 1; b <= 3; ++b) {
                GateSelection sel(n, Gate::I);
                sel[k - 1] = static_cast<Gate>(a);
                sel[l - 1] = static_cast<Gate>(b);
                const int c = 9 * (J - 1) + 3 * (a - 1) + (b - 1);
                out.entries.col(c) = column_for_selection(sel, n);
                out.column_gates.push_back(std::move(sel));
            }
        }
    }
    return out;
}

Eigen::MatrixXi build_protocol_matrix_recursive(int n) {
    if (n < 2) throw std::invalid_argument("protocol matrix needs n >= 2");
    if (n == 2) return m2_table();

    const Eigen::MatrixXi prev = build_protocol_matrix_recursive(n - 1);
    const int N = n * (n - 1) / 2;
    Eigen::MatrixXi m(9 * N, 9 * N);
    // Pairs not containing qubit 1 keep their relative order under
    // relabeling (i,j) -> (i-1, j-1), so the bottom-right block is M(n-1).
    m.bottomRightCorner(prev.rows(), prev.cols()) = prev;

    const auto content = [&](int I, int J) -> const Block9& {
        const auto [i, j] = pair_unindex(I, n);
        const auto [k, l] = pair_unindex(J, n);
        if (I == J) return m2_table();
        if (i == k) return m11_table();
        if (i == l) return m11_swapped();
        if (j == l) return m12_table();
        if (j == k) return m12_swapped();
        return m0_table();
    };

    // A(n): rows and columns over the pairs (1, x).
    for (int I = 1; I <= n - 1; ++I)
        for (int J = 1; J <= n - 1; ++J)
            m.block<9, 9>(9 * (I - 1), 9 * (J - 1)) = content(I, J);
    // P(n): rows (1, x), columns over pairs without qubit 1.
    for (int I = 1; I <= n - 1; ++I)
        for (int J = n; J <= N; ++J)
            m.block<9, 9>(9 * (I - 1), 9 * (J - 1)) = content(I, J);
    // Q(n): rows without qubit 1, columns (1, x).
    for (int I = n; I <= N; ++I)
        for (int J = 1; J <= n - 1; ++J)
            m.block<9, 9>(9 * (I - 1), 9 * (J - 1)) = content(I, J);
    return m;
}

Eigen::MatrixXi zz_matrix(int n) {
    if (n < 2) throw std::invalid_argument("zz matrix needs n >= 2");
    const int N = n * (n - 1) / 2;
    Eigen::MatrixXi m(N, N);
    for (int I = 1; I <= N; ++I) {
        const auto [i, j] = pair_unindex(I, n);
        for (int J = 1; J <= N; ++J) {
            const auto [l, mm] = pair_unindex(J, n);
            const int d = (i == l) + (i == mm) + (j == l) + (j == mm);
            m(I - 1, J - 1) = (d % 2 == 0) ? 1 : -1;
        }
    }
    return m;
}

GateSelection zz_selection(int b, int n) {
    const auto [l, m] = pair_unindex(b, n);
    GateSelection sel(n, Gate::I);
    sel[l - 1] = Gate::X;
    sel[m - 1] = Gate::X;
    return sel;
}

bool is_nonsingular(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("is_nonsingular: matrix not square");
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const double smin = svd.singularValues().tail(1)(0);
    return smin > 1e-8 * static_cast<double>(m.rows());
}

bool is_nonsingular(const Eigen::MatrixXi& m) {
    return is_nonsingular(Eigen::MatrixXd(m.cast<double>()));
}

int rank_mod_prime(const Eigen::MatrixXi& m, std::int64_t p) {
    const auto rows = m.rows(), cols = m.cols();
    std::vector<std::vector<std::int64_t>> a(rows, std::vector<std::int64_t>(cols));
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            a[r][c] = ((m(r, c) % p) + p) % p;

    const auto mulmod = [p](std::int64_t x, std::int64_t y) {
        return static_cast<std::int64_t>(static_cast<__int128>(x) * y % p);
    };
    const auto powmod = [&](std::int64_t base, std::int64_t e) {
        std::int64_t r = 1;
        while (e) {
            if (e & 1) r = mulmod(r, base);
            base = mulmod(base, base);
            e >>= 1;
        }
        return r;
    };

    int rank = 0;
    for (Eigen::Index col = 0; col < cols && rank < rows; ++col) {
        Eigen::Index pivot = -1;
        for (Eigen::Index r = rank; r < rows; ++r)
            if (a[r][col] != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(a[rank], a[pivot]);
        const std::int64_t inv = powmod(a[rank][col], p - 2);
        for (Eigen::Index c = col; c < cols; ++c) a[rank][c] = mulmod(a[rank][c], inv);
        for (Eigen::Index r = 0; r < rows; ++r) {
            if (r == rank || a[r][col] == 0) continue;
            const std::int64_t f = a[r][col];
            for (Eigen::Index c = col; c < cols; ++c) {
                a[r][c] = (a[r][c] - mulmod(f, a[rank][c]) % p + p) % p;
            }
        }
        ++rank;
    }
    return rank;
}

}  // namespace daqc

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace daqc {

/// Pauli axis label; the order x < y < z matches the gate-pair list
/// {xx, xy, xz, yx, yy, yz, zx, zy, zz}.
enum class PauliAxis : int { X = 0, Y = 1, Z = 2 };

/// Single-qubit sandwich gate: identity or a Pauli.
enum class Gate : int { I = 0, X = 1, Y = 2, Z = 3 };

/// One gate per qubit, defining a digital sandwich layer.
using GateSelection = std::vector<Gate>;

/// Sign picked up by sigma_axis under conjugation with the gate:
/// +1 for identity or a matching Pauli, -1 otherwise
/// (YXY = ZXZ = -X and cyclic).
inline int conjugation_sign(Gate g, PauliAxis axis) {
    if (g == Gate::I) return 1;
    return (static_cast<int>(g) == static_cast<int>(axis) + 1) ? 1 : -1;
}

inline char axis_char(PauliAxis a) {
    switch (a) {
        case PauliAxis::X: return 'x';
        case PauliAxis::Y: return 'y';
        default: return 'z';
    }
}

inline PauliAxis axis_from_char(char c) {
    switch (c) {
        case 'x': case 'X': return PauliAxis::X;
        case 'y': case 'Y': return PauliAxis::Y;
        case 'z': case 'Z': return PauliAxis::Z;
        default: throw std::invalid_argument(std::string("not a Pauli axis: ") + c);
    }
}

inline char gate_char(Gate g) {
    switch (g) {
        case Gate::I: return 'I';
        case Gate::X: return 'X';
        case Gate::Y: return 'Y';
        default: return 'Z';
    }
}

inline Gate gate_from_char(char c) {
    switch (c) {
        case 'I': case 'i': return Gate::I;
        case 'X': case 'x': return Gate::X;
        case 'Y': case 'y': return Gate::Y;
        case 'Z': case 'z': return Gate::Z;
        default: throw std::invalid_argument(std::string("not a gate: ") + c);
    }
}

inline std::string selection_string(const GateSelection& sel) {
    std::string s;
    s.reserve(sel.size());
    for (Gate g : sel) s.push_back(gate_char(g));
    return s;
}

inline GateSelection selection_from_string(const std::string& s) {
    GateSelection sel;
    sel.reserve(s.size());
    for (char c : s) sel.push_back(gate_from_char(c));
    return sel;
}

}  // namespace daqc

/** \file
 * Single- and two-qubit Pauli bases and related helpers.
 *
 * Two-qubit Paulis are ordered P[4*a + b] = sigma_a (x) sigma_b with
 * sigma_0..3 = 1, X, Y, Z.  The first tensor factor is the control qubit,
 * the second the hidden qubit; |ch> basis ordering 00, 01, 10, 11.
 */
#pragma once

#include <array>
#include <string>

#include "hqt/types.hpp"

namespace hqt {

/// Single-qubit Pauli matrix, i in 0..3 (1, X, Y, Z).
const Eigen::Matrix2cd& pauli1(int i);

/// Two-qubit Pauli matrix, i in 0..15 (see file comment for ordering).
const CMat4& pauli2(int i);

/// Two-letter label, e.g. pauli_label(7) == "XZ" (X on control, Z on hidden).
std::string pauli_label(int i);

/// Kronecker product, first argument in the first (most significant) slot.
CMat kron(const CMat& a, const CMat& b);

/// Pauli coordinates c_i = Tr[P_i A] of a 4x4 operator.  Real part only;
/// exact for Hermitian A.
PtmVec pauli_coords(const CMat4& a);

/// Reassemble (1/4) sum_i c_i P_i.
CMat4 from_pauli_coords(const PtmVec& c);

}  // namespace hqt

/** \file
 * Lie-algebra closure for two-qubit control Hamiltonians.
 *
 * Controllability is decided by the dimension of the smallest real Lie
 * algebra containing the drift/drive generators: 15 (= dim su(4), the
 * traceless Hermitian operators) means universal control.
 */
#pragma once

#include <string>
#include <vector>

#include "hqt/types.hpp"

namespace hqt::control {

struct HermitianGenerator {
    CMat4 matrix;       ///< Hermitian and traceless within 1e-12
    std::string label;
};

struct ClosureResult {
    int dimension = 0;
    std::vector<HermitianGenerator> basis;  ///< unit-Frobenius, orthogonal
};

/// Dimension and basis of the real Lie algebra generated by `generators`
/// (repeated commutators, Gram-Schmidt rank updates with threshold 1e-9).
/// Growth stops at max_dim.  Throws validation_error on non-Hermitian or
/// traceful inputs.
ClosureResult lie_closure(const std::vector<HermitianGenerator>& generators,
                          int max_dim = 15);

/// True iff the closure reaches the full dimension 15.
bool is_fully_controllable(const std::vector<HermitianGenerator>& generators);

/// sigma_i on the control qubit (and optionally the hidden qubit too).
std::vector<HermitianGenerator> single_qubit_generators(bool include_hidden);

HermitianGenerator coupling_zz();       ///< sigma_z (x) sigma_z
HermitianGenerator coupling_xxyy();     ///< XX + YY
HermitianGenerator coupling_xxyyzz();   ///< XX + YY + ZZ

}  // namespace hqt::control

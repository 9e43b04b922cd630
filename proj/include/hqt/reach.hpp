/** \file
 * Measurement-operator reachability: which two-qubit operators can be
 * measured by conjugating the native measurement operators with words of
 * the available gates.
 *
 * A word U = g1 g2 ... gm (factors listed left to right) measures
 * U^dag M U for a native operator M.  The report accumulates the real
 * linear span of all such operators up to the depth limit.
 */
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hqt/types.hpp"

namespace hqt::control {

struct NamedGate {
    std::string name;
    CMat4 u;
};

/// Catalog used by the claim battery and the CLI.  Names: rx90, ry90
/// (control qubit), rx90_h, ry90_h (hidden qubit), iswap, cphase, swap,
/// sqrt_swap.  Throws validation_error for unknown names.
const NamedGate& gate_by_name(const std::string& name);

struct ReachabilityOptions {
    int max_depth = 6;
    double threshold = 1e-9;   ///< rank threshold for the span
    bool force_span_path = false;  ///< skip the Clifford fast path (testing)
};

struct Witness {
    int pauli = 0;   ///< reached operator index
    int sign = 1;    ///< +1 or -1, sign of U^dag M U relative to P_pauli
    std::vector<std::string> word;  ///< gate names, factors of U left to right
};

struct ReachabilityReport {
    int span_dimension = 0;                    ///< 0..16
    std::set<std::string> reachable;           ///< Pauli labels in the span
    std::set<std::string> unreachable;         ///< Pauli labels outside it
    /// Signed-Pauli witnesses; populated on the Clifford fast path only.
    std::map<std::string, Witness> witness_sequences;
    bool clifford_path = false;
};

/// Breadth-first exploration of gate words up to max_depth.  `native` are
/// Pauli indices (0..15) of the natively measurable operators.  Uses exact
/// signed-Pauli tracking when every gate is Clifford, otherwise the
/// span-rank method.
ReachabilityReport measurement_reachability(
    const std::vector<NamedGate>& gates, const std::vector<int>& native,
    const ReachabilityOptions& opt = {});

/// Battery: sqrt(SWAP) + control rotations, and each pair from
/// {cPHASE, iSWAP, SWAP} + control rotations, all must reach dimension 16.
bool verify_sqrt_swap_completeness();

}  // namespace hqt::control

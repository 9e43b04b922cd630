/** \file
 * Two-qubit channel representations and manipulations: Pauli transfer
 * matrices, Choi matrices, CPTP projection, fidelities.
 *
 * Conventions: a PTM R has entries R(i,j) = Tr[P_i Lambda(P_j)]/4; for a
 * unitary channel R(i,j) = Tr[P_i U P_j U^dag]/4.  The Choi matrix is
 * trace-normalized to 1 with the channel output space in the first tensor
 * factor; complete positivity is PSD-ness of the Choi matrix and trace
 * preservation is Tr_out[C] = 1/4.
 */
#pragma once

#include "hqt/pauli.hpp"
#include "hqt/types.hpp"

namespace hqt::channel {

/// PTM of the unitary conjugation channel rho -> U rho U^dag.
Ptm ptm_from_unitary(const CMat4& u);

/// PTM -> Choi matrix (16x16 complex, trace 1 for TP inputs).
CMat ptm_to_choi(const Ptm& r);

/// Choi matrix -> PTM (exact linear inverse of ptm_to_choi).
Ptm choi_to_ptm(const CMat& c);

struct CptpOptions {
    double tol = 1e-8;    ///< convergence threshold on successive change
    int max_iters = 10000;
};

struct CptpReport {
    int iters = 0;
    double change = 0.0;        ///< last successive-change norm
    double tp_residual = 0.0;   ///< ||Tr_out C - 1/4||_F of the output
    double min_eigenvalue = 0.0;///< smallest Choi eigenvalue of the output
};

/// Project a PTM onto the CPTP set: alternating projections between the
/// PSD cone and the TP affine subspace in Choi space with Dykstra
/// correction.  Throws numeric_error (with the residual) on
/// non-convergence within max_iters.
Ptm project_cptp(const Ptm& r, const CptpOptions& opt = {},
                 CptpReport* report = nullptr);

/// Check both CPTP constraints within tol.
bool is_cptp(const Ptm& r, double tol = 1e-7);

/// Process fidelity Tr[R_ideal^T R]/16.
double process_fidelity(const Ptm& ideal, const Ptm& actual);

/// Average gate fidelity (d*F_pro + 1)/(d+1) with d = 4.
double average_fidelity(const Ptm& ideal, const Ptm& actual);

/// Channel composition: `after` applied after `before` (matrix product).
Ptm compose(const Ptm& after, const Ptm& before);

/// Apply a channel in PTM form to a 4x4 operator.
CMat4 apply_channel(const Ptm& r, const CMat4& rho);

/// PTM of the hidden-qubit z rotation exp(-i phi (1 (x) sigma_z) / 2).
/// This is the gauge freedom of the hidden-qubit gate set.
Ptm hidden_z_ptm(double phi);

}  // namespace hqt::channel

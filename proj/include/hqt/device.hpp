/** \file
 * Ground-truth simulator of the control + hidden qubit device.
 *
 * State space: qutrit (control, levels 0/1/2) tensor qubit (hidden),
 * basis index c*2 + h.  The third control level only participates in the
 * cPHASE pulse, which drives a Rabi rotation in the {|11>,|20>} subspace.
 * Pulses carry imperfect single- and two-qubit phases (the device truth
 * the calibration has to recover); virtual frame shifts conjugate every
 * subsequent pulse.  Only the control qubit is measured.
 */
#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hqt/types.hpp"

namespace hqt::device {

using Mat6 = Eigen::Matrix<cxd, 6, 6>;

struct IswapPhases {
    double gamma1 = 0.0;  ///< hidden->control transfer phase, <10|U|01>
    double gamma2 = 0.0;  ///< control->hidden transfer phase, <01|U|10>
    double gamma3 = 0.0;  ///< |11> phase
};

struct CphasePhases {
    double gamma01 = 0.0;  ///< phase of the control-excited state |10>
    double gamma10 = 0.0;  ///< phase of the hidden-excited state |01>
    double gamma11 = 0.0;  ///< two-qubit phase of |11> (pi when ideal)
};

struct Durations {
    double single_qubit = 50e-9;
    double iswap = 200e-9;
    double cphase = 200e-9;
};

struct DeviceModel {
    double t1_control = 30e-6;
    double t2_control = 30e-6;
    double t1_hidden = 60e-6;
    double t2_hidden = 20e-6;
    double g_iswap = pi / (2 * 200e-9);  ///< rad/s, resonant length 200 ns
    double g_cphase = pi / 200e-9;       ///< rad/s, 2*pi length 200 ns
    IswapPhases true_iswap;
    CphasePhases true_cphase;
    Durations durations;
    nlohmann::json doc;  ///< documentation only (frequencies etc.)

    /// Derived: wrap(gamma3 + pi - gamma1 - gamma2), small on a good device.
    double beta() const;
    double iswap_resonant_length() const { return pi / (2.0 * g_iswap); }
    double cphase_resonant_length() const { return pi / g_cphase; }
    /// Throws validation_error unless all times/couplings are positive and
    /// t2 <= 2*t1 on both qubits.  Wraps all stored phases into (-pi, pi].
    void normalize_and_validate();
};

/// Coherence-limited defaults with deliberately imperfect pulse phases.
DeviceModel default_model();
/// Same phases with T1/T2 pushed to 1e6 s (decoherence negligible).
DeviceModel noiseless_model();

nlohmann::json to_json(const DeviceModel& model);
/// Parses the to_json layout; `beta` is ignored (derived), `doc` optional.
DeviceModel model_from_json(const nlohmann::json& j);

// ---- Gates ---------------------------------------------------------------

/// Control-qubit pulse about the axis cos(phi) X + sin(phi) Y by theta.
struct Rotation {
    double theta = 0.0;
    double phi = 0.0;
};
/// Parametric iSWAP-type pulse (population exchange |01> <-> |10>).
struct Swap {
    double length = 0.0;    ///< seconds, > 0
    double detuning = 0.0;  ///< rad/s
};
/// Parametric cPHASE-type pulse (Rabi rotation |11> <-> |20>).
struct CPhase {
    double length = 0.0;
    double detuning = 0.0;
};
/// Virtual frame update; zero duration, conjugates later pulses.
struct FrameShift {
    double delta1 = 0.0;  ///< control frame, radians
    double delta2 = 0.0;  ///< hidden frame, radians
};
using Gate = std::variant<Rotation, Swap, CPhase, FrameShift>;

/// Gates in execution order (first element acts first).  Circuit notation
/// often reads right-to-left; builders here always append in time order.
struct GateSequence {
    std::vector<Gate> gates;
    GateSequence& then(const Gate& g) {
        gates.push_back(g);
        return *this;
    }
};

struct FrameState {
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta_p() const { return delta1 - delta2; }
};

// ---- Pulse unitaries -----------------------------------------------------

/// 4x4 computational-block unitary of the parametric iSWAP pulse: a
/// generalized Rabi rotation in {|01>,|10>} with coupling g_iswap, plus the
/// device's imperfect phase rates (gamma1/gamma2/gamma3 at the resonant
/// length).  Frames are handled by the caller.
CMat4 iswap_unitary(const DeviceModel& model, double length, double detuning);

/// Computational block of the cPHASE pulse plus the |20> leakage left
/// behind.  The |11> column is renormalized when the leakage is below 1;
/// at the resonant 2*pi length the block is diag(1, e^{i g10}, e^{i g01},
/// e^{i g11}) with leakage < 1e-6.
std::pair<CMat4, double> cphase_unitary(const DeviceModel& model, double length,
                                        double detuning);

/// diag phases e^{-i(delta1*c + delta2*h)} over the six |c h> states.
Mat6 frame_unitary(double delta1, double delta2);

struct GateEffect {
    Mat6 u;               ///< effective unitary in the current frames
    double duration = 0;  ///< seconds of decoherence to apply afterwards
};
/// Frame-conjugated 6x6 unitary of one gate (identity for FrameShift).
/// Throws validation_error on malformed parameters.
GateEffect gate_effect(const DeviceModel& model, const Gate& gate,
                       const FrameState& frames);
void advance_frames(const Gate& gate, FrameState& frames);

// ---- State evolution -----------------------------------------------------

Mat6 embed_state(const CMat4& rho);
CMat4 computational_block(const Mat6& rho);

/// Per-qubit amplitude damping (1/T1) and pure dephasing (1/T2 - 1/(2 T1))
/// for `duration` seconds; |2> of the control qutrit is left untouched.
/// Requires a valid density matrix and t2 <= 2 t1.
Mat6 apply_noise(const Mat6& rho, const DeviceModel& model, double duration);

/// Full evolution from |00><00|: each gate's unitary followed by its
/// decoherence window, frames tracked across the sequence.
Mat6 run_to_state(const DeviceModel& model, const GateSequence& seq,
                  FrameState frames = {});
/// P(control = 1) = Tr[(|1><1| (x) 1) rho_final]; |2> does not count.
double run_sequence(const DeviceModel& model, const GateSequence& seq,
                    FrameState frames = {});

/// Fraction of `shots` binomial draws at probability p (optional sampled
/// readout; the default elsewhere is the noiseless expectation value).
double sample_excited(double p, int shots, uint64_t seed);

/// Computational-block transfer matrix (Pauli basis) of one gate including
/// its decoherence window — the ground truth tomography is compared to.
Ptm gate_ptm(const DeviceModel& model, const Gate& gate,
             const FrameState& frames = {});

}  // namespace hqt::device

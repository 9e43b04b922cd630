/** \file
 * Process tomography through the control qubit only.
 *
 * State preparation and measurement both have to route through the swap
 * interaction, so the tomography operations are themselves words over the
 * four gates being characterized.  The estimator therefore solves a
 * CPTP-constrained least-squares problem for one gate given assumed models
 * of the other three (plus itself) in the preparation/analysis words, and a
 * damped fixed-point iteration makes the whole gate set self-consistent.
 * All estimates carry a hidden-qubit z-frame gauge freedom which is fixed
 * by fidelity maximization against the ideal gates.
 */
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hqt/calibration.hpp"
#include "hqt/channel.hpp"
#include "hqt/device.hpp"

namespace hqt::tomo {

enum class GateId : int { rx = 0, ry = 1, iswap = 2, cphase = 3 };
inline constexpr std::array<GateId, 4> kGateIds{GateId::rx, GateId::ry,
                                               GateId::iswap, GateId::cphase};
const char* gate_name(GateId g);

/// A gate word in execution order (first entry acts first).  Pi rotations
/// are spelled as two half rotations so that every element is one of the
/// four characterized gates.
using Word = std::vector<GateId>;

struct SequenceLibrary {
    std::array<Word, 16> preparations;
    std::array<Word, 15> tomography;
    std::array<std::string, 16> preparation_names;  ///< rightmost acts first
    std::array<std::string, 15> tomography_names;
};

/// The fixed preparation/analysis word sets.  The 15 analysis words
/// conjugate the native measurement operator onto all 15 non-trivial Pauli
/// operators; the 16 preparation words generate an informationally complete
/// state set from |00>.
SequenceLibrary build_sequences();

CMat4 ideal_unitary(GateId g);
/// Ideal unitary of a word (product in execution order).
CMat4 word_unitary(const Word& w);
std::array<Ptm, 4> ideal_ptms();

/// Device realization of a word using the calibrated composite pulses.
device::GateSequence realize(const Word& w, const cal::CalibratedGateSet& gs);

struct TomographyDataset {
    Eigen::Matrix<double, 16, 15> mu;  ///< row = preparation, col = analysis
    int shots = 0;                     ///< 0 = noiseless expectation values
    uint64_t seed = 0;
    std::string target_name;
    nlohmann::json device_snapshot;
};

/// Runs all 240 prep.target.analysis sequences on the simulated device and
/// converts excited-state probabilities to expectation values 1 - 2 P(1).
TomographyDataset collect_dataset(const device::DeviceModel& model,
                                  const cal::CalibratedGateSet& gs,
                                  const device::GateSequence& target,
                                  const std::string& target_name = "",
                                  int shots = 0, uint64_t seed = 0);

/// One dataset per characterized gate, in kGateIds order.
std::array<TomographyDataset, 4> collect_gate_datasets(
    const device::DeviceModel& model, const cal::CalibratedGateSet& gs,
    int shots = 0, uint64_t seed = 0);

struct GateSetEstimate {
    std::array<Ptm, 4> p;  ///< indexed by GateId
    double gauge_phi = 0.0;
    std::vector<double> residual_history;
};
GateSetEstimate ideal_estimate();

/// Transfer matrix of a word under an estimate (product in execution order).
Ptm word_ptm(const Word& w, const GateSetEstimate& est);

/// Predicted outcomes for every (preparation, analysis) pair with x as the
/// target process and `spam` modelling the surrounding words.
Eigen::Matrix<double, 16, 15> predict_mu(const GateSetEstimate& spam,
                                         const Ptm& x);

struct QptResult {
    Ptm x;                   ///< CPTP minimizer found
    double objective = 0.0;  ///< final sum of squared residuals
    int iterations = 0;
    bool converged = false;  ///< improvement dropped below 1e-10
};

/// CPTP-constrained least squares by projected gradient descent with a
/// backtracking line search, starting from `init`.
QptResult qpt_lstsq(const TomographyDataset& data, const GateSetEstimate& spam,
                    const Ptm& init);

/// Damped fixed-point iteration over the four-gate set: each round runs
/// qpt_lstsq for all gates with the current estimate as the assumed model,
/// mixes with weight lambda, re-projects, and gauge-fixes.  Stops when the
/// self-consistency residual first increases (returning the previous
/// iterate) or after max_iters rounds.  Throws numeric_error when the
/// residual more than doubles on the first step.
GateSetEstimate self_consistent_qpt(const std::array<TomographyDataset, 4>& data,
                                    double lambda = 0.1, int max_iters = 100);

/// Transfer matrix of the hidden-qubit z rotation by phi.
Ptm hidden_gauge_ptm(double phi);

/// Rotates the whole estimate around the hidden z axis to maximize the
/// summed process fidelity against the ideal gates.  Predicted outcomes are
/// invariant under this transformation.
GateSetEstimate gauge_fix(const GateSetEstimate& est);

/// Ground-truth logical transfer matrix of one calibrated gate: composite
/// pulse, trailing frame shift, and its decoherence window.
Ptm truth_ptm(const device::DeviceModel& model,
              const cal::CalibratedGateSet& gs, GateId g);

nlohmann::json to_json(const TomographyDataset& d);
TomographyDataset dataset_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GateSetEstimate& e);
GateSetEstimate estimate_from_json(const nlohmann::json& j);

/// 16x16 grid with Pauli labels on both axes (heatmap-ready).
void write_ptm_csv(std::ostream& os, const Ptm& p);

/// Inverse of write_ptm_csv (exact round trip); throws validation_error on
/// malformed input.
Ptm ptm_from_csv(std::istream& is);

}  // namespace hqt::tomo

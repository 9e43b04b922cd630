/** \file
 * Tune-up protocol for the iSWAP and cPHASE pulses.
 *
 * Five stages, order-enforced: (1) iSWAP length/detuning by population
 * minimization, (2) iSWAP phase sum and beta by Ramsey pairs, fixing the
 * virtual frame shifts, (3) cPHASE length by population maximization from
 * |11>, (4) cPHASE detuning by a spin-echo Ramsey pair locating the
 * two-qubit phase pi, (5) cPHASE single-qubit phases by Ramsey pairs,
 * compensated with frame shifts.  Only the control qubit is ever measured,
 * so every phase estimate rides on an even number of swaps.
 */
#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hqt/device.hpp"

namespace hqt::cal {

using device::DeviceModel;
using device::GateSequence;

struct CalOptions {
    int scan_points = 41;      ///< grid points per parameter sweep
    int theta_points = 16;     ///< Ramsey points over 2*pi
    double rel_window = 0.2;   ///< +-20% scan window (shrinks with n)
    int max_rounds = 5;        ///< iSWAP length/detuning alternation cap
    double converge_rel = 1e-3;  ///< 0.1% round-to-round change
};

struct ScanRecord {
    std::string name;
    std::vector<double> parameter;
    std::vector<double> p_e;
    double vertex = 0.0;    ///< quadratic-fit extremum location
    double value = 0.0;     ///< fitted p_e at the vertex
};

struct RamseyRecord {
    std::string name;
    std::vector<double> theta;
    std::vector<double> p_e;
    double phase = 0.0;
    double r_squared = 0.0;
};

struct FitReports {
    std::vector<ScanRecord> scans;
    std::vector<RamseyRecord> ramseys;
    int iswap_rounds = 0;
};

struct PulseSettings {
    double length = 0.0;
    double detuning = 0.0;
    double delta1 = 0.0;  ///< frame shift applied after the pulse (control)
    double delta2 = 0.0;  ///< frame shift applied after the pulse (hidden)
};

struct CalibratedGateSet {
    PulseSettings iswap;
    PulseSettings cphase;
    double sigma = 0.0;  ///< estimated gamma1+gamma2
    double beta = 0.0;   ///< estimated gamma3+pi-sigma
    FitReports reports;

    bool iswap_tuned = false;
    bool iswap_phases_tuned = false;
    bool cphase_length_tuned = false;
    bool cphase_frequency_tuned = false;
    bool cphase_phases_tuned = false;

    /// Pulse + frame shift; throws precondition_error before stage (2).
    GateSequence iswap_gate() const;
    /// Pulse + frame shift; throws precondition_error before stage (5).
    GateSequence cphase_gate() const;
};

nlohmann::json to_json(const CalibratedGateSet& gs);

// ---- Generic fitting helpers --------------------------------------------

struct CosineFit {
    double phase = 0.0;      ///< p_e ~ offset + amplitude*cos(theta - phase)
    double amplitude = 0.0;
    double offset = 0.0;
    double r_squared = 0.0;
};
/// Linear least squares on a*cos + b*sin + c; phase invariant under
/// constant offsets of p_e.
CosineFit fit_cosine(const std::vector<double>& theta,
                     const std::vector<double>& p_e);

/// Quadratic fit through the `fit_points` samples nearest the extremum.
/// Throws numeric_error when the extremum is not interior to the window or
/// the curvature has the wrong sign.
double quadratic_vertex(const std::vector<double>& x,
                        const std::vector<double>& y, bool maximize,
                        int fit_points = 7, double* value_at_vertex = nullptr);

ScanRecord run_scan(const std::string& name, const DeviceModel& model,
                    const std::vector<double>& xs,
                    const std::function<GateSequence(double)>& build,
                    bool maximize);

/// Ramsey sweep of the closing pulse angle; throws numeric_error when the
/// cosine fit has R^2 < 0.9.
RamseyRecord run_ramsey(const std::string& name, const DeviceModel& model,
                        const std::function<GateSequence(double)>& build,
                        int theta_points);

// ---- Pulse sequence builders (execution order) ---------------------------

GateSequence cat(std::initializer_list<GateSequence> parts);

GateSequence seq_s1(const device::Swap& sw, int n);
GateSequence seq_s2(const GateSequence& sw, double theta);
GateSequence seq_s3(double theta);
GateSequence seq_s4(const GateSequence& sw, double theta);
GateSequence seq_s5(const GateSequence& sw, double theta);
GateSequence seq_s6(const device::CPhase& cp, const GateSequence& iswap,
                    int n);
GateSequence seq_s7(const device::CPhase& cp, const GateSequence& iswap,
                    double theta);
GateSequence seq_s8(const GateSequence& iswap, double theta);
GateSequence seq_s9(const device::CPhase& cp, double theta);
GateSequence seq_s10(double theta);
GateSequence seq_s11(const device::CPhase& cp, const GateSequence& sw,
                     double theta);
GateSequence seq_s12(const GateSequence& sw, double theta);

// ---- Calibration stages --------------------------------------------------

/// Alternating length/detuning scans with n in {1,3,5} pulse repetitions
/// (windows shrink as 1/n); stops once both parameters move by less than
/// 0.1% between rounds, all repetition counts having been used.
std::pair<double, double> calibrate_iswap(const DeviceModel& model,
                                          CalibratedGateSet& gs,
                                          const CalOptions& opt = {});

struct IswapPhaseResult {
    double sigma = 0.0;
    double beta = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
};
/// Ramsey pairs: the sum of the transfer phases from the S2/S3 shift, beta
/// from S4/S5, then delta2 = 0 and delta1 from the phase relation
/// sigma - delta1 - delta2 = pi - beta.
IswapPhaseResult calibrate_iswap_phases(const DeviceModel& model,
                                        CalibratedGateSet& gs,
                                        const CalOptions& opt = {});

double calibrate_cphase_length(const DeviceModel& model, CalibratedGateSet& gs,
                               const CalOptions& opt = {});

/// Spin-echo Ramsey pair per detuning point; linear fit of the two-qubit
/// phase against detuning, returning the crossing through pi.
double calibrate_cphase_frequency(const DeviceModel& model,
                                  CalibratedGateSet& gs,
                                  const CalOptions& opt = {});

std::pair<double, double> calibrate_cphase_single_phases(
    const DeviceModel& model, CalibratedGateSet& gs, const CalOptions& opt = {});

CalibratedGateSet full_tuneup(const DeviceModel& model,
                              const CalOptions& opt = {});

/// Two columns: parameter, p_e.
void write_scan_csv(std::ostream& os, const ScanRecord& scan);

}  // namespace hqt::cal

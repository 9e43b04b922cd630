/** \file
 * Scan/fit machinery, the Ramsey pulse sequences, and the five tune-up
 * stages.  All probability estimates are noiseless expectation values from
 * the device model; sampling noise is the caller's concern.
 */
#include "hqt/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <Eigen/Dense>

#include "hqt/types.hpp"

namespace hqt::cal {
namespace {

using device::CPhase;
using device::FrameShift;
using device::Rotation;
using device::Swap;

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> xs(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        xs[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return xs;
}

GateSequence& append(GateSequence& seq, const GateSequence& part) {
    seq.gates.insert(seq.gates.end(), part.gates.begin(), part.gates.end());
    return seq;
}

/// Double excitation flip: both qubits swap their excitation state while
/// any phase picked up from the swaps cancels against the reference
/// sequence that shares the same fragment.
GateSequence flip_fragment(const GateSequence& iswap) {
    GateSequence s;
    s.then(Rotation{pi, 0.0});
    append(s, iswap);
    s.then(Rotation{pi, 0.0});
    append(s, iswap);
    return s;
}

void check_options(const CalOptions& opt) {
    if (opt.scan_points < 9 || opt.theta_points < 4 || opt.rel_window <= 0 ||
        opt.max_rounds < 1 || opt.converge_rel <= 0)
        throw validation_error("CalOptions: need >= 9 scan points, >= 4 theta "
                               "points, positive window/rounds/tolerance");
}

constexpr int kReps[3] = {1, 3, 5};

}  // namespace

GateSequence cat(std::initializer_list<GateSequence> parts) {
    GateSequence out;
    for (const auto& p : parts) append(out, p);
    return out;
}

// ---- Sequence builders ---------------------------------------------------
//
// Builders emit execution order: the first gate listed acts first.  Every
// sequence starts from |00> and ends with a control-qubit measurement
// (implicit in run_sequence).

GateSequence seq_s1(const Swap& sw, int n) {
    if (n < 1) throw validation_error("seq_s1: repetition count must be >= 1");
    GateSequence s;
    s.then(Rotation{pi, 0.0});
    for (int i = 0; i < n; ++i) s.then(sw);
    return s;
}

GateSequence seq_s2(const GateSequence& sw, double theta) {
    GateSequence s;
    s.then(Rotation{pi / 2, 0.0});
    append(s, sw);
    append(s, sw);
    s.then(Rotation{pi / 2, theta});
    return s;
}

GateSequence seq_s3(double theta) {
    GateSequence s;
    s.then(Rotation{pi / 2, 0.0});
    s.then(Rotation{pi / 2, theta});
    return s;
}

GateSequence seq_s4(const GateSequence& sw, double theta) {
    GateSequence s;
    s.then(Rotation{pi, 0.0});
    append(s, sw);
    s.then(Rotation{pi / 2, 0.0});
    append(s, sw);
    append(s, sw);
    s.then(Rotation{pi / 2, theta});
    return s;
}

GateSequence seq_s5(const GateSequence& sw, double theta) {
    GateSequence s;
    s.then(Rotation{pi, 0.0});
    append(s, sw);
    s.then(Rotation{pi / 2, 0.0});
    s.then(Rotation{pi / 2, theta});
    return s;
}

GateSequence seq_s6(const CPhase& cp, const GateSequence& iswap, int n) {
    if (n < 1) throw validation_error("seq_s6: repetition count must be >= 1");
    GateSequence s;
    s.then(Rotation{pi, 0.0});
    append(s, iswap);
    s.then(Rotation{pi, 0.0});
    for (int i = 0; i < n; ++i) s.then(cp);
    return s;
}

GateSequence seq_s7(const CPhase& cp, const GateSequence& iswap, double theta) {
    GateSequence s;
    s.then(Rotation{pi / 2, 0.0});
    s.then(cp);
    append(s, flip_fragment(iswap));
    s.then(cp);
    s.then(Rotation{pi / 2, theta});
    return s;
}

GateSequence seq_s8(const GateSequence& iswap, double theta) {
    GateSequence s;
    s.then(Rotation{pi / 2, 0.0});
    append(s, flip_fragment(iswap));
    s.then(Rotation{pi / 2, theta});
    return s;
}

GateSequence seq_s9(const CPhase& cp, double theta) {
    GateSequence s;
    s.then(Rotation{pi / 2, 0.0});
    s.then(cp);
    s.then(Rotation{pi / 2, theta});
    return s;
}

GateSequence seq_s10(double theta) { return seq_s3(theta); }

GateSequence seq_s11(const CPhase& cp, const GateSequence& sw, double theta) {
    GateSequence s;
    s.then(Rotation{pi / 2, 0.0});
    append(s, sw);
    s.then(cp);
    append(s, sw);
    s.then(Rotation{pi / 2, theta});
    return s;
}

GateSequence seq_s12(const GateSequence& sw, double theta) {
    return seq_s2(sw, theta);
}

// ---- Calibrated gate set -------------------------------------------------

GateSequence CalibratedGateSet::iswap_gate() const {
    if (!iswap_phases_tuned)
        throw precondition_error(
            "iswap_gate: calibrate_iswap_phases has not run yet");
    GateSequence s;
    s.then(Swap{iswap.length, iswap.detuning});
    s.then(FrameShift{iswap.delta1, iswap.delta2});
    return s;
}

GateSequence CalibratedGateSet::cphase_gate() const {
    if (!cphase_phases_tuned)
        throw precondition_error(
            "cphase_gate: calibrate_cphase_single_phases has not run yet");
    GateSequence s;
    s.then(CPhase{cphase.length, cphase.detuning});
    s.then(FrameShift{cphase.delta1, cphase.delta2});
    return s;
}

nlohmann::json to_json(const CalibratedGateSet& gs) {
    auto pulse = [](const PulseSettings& p) {
        return nlohmann::json{{"length", p.length},
                              {"detuning", p.detuning},
                              {"delta1", p.delta1},
                              {"delta2", p.delta2}};
    };
    nlohmann::json scans = nlohmann::json::array();
    for (const auto& s : gs.reports.scans)
        scans.push_back({{"name", s.name},
                         {"parameter", s.parameter},
                         {"p_e", s.p_e},
                         {"vertex", s.vertex},
                         {"value", s.value}});
    nlohmann::json ramseys = nlohmann::json::array();
    for (const auto& r : gs.reports.ramseys)
        ramseys.push_back({{"name", r.name},
                           {"theta", r.theta},
                           {"p_e", r.p_e},
                           {"phase", r.phase},
                           {"r_squared", r.r_squared}});
    return nlohmann::json{
        {"iswap", pulse(gs.iswap)},
        {"cphase", pulse(gs.cphase)},
        {"sigma", gs.sigma},
        {"beta", gs.beta},
        {"stages",
         {{"iswap", gs.iswap_tuned},
          {"iswap_phases", gs.iswap_phases_tuned},
          {"cphase_length", gs.cphase_length_tuned},
          {"cphase_frequency", gs.cphase_frequency_tuned},
          {"cphase_phases", gs.cphase_phases_tuned}}},
        {"reports",
         {{"iswap_rounds", gs.reports.iswap_rounds},
          {"scans", std::move(scans)},
          {"ramseys", std::move(ramseys)}}}};
}

// ---- Fitting -------------------------------------------------------------

CosineFit fit_cosine(const std::vector<double>& theta,
                     const std::vector<double>& p_e) {
    if (theta.size() != p_e.size() || theta.size() < 4)
        throw validation_error(
            "fit_cosine: need matching vectors with at least 4 points");
    const int n = static_cast<int>(theta.size());
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        a(i, 0) = std::cos(theta[static_cast<size_t>(i)]);
        a(i, 1) = std::sin(theta[static_cast<size_t>(i)]);
        a(i, 2) = 1.0;
        y(i) = p_e[static_cast<size_t>(i)];
    }
    Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
    const double ss_res = (a * c - y).squaredNorm();
    const double ss_tot = (y.array() - y.mean()).square().sum();
    CosineFit f;
    f.phase = std::atan2(c(1), c(0));
    f.amplitude = std::hypot(c(0), c(1));
    f.offset = c(2);
    f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    return f;
}

double quadratic_vertex(const std::vector<double>& x,
                        const std::vector<double>& y, bool maximize,
                        int fit_points, double* value_at_vertex) {
    if (x.size() != y.size())
        throw validation_error("quadratic_vertex: size mismatch");
    if (fit_points < 3 || fit_points % 2 == 0)
        throw validation_error("quadratic_vertex: fit_points must be odd, >= 3");
    const int n = static_cast<int>(x.size());
    if (n < fit_points)
        throw validation_error("quadratic_vertex: fewer samples than fit_points");

    int best = 0;
    for (int i = 1; i < n; ++i) {
        const bool better = maximize ? y[static_cast<size_t>(i)] > y[static_cast<size_t>(best)]
                                     : y[static_cast<size_t>(i)] < y[static_cast<size_t>(best)];
        if (better) best = i;
    }
    const int half = fit_points / 2;
    if (best < half || best >= n - half)
        throw numeric_error(
            "quadratic_vertex: extremum sits at the scan-window edge; widen "
            "or recenter the scan");

    // Fit in window-relative coordinates; physical parameter scales span
    // many orders of magnitude (seconds vs rad/s) and would otherwise wreck
    // the conditioning of the normal equations.
    const double x0 = x[static_cast<size_t>(best)];
    const double width = x[static_cast<size_t>(best + half)] -
                         x[static_cast<size_t>(best - half)];
    if (!(width > 0))
        throw validation_error("quadratic_vertex: samples must be increasing");
    Eigen::MatrixXd a(fit_points, 3);
    Eigen::VectorXd b(fit_points);
    for (int k = 0; k < fit_points; ++k) {
        const double u = (x[static_cast<size_t>(best - half + k)] - x0) / width;
        a(k, 0) = u * u;
        a(k, 1) = u;
        a(k, 2) = 1.0;
        b(k) = y[static_cast<size_t>(best - half + k)];
    }
    Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
    const bool curvature_ok = maximize ? c(0) < 0.0 : c(0) > 0.0;
    if (!curvature_ok)
        throw numeric_error(
            "quadratic_vertex: fit curvature inconsistent with an interior "
            "extremum");
    const double du = -c(1) / (2.0 * c(0));
    if (std::abs(du) > 1.0)
        throw numeric_error("quadratic_vertex: fitted vertex escaped the scan "
                            "window");
    if (value_at_vertex) *value_at_vertex = c(2) - c(1) * c(1) / (4.0 * c(0));
    return x0 + du * width;
}

ScanRecord run_scan(const std::string& name, const DeviceModel& model,
                    const std::vector<double>& xs,
                    const std::function<GateSequence(double)>& build,
                    bool maximize) {
    ScanRecord rec;
    rec.name = name;
    rec.parameter = xs;
    rec.p_e.reserve(xs.size());
    for (double v : xs) rec.p_e.push_back(device::run_sequence(model, build(v)));
    rec.vertex = quadratic_vertex(rec.parameter, rec.p_e, maximize, 7, &rec.value);
    return rec;
}

RamseyRecord run_ramsey(const std::string& name, const DeviceModel& model,
                        const std::function<GateSequence(double)>& build,
                        int theta_points) {
    if (theta_points < 4)
        throw validation_error("run_ramsey: need at least 4 theta points");
    RamseyRecord rec;
    rec.name = name;
    rec.theta.reserve(static_cast<size_t>(theta_points));
    rec.p_e.reserve(static_cast<size_t>(theta_points));
    for (int i = 0; i < theta_points; ++i) {
        const double th = 2.0 * pi * i / theta_points;
        rec.theta.push_back(th);
        rec.p_e.push_back(device::run_sequence(model, build(th)));
    }
    const CosineFit f = fit_cosine(rec.theta, rec.p_e);
    rec.phase = f.phase;
    rec.r_squared = f.r_squared;
    if (f.r_squared < 0.9)
        throw numeric_error("run_ramsey: " + name +
                            " cosine fit rejected (R^2 < 0.9)");
    return rec;
}

// ---- Stages --------------------------------------------------------------

std::pair<double, double> calibrate_iswap(const DeviceModel& model,
                                          CalibratedGateSet& gs,
                                          const CalOptions& opt) {
    check_options(opt);
    double len = model.iswap_resonant_length();  // drive coupling is known
    double det = 0.0;

    int rounds = 0;
    for (int round = 0; round < opt.max_rounds; ++round) {
        const int n = kReps[std::min(round, 2)];
        const std::string tag = "_n" + std::to_string(n) + "_round" +
                                std::to_string(round);

        const double wl = opt.rel_window * len / n;
        ScanRecord lrec = run_scan(
            "iswap_length" + tag, model,
            linspace(len - wl, len + wl, opt.scan_points),
            [&](double L) { return seq_s1(Swap{L, det}, n); }, false);
        const double len_new = lrec.vertex;

        const double wd = opt.rel_window * model.g_iswap / n;
        ScanRecord drec = run_scan(
            "iswap_detuning" + tag, model,
            linspace(det - wd, det + wd, opt.scan_points),
            [&](double d) { return seq_s1(Swap{len_new, d}, n); }, false);
        const double det_new = drec.vertex;

        gs.reports.scans.push_back(std::move(lrec));
        gs.reports.scans.push_back(std::move(drec));

        const bool converged =
            std::abs(len_new - len) < opt.converge_rel * len &&
            std::abs(det_new - det) < opt.converge_rel * model.g_iswap;
        len = len_new;
        det = det_new;
        rounds = round + 1;
        // All repetition counts must have been exercised before stopping.
        if (converged && round >= 2) break;
    }
    gs.reports.iswap_rounds = rounds;
    gs.iswap.length = len;
    gs.iswap.detuning = det;
    gs.iswap_tuned = true;
    return {len, det};
}

IswapPhaseResult calibrate_iswap_phases(const DeviceModel& model,
                                        CalibratedGateSet& gs,
                                        const CalOptions& opt) {
    check_options(opt);
    if (!gs.iswap_tuned)
        throw precondition_error(
            "calibrate_iswap_phases: calibrate_iswap has not run yet");
    GateSequence sw;  // bare pulse; frame shifts are what we are solving for
    sw.then(Swap{gs.iswap.length, gs.iswap.detuning});

    auto r2 = run_ramsey("s2", model,
                         [&](double th) { return seq_s2(sw, th); },
                         opt.theta_points);
    auto r3 = run_ramsey("s3", model,
                         [&](double th) { return seq_s3(th); },
                         opt.theta_points);
    auto r4 = run_ramsey("s4", model,
                         [&](double th) { return seq_s4(sw, th); },
                         opt.theta_points);
    auto r5 = run_ramsey("s5", model,
                         [&](double th) { return seq_s5(sw, th); },
                         opt.theta_points);

    IswapPhaseResult res;
    res.sigma = wrap_angle(r2.phase - r3.phase);
    // The double-swap echo accumulates twice the |11> phase minus the
    // transfer-phase sum, so the residual beta comes out halved.
    res.beta = 0.5 * wrap_angle(r4.phase - r5.phase - res.sigma);
    res.delta1 = wrap_angle(res.sigma - pi + res.beta);
    res.delta2 = 0.0;

    gs.reports.ramseys.push_back(std::move(r2));
    gs.reports.ramseys.push_back(std::move(r3));
    gs.reports.ramseys.push_back(std::move(r4));
    gs.reports.ramseys.push_back(std::move(r5));
    gs.sigma = res.sigma;
    gs.beta = res.beta;
    gs.iswap.delta1 = res.delta1;
    gs.iswap.delta2 = res.delta2;
    gs.iswap_phases_tuned = true;
    return res;
}

double calibrate_cphase_length(const DeviceModel& model, CalibratedGateSet& gs,
                               const CalOptions& opt) {
    check_options(opt);
    if (!gs.iswap_phases_tuned)
        throw precondition_error(
            "calibrate_cphase_length: the iSWAP must be fully calibrated "
            "before the |11> preparation is trusted");
    const GateSequence isw = gs.iswap_gate();

    double len = model.cphase_resonant_length();
    for (int k = 0; k < 3; ++k) {
        const int n = kReps[k];
        const double w = opt.rel_window * len / n;
        ScanRecord rec = run_scan(
            "cphase_length_n" + std::to_string(n), model,
            linspace(len - w, len + w, opt.scan_points),
            [&](double L) { return seq_s6(CPhase{L, gs.cphase.detuning}, isw, n); },
            true);
        len = rec.vertex;
        gs.reports.scans.push_back(std::move(rec));
    }
    gs.cphase.length = len;
    gs.cphase_length_tuned = true;
    return len;
}

double calibrate_cphase_frequency(const DeviceModel& model,
                                  CalibratedGateSet& gs,
                                  const CalOptions& opt) {
    check_options(opt);
    if (!gs.cphase_length_tuned)
        throw precondition_error(
            "calibrate_cphase_frequency: calibrate_cphase_length has not run "
            "yet");
    const GateSequence isw = gs.iswap_gate();

    // The reference sequence has no cPHASE pulse, so one measurement serves
    // every detuning point.
    RamseyRecord ref = run_ramsey(
        "s8_reference", model,
        [&](double th) { return seq_s8(isw, th); }, opt.theta_points);

    const std::vector<double> ds =
        linspace(-opt.rel_window * model.g_cphase,
                 opt.rel_window * model.g_cphase, opt.scan_points);
    ScanRecord rec;
    rec.name = "cphase_phase_residual_vs_detuning";
    rec.parameter = ds;
    rec.p_e.reserve(ds.size());
    for (size_t i = 0; i < ds.size(); ++i) {
        RamseyRecord r7 = run_ramsey(
            "s7_detuning" + std::to_string(i), model,
            [&](double th) {
                return seq_s7(CPhase{gs.cphase.length, ds[i]}, isw, th);
            },
            opt.theta_points);
        // Residual of the conditional phase from pi; continuous near zero.
        rec.p_e.push_back(wrap_angle(r7.phase - ref.phase - pi));
        gs.reports.ramseys.push_back(std::move(r7));
    }
    gs.reports.ramseys.push_back(std::move(ref));

    const int n = static_cast<int>(ds.size());
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        a(i, 0) = ds[static_cast<size_t>(i)];
        a(i, 1) = 1.0;
        y(i) = rec.p_e[static_cast<size_t>(i)];
    }
    Eigen::Vector2d c = a.colPivHouseholderQr().solve(y);
    const double rms = std::sqrt((a * c - y).squaredNorm() / n);
    if (rms > 0.05)
        throw numeric_error(
            "calibrate_cphase_frequency: linear fit of the conditional phase "
            "has rms residual above 0.05 rad");
    if (std::abs(c(0)) * opt.rel_window * model.g_cphase < 0.01)
        throw numeric_error(
            "calibrate_cphase_frequency: conditional phase barely responds "
            "to detuning across the scan window");
    const double dstar = -c(1) / c(0);
    if (dstar < ds.front() || dstar > ds.back())
        throw numeric_error(
            "calibrate_cphase_frequency: pi crossing falls outside the scan "
            "window");
    rec.vertex = dstar;
    rec.value = 0.0;
    gs.reports.scans.push_back(std::move(rec));

    gs.cphase.detuning = dstar;
    gs.cphase_frequency_tuned = true;
    return dstar;
}

std::pair<double, double> calibrate_cphase_single_phases(
    const DeviceModel& model, CalibratedGateSet& gs, const CalOptions& opt) {
    check_options(opt);
    if (!gs.cphase_frequency_tuned)
        throw precondition_error(
            "calibrate_cphase_single_phases: calibrate_cphase_frequency has "
            "not run yet");
    const CPhase cp{gs.cphase.length, gs.cphase.detuning};
    const GateSequence isw = gs.iswap_gate();

    auto r9 = run_ramsey("s9", model,
                         [&](double th) { return seq_s9(cp, th); },
                         opt.theta_points);
    auto r10 = run_ramsey("s10", model,
                          [&](double th) { return seq_s10(th); },
                          opt.theta_points);
    auto r11 = run_ramsey("s11", model,
                          [&](double th) { return seq_s11(cp, isw, th); },
                          opt.theta_points);
    auto r12 = run_ramsey("s12", model,
                          [&](double th) { return seq_s12(isw, th); },
                          opt.theta_points);

    const double g01 = wrap_angle(r9.phase - r10.phase);
    const double g10 = wrap_angle(r11.phase - r12.phase);
    gs.reports.ramseys.push_back(std::move(r9));
    gs.reports.ramseys.push_back(std::move(r10));
    gs.reports.ramseys.push_back(std::move(r11));
    gs.reports.ramseys.push_back(std::move(r12));

    gs.cphase.delta1 = g01;
    gs.cphase.delta2 = g10;
    gs.cphase_phases_tuned = true;
    return {g01, g10};
}

CalibratedGateSet full_tuneup(const DeviceModel& model, const CalOptions& opt) {
    CalibratedGateSet gs;
    calibrate_iswap(model, gs, opt);
    calibrate_iswap_phases(model, gs, opt);
    calibrate_cphase_length(model, gs, opt);
    calibrate_cphase_frequency(model, gs, opt);
    calibrate_cphase_single_phases(model, gs, opt);
    return gs;
}

void write_scan_csv(std::ostream& os, const ScanRecord& scan) {
    os << "parameter,p_e\n" << std::setprecision(17);
    for (size_t i = 0; i < scan.parameter.size(); ++i)
        os << scan.parameter[i] << ',' << scan.p_e[i] << '\n';
}

}  // namespace hqt::cal

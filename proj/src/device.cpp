/** \file
 * Device simulator: pulse unitaries, decoherence, frame tracking.
 */
#include "hqt/device.hpp"

#include <cmath>
#include <random>

#include "hqt/pauli.hpp"

namespace hqt::device {

namespace {

using Mat2 = Eigen::Matrix2cd;
using Mat3 = Eigen::Matrix3cd;

bool finite(double x) { return std::isfinite(x); }

Mat6 kron32(const Mat3& a, const Mat2& b) {
    Mat6 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return m;
}

/// exp(-i H t) for the 2x2 block H = [[-d/2, g], [g, d/2]].
Mat2 rabi_symmetric(double g, double d, double t) {
    const double om = std::sqrt(g * g + 0.25 * d * d);
    const double c = std::cos(om * t);
    const double s = om > 0 ? std::sin(om * t) / om : t;
    Mat2 u;
    u << cxd(c, 0.5 * d * s), cxd(0, -g * s), cxd(0, -g * s),
        cxd(c, -0.5 * d * s);
    return u;
}

/// Phase of the shared parametric drive relative to the qubit frames.  It
/// shifts the two transfer phases antisymmetrically, so observables can
/// depend on (gamma1, gamma2) only through their sum: changing the split
/// is the same as a hidden-qubit z rotation, a pure gauge.
double drive_phase(const DeviceModel& m) {
    return 0.5 * (m.true_iswap.gamma1 - m.true_iswap.gamma2);
}

Mat6 cphase_unitary6(const DeviceModel& m, double length, double detuning) {
    const double tstar = m.cphase_resonant_length();
    const double r10 = m.true_cphase.gamma10 / tstar;
    const double r01 = m.true_cphase.gamma01 / tstar;
    const double b11 = (m.true_cphase.gamma11 - pi) / tstar;
    const cxd drive = std::exp(cxd(0, drive_phase(m)));
    // Drive frame: |20> sits at -detuning, i.e. H = [[0, g], [g, -d]] on
    // {|11>,|20>}; split off the trace to reuse the symmetric Rabi block.
    Mat2 sub = std::exp(cxd(0, 0.5 * detuning * length)) *
               rabi_symmetric(m.g_cphase, -detuning, length);
    Mat6 u = Mat6::Identity();
    u(1, 1) = std::exp(cxd(0, r10 * length));
    u(2, 2) = std::exp(cxd(0, r01 * length));
    u(3, 3) = sub(0, 0) * std::exp(cxd(0, b11 * length));
    u(3, 4) = sub(0, 1) * std::exp(cxd(0, b11 * length)) / drive;
    u(4, 3) = sub(1, 0) * drive;
    u(4, 4) = sub(1, 1);
    return u;
}

Mat6 iswap_unitary6(const DeviceModel& m, double length, double detuning) {
    const double tstar = m.iswap_resonant_length();
    // Symmetric part of the transfer phases accumulates as a frame rate;
    // the antisymmetric part is the constant drive phase.
    const double a =
        (0.5 * (m.true_iswap.gamma1 + m.true_iswap.gamma2) + pi / 2) / tstar;
    const double a3 = m.true_iswap.gamma3 / tstar;
    const cxd row = std::exp(cxd(0, a * length));
    const cxd drive = std::exp(cxd(0, drive_phase(m)));
    Mat2 sub = rabi_symmetric(m.g_iswap, detuning, length);
    Mat6 u = Mat6::Identity();
    u(1, 1) = row * sub(0, 0);
    u(1, 2) = row * sub(0, 1) / drive;
    u(2, 1) = row * sub(1, 0) * drive;
    u(2, 2) = row * sub(1, 1);
    u(3, 3) = std::exp(cxd(0, a3 * length));
    return u;
}

Mat3 qutrit_rotation(double theta, double phi) {
    Mat3 u = Mat3::Identity();
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    u(0, 0) = c;
    u(1, 1) = c;
    u(0, 1) = cxd(0, -s) * std::exp(cxd(0, -phi));
    u(1, 0) = cxd(0, -s) * std::exp(cxd(0, phi));
    return u;
}

struct QubitNoise {
    std::vector<Mat2> kraus;
};

QubitNoise qubit_noise(double t1, double t2, double t) {
    const double gamma = 1.0 - std::exp(-t / t1);
    const double inv_phi = 1.0 / t2 - 0.5 / t1;
    const double p = 0.5 * (1.0 - std::exp(-t * inv_phi));
    QubitNoise n;
    Mat2 a0 = Mat2::Identity();
    a0(1, 1) = std::sqrt(1.0 - gamma);
    Mat2 a1 = Mat2::Zero();
    a1(0, 1) = std::sqrt(gamma);
    n.kraus = {a0, a1};
    if (p > 0) {
        Mat2 z = Mat2::Identity();
        z(1, 1) = -1.0;
        std::vector<Mat2> out;
        for (const auto& k : n.kraus) {
            out.push_back(std::sqrt(1.0 - p) * k);
            out.push_back(std::sqrt(p) * (z * k));
        }
        n.kraus = std::move(out);
    }
    return n;
}

/// Lift a 2x2 Kraus operator to the control qutrit; |2> is untouched.
Mat3 lift_control(const Mat2& k, bool first_of_set) {
    Mat3 m = Mat3::Zero();
    m.block<2, 2>(0, 0) = k;
    if (first_of_set) m(2, 2) = 1.0;
    return m;
}

Mat6 noise_channel(const Mat6& rho, const DeviceModel& m, double t) {
    if (t <= 0) return rho;
    const Mat2 id2 = Mat2::Identity();
    Mat6 out = Mat6::Zero();
    {
        const auto n = qubit_noise(m.t1_control, m.t2_control, t);
        for (size_t i = 0; i < n.kraus.size(); ++i) {
            // Exactly one Kraus operator keeps the |2><2| term so that the
            // lifted set still resolves the identity.
            Mat6 k = kron32(lift_control(n.kraus[i], i == 0), id2);
            out += k * rho * k.adjoint();
        }
    }
    Mat6 out2 = Mat6::Zero();
    {
        const auto n = qubit_noise(m.t1_hidden, m.t2_hidden, t);
        Mat3 id3 = Mat3::Identity();
        for (const auto& kq : n.kraus) {
            Mat6 k = kron32(id3, kq);
            out2 += k * out * k.adjoint();
        }
    }
    return out2;
}

void check_density(const Mat6& rho) {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
        throw validation_error("apply_noise: state is not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > 1e-8 ||
        std::abs(rho.trace().imag()) > 1e-8)
        throw validation_error("apply_noise: state trace is not 1");
    Eigen::SelfAdjointEigenSolver<Mat6> es(0.5 * (rho + rho.adjoint()),
                                           Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw validation_error("apply_noise: state is not PSD");
}

}  // namespace

double DeviceModel::beta() const {
    return wrap_angle(true_iswap.gamma3 + pi - true_iswap.gamma1 -
                      true_iswap.gamma2);
}

void DeviceModel::normalize_and_validate() {
    auto positive = [](double x, const char* what) {
        if (!(x > 0) || !std::isfinite(x))
            throw validation_error(std::string("DeviceModel: ") + what +
                                   " must be positive");
    };
    positive(t1_control, "t1_control");
    positive(t2_control, "t2_control");
    positive(t1_hidden, "t1_hidden");
    positive(t2_hidden, "t2_hidden");
    positive(g_iswap, "g_iswap");
    positive(g_cphase, "g_cphase");
    positive(durations.single_qubit, "durations.single_qubit");
    positive(durations.iswap, "durations.iswap");
    positive(durations.cphase, "durations.cphase");
    if (t2_control > 2.0 * t1_control + 1e-15)
        throw validation_error("DeviceModel: control t2 exceeds 2*t1");
    if (t2_hidden > 2.0 * t1_hidden + 1e-15)
        throw validation_error("DeviceModel: hidden t2 exceeds 2*t1");
    for (double* phase :
         {&true_iswap.gamma1, &true_iswap.gamma2, &true_iswap.gamma3,
          &true_cphase.gamma01, &true_cphase.gamma10, &true_cphase.gamma11}) {
        if (!std::isfinite(*phase))
            throw validation_error("DeviceModel: non-finite phase");
        *phase = wrap_angle(*phase);
    }
}

DeviceModel default_model() {
    DeviceModel m;
    m.true_iswap = {0.83, -1.21, wrap_angle(0.83 - 1.21 + 0.05 - pi)};
    m.true_cphase = {0.37, -0.52, pi - 0.23};
    m.doc = {{"control_frequency_ghz", 6.19},
             {"hidden_frequency_ghz", 5.09},
             {"coupler_bias_ghz", 7.7},
             {"control_anharmonicity_mhz", -290.0},
             {"hidden_anharmonicity_mhz", -310.0}};
    m.normalize_and_validate();
    return m;
}

DeviceModel noiseless_model() {
    DeviceModel m = default_model();
    m.t1_control = m.t2_control = m.t1_hidden = m.t2_hidden = 1e6;
    return m;
}

nlohmann::json to_json(const DeviceModel& m) {
    return {
        {"t1_control", m.t1_control},
        {"t2_control", m.t2_control},
        {"t1_hidden", m.t1_hidden},
        {"t2_hidden", m.t2_hidden},
        {"g_iswap", m.g_iswap},
        {"g_cphase", m.g_cphase},
        {"true_iswap",
         {{"gamma1", m.true_iswap.gamma1},
          {"gamma2", m.true_iswap.gamma2},
          {"gamma3", m.true_iswap.gamma3}}},
        {"true_cphase",
         {{"gamma01", m.true_cphase.gamma01},
          {"gamma10", m.true_cphase.gamma10},
          {"gamma11", m.true_cphase.gamma11}}},
        {"durations",
         {{"single_qubit", m.durations.single_qubit},
          {"iswap", m.durations.iswap},
          {"cphase", m.durations.cphase}}},
        {"beta", m.beta()},
        {"doc", m.doc},
    };
}

DeviceModel model_from_json(const nlohmann::json& j) {
    DeviceModel m;
    try {
        m.t1_control = j.at("t1_control").get<double>();
        m.t2_control = j.at("t2_control").get<double>();
        m.t1_hidden = j.at("t1_hidden").get<double>();
        m.t2_hidden = j.at("t2_hidden").get<double>();
        m.g_iswap = j.at("g_iswap").get<double>();
        m.g_cphase = j.at("g_cphase").get<double>();
        const auto& ti = j.at("true_iswap");
        m.true_iswap = {ti.at("gamma1").get<double>(),
                        ti.at("gamma2").get<double>(),
                        ti.at("gamma3").get<double>()};
        const auto& tc = j.at("true_cphase");
        m.true_cphase = {tc.at("gamma01").get<double>(),
                         tc.at("gamma10").get<double>(),
                         tc.at("gamma11").get<double>()};
        const auto& d = j.at("durations");
        m.durations = {d.at("single_qubit").get<double>(),
                       d.at("iswap").get<double>(),
                       d.at("cphase").get<double>()};
        m.doc = j.value("doc", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("DeviceModel JSON: ") + e.what());
    }
    m.normalize_and_validate();
    return m;
}

CMat4 iswap_unitary(const DeviceModel& model, double length, double detuning) {
    if (!(length > 0) || !finite(length) || !finite(detuning))
        throw validation_error("iswap_unitary: length must be positive");
    return iswap_unitary6(model, length, detuning).topLeftCorner<4, 4>();
}

std::pair<CMat4, double> cphase_unitary(const DeviceModel& model,
                                        double length, double detuning) {
    if (!(length > 0) || !finite(length) || !finite(detuning))
        throw validation_error("cphase_unitary: length must be positive");
    Mat6 u6 = cphase_unitary6(model, length, detuning);
    double leakage = std::norm(u6(4, 3));
    CMat4 u = u6.topLeftCorner<4, 4>();
    if (1.0 - leakage > 1e-9) u.col(3) /= std::sqrt(1.0 - leakage);
    return {u, leakage};
}

Mat6 frame_unitary(double delta1, double delta2) {
    Mat6 f = Mat6::Zero();
    for (int c = 0; c < 3; ++c)
        for (int h = 0; h < 2; ++h)
            f(2 * c + h, 2 * c + h) =
                std::exp(cxd(0, -(delta1 * c + delta2 * h)));
    return f;
}

GateEffect gate_effect(const DeviceModel& model, const Gate& gate,
                       const FrameState& frames) {
    GateEffect eff{Mat6::Identity(), 0.0};
    if (const auto* r = std::get_if<Rotation>(&gate)) {
        if (!finite(r->theta) || !finite(r->phi))
            throw validation_error("Rotation: non-finite parameters");
        eff.u = kron32(qutrit_rotation(r->theta, r->phi), Mat2::Identity());
        eff.duration = model.durations.single_qubit;
    } else if (const auto* s = std::get_if<Swap>(&gate)) {
        if (!(s->length > 0) || !finite(s->length) || !finite(s->detuning))
            throw validation_error("Swap: length must be positive");
        eff.u = iswap_unitary6(model, s->length, s->detuning);
        eff.duration = s->length;
    } else if (const auto* c = std::get_if<CPhase>(&gate)) {
        if (!(c->length > 0) || !finite(c->length) || !finite(c->detuning))
            throw validation_error("CPhase: length must be positive");
        eff.u = cphase_unitary6(model, c->length, c->detuning);
        eff.duration = c->length;
    } else {
        const auto& f = std::get<FrameShift>(gate);
        if (!finite(f.delta1) || !finite(f.delta2))
            throw validation_error("FrameShift: non-finite parameters");
        return eff;  // virtual gate: identity, no decoherence window
    }
    Mat6 f = frame_unitary(frames.delta1, frames.delta2);
    eff.u = f.adjoint() * eff.u * f;
    return eff;
}

void advance_frames(const Gate& gate, FrameState& frames) {
    if (const auto* f = std::get_if<FrameShift>(&gate)) {
        frames.delta1 += f->delta1;
        frames.delta2 += f->delta2;
    }
}

Mat6 embed_state(const CMat4& rho) {
    Mat6 out = Mat6::Zero();
    out.topLeftCorner<4, 4>() = rho;
    return out;
}

CMat4 computational_block(const Mat6& rho) {
    return rho.topLeftCorner<4, 4>();
}

Mat6 apply_noise(const Mat6& rho, const DeviceModel& model, double duration) {
    if (duration < 0 || !finite(duration))
        throw validation_error("apply_noise: negative duration");
    check_density(rho);
    DeviceModel m = model;
    m.normalize_and_validate();
    return noise_channel(rho, m, duration);
}

Mat6 run_to_state(const DeviceModel& model, const GateSequence& seq,
                  FrameState frames) {
    DeviceModel m = model;
    m.normalize_and_validate();
    Mat6 rho = Mat6::Zero();
    rho(0, 0) = 1.0;
    for (const auto& gate : seq.gates) {
        GateEffect eff = gate_effect(m, gate, frames);
        rho = eff.u * rho * eff.u.adjoint();
        if (eff.duration > 0) rho = noise_channel(rho, m, eff.duration);
        advance_frames(gate, frames);
    }
    return rho;
}

double run_sequence(const DeviceModel& model, const GateSequence& seq,
                    FrameState frames) {
    Mat6 rho = run_to_state(model, seq, frames);
    double p = rho(2, 2).real() + rho(3, 3).real();
    return std::min(1.0, std::max(0.0, p));
}

double sample_excited(double p, int shots, uint64_t seed) {
    if (shots <= 0) throw validation_error("sample_excited: shots must be > 0");
    if (p < 0 || p > 1)
        throw validation_error("sample_excited: probability out of range");
    std::mt19937_64 rng(seed);
    std::binomial_distribution<int> dist(shots, p);
    return static_cast<double>(dist(rng)) / shots;
}

Ptm gate_ptm(const DeviceModel& model, const Gate& gate,
             const FrameState& frames) {
    DeviceModel m = model;
    m.normalize_and_validate();
    GateEffect eff = gate_effect(m, gate, frames);
    Ptm r = Ptm::Zero();
    for (int j = 0; j < 16; ++j) {
        Mat6 in = embed_state(pauli2(j));
        Mat6 out = eff.u * in * eff.u.adjoint();
        if (eff.duration > 0) out = noise_channel(out, m, eff.duration);
        CMat4 block = computational_block(out);
        for (int i = 0; i < 16; ++i)
            r(i, j) = (pauli2(i) * block).trace().real() / 4.0;
    }
    return r;
}

}  // namespace hqt::device

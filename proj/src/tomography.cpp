/** \file
 * Sequence library, dataset collection, the CPTP-constrained least-squares
 * solver, the damped self-consistency iteration, and gauge fixing.
 */
#include "hqt/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "hqt/pauli.hpp"
#include "hqt/types.hpp"

namespace hqt::tomo {
namespace {

using device::GateSequence;

/// Pauli coordinates of rho0 = |00><00| (support on 11, 1Z, Z1, ZZ).
PtmVec rho0_coords() {
    PtmVec t = PtmVec::Zero();
    t(0) = t(3) = t(12) = t(15) = 1.0;
    return t;
}

constexpr int kMeasIndex = 12;  // sigma_z (x) 1 in the Pauli ordering

const SequenceLibrary& library() {
    static const SequenceLibrary lib = build_sequences();
    return lib;
}

/// Control-qubit subsequences used in the preparation words.
struct PrepOp {
    const char* name;
    Word word;
};
const std::array<PrepOp, 4>& prep_ops() {
    static const std::array<PrepOp, 4> ops = {{
        {"ID", {}},
        {"Rx180", {GateId::rx, GateId::rx}},
        {"Rx90", {GateId::rx}},
        {"Ry90", {GateId::ry}},
    }};
    return ops;
}

void append_word(Word& w, const Word& part) {
    w.insert(w.end(), part.begin(), part.end());
}

}  // namespace

const char* gate_name(GateId g) {
    switch (g) {
        case GateId::rx: return "rx90";
        case GateId::ry: return "ry90";
        case GateId::iswap: return "iswap";
        case GateId::cphase: return "cphase";
    }
    throw validation_error("gate_name: unknown gate id");
}

SequenceLibrary build_sequences() {
    SequenceLibrary lib;

    // Preparations A2.iSWAP.A1 (A1 acts first); the swap is dropped when
    // A1 = ID since there is nothing to load into the hidden qubit.
    int idx = 0;
    for (int i1 = 0; i1 < 4; ++i1)
        for (int i2 = 0; i2 < 4; ++i2) {
            const PrepOp& a1 = prep_ops()[static_cast<size_t>(i1)];
            const PrepOp& a2 = prep_ops()[static_cast<size_t>(i2)];
            Word w = a1.word;
            if (i1 != 0) w.push_back(GateId::iswap);
            append_word(w, a2.word);
            lib.preparations[static_cast<size_t>(idx)] = std::move(w);
            std::string name;
            if (i1 == 0)
                name = a2.name;  // control-only, swap dropped
            else if (i2 == 0)
                name = std::string("iSWAP.") + a1.name;
            else
                name = std::string(a2.name) + ".iSWAP." + a1.name;
            lib.preparation_names[static_cast<size_t>(idx)] = std::move(name);
            ++idx;
        }

    // Analysis words (written right-to-left in the names, stored in
    // execution order).
    const Word rx{GateId::rx}, ry{GateId::ry};
    const Word sw{GateId::iswap}, cp{GateId::cphase};
    auto join = [](std::initializer_list<Word> parts) {
        Word w;
        for (const auto& p : parts) append_word(w, p);
        return w;
    };
    int t = 0;
    auto add = [&](Word w, std::string name) {
        lib.tomography[static_cast<size_t>(t)] = std::move(w);
        lib.tomography_names[static_cast<size_t>(t)] = std::move(name);
        ++t;
    };
    add({}, "ID");
    add(rx, "Rx90");
    add(ry, "Ry90");
    add(sw, "iSWAP");
    add(join({cp, rx}), "Rx90.cPHASE");
    add(join({cp, ry}), "Ry90.cPHASE");
    add(join({sw, rx}), "Rx90.iSWAP");
    add(join({sw, ry}), "Ry90.iSWAP");
    add(join({cp, sw, rx}), "Rx90.iSWAP.cPHASE");
    add(join({cp, sw, ry}), "Ry90.iSWAP.cPHASE");
    add(join({rx, sw, rx}), "Rx90.iSWAP.Rx90");
    add(join({rx, sw, ry}), "Ry90.iSWAP.Rx90");
    add(join({ry, sw, rx}), "Rx90.iSWAP.Ry90");
    add(join({ry, sw, ry}), "Ry90.iSWAP.Ry90");
    add(join({rx, cp, rx}), "Rx90.cPHASE.Rx90");
    return lib;
}

CMat4 ideal_unitary(GateId g) {
    const double c = std::cos(pi / 4), s = std::sin(pi / 4);
    CMat4 u = CMat4::Zero();
    switch (g) {
        case GateId::rx: {
            CMat r(2, 2);
            r << c, cxd(0, -s), cxd(0, -s), c;
            return kron(r, CMat::Identity(2, 2));
        }
        case GateId::ry: {
            CMat r(2, 2);
            r << c, -s, s, c;
            return kron(r, CMat::Identity(2, 2));
        }
        case GateId::iswap:
            u(0, 0) = u(3, 3) = 1.0;
            u(1, 2) = u(2, 1) = cxd(0, 1);
            return u;
        case GateId::cphase:
            u = CMat4::Identity();
            u(3, 3) = -1.0;
            return u;
    }
    throw validation_error("ideal_unitary: unknown gate id");
}

CMat4 word_unitary(const Word& w) {
    CMat4 u = CMat4::Identity();
    for (GateId g : w) u = (ideal_unitary(g) * u).eval();
    return u;
}

std::array<Ptm, 4> ideal_ptms() {
    std::array<Ptm, 4> p;
    for (int i = 0; i < 4; ++i)
        p[static_cast<size_t>(i)] =
            channel::ptm_from_unitary(ideal_unitary(kGateIds[static_cast<size_t>(i)]));
    return p;
}

GateSequence realize(const Word& w, const cal::CalibratedGateSet& gs) {
    GateSequence seq;
    for (GateId g : w) {
        switch (g) {
            case GateId::rx:
                seq.then(device::Rotation{pi / 2, 0.0});
                break;
            case GateId::ry:
                seq.then(device::Rotation{pi / 2, pi / 2});
                break;
            case GateId::iswap:
                for (const auto& gate : gs.iswap_gate().gates) seq.then(gate);
                break;
            case GateId::cphase:
                for (const auto& gate : gs.cphase_gate().gates) seq.then(gate);
                break;
        }
    }
    return seq;
}

TomographyDataset collect_dataset(const device::DeviceModel& model,
                                  const cal::CalibratedGateSet& gs,
                                  const GateSequence& target,
                                  const std::string& target_name, int shots,
                                  uint64_t seed) {
    if (shots < 0) throw validation_error("collect_dataset: negative shots");
    const SequenceLibrary& lib = library();
    TomographyDataset out;
    out.shots = shots;
    out.seed = seed;
    out.target_name = target_name;
    out.device_snapshot = device::to_json(model);
    for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 15; ++b) {
            GateSequence seq = realize(lib.preparations[static_cast<size_t>(a)], gs);
            for (const auto& g : target.gates) seq.then(g);
            for (const auto& g :
                 realize(lib.tomography[static_cast<size_t>(b)], gs).gates)
                seq.then(g);
            double p = device::run_sequence(model, seq);
            if (shots > 0)
                p = device::sample_excited(
                    p, shots, seed + 1000003ull * static_cast<uint64_t>(15 * a + b));
            out.mu(a, b) = 1.0 - 2.0 * p;
        }
    return out;
}

std::array<TomographyDataset, 4> collect_gate_datasets(
    const device::DeviceModel& model, const cal::CalibratedGateSet& gs,
    int shots, uint64_t seed) {
    std::array<TomographyDataset, 4> out;
    for (int i = 0; i < 4; ++i) {
        const GateId g = kGateIds[static_cast<size_t>(i)];
        out[static_cast<size_t>(i)] =
            collect_dataset(model, gs, realize({g}, gs), gate_name(g), shots,
                            seed + static_cast<uint64_t>(i));
    }
    return out;
}

GateSetEstimate ideal_estimate() {
    GateSetEstimate e;
    e.p = ideal_ptms();
    return e;
}

Ptm word_ptm(const Word& w, const GateSetEstimate& est) {
    Ptm r = Ptm::Identity();
    for (GateId g : w)
        r = (est.p[static_cast<size_t>(static_cast<int>(g))] * r).eval();
    return r;
}

namespace {

struct DesignMatrices {
    Eigen::Matrix<double, 15, 16> u;  ///< row b: measurement pulled through B
    Eigen::Matrix<double, 16, 16> v;  ///< col a: state pushed through A
};

DesignMatrices design(const GateSetEstimate& spam) {
    const SequenceLibrary& lib = library();
    DesignMatrices d;
    const PtmVec t0 = rho0_coords();
    for (int b = 0; b < 15; ++b)
        d.u.row(b) = word_ptm(lib.tomography[static_cast<size_t>(b)], spam)
                         .row(kMeasIndex);
    for (int a = 0; a < 16; ++a)
        d.v.col(a) =
            word_ptm(lib.preparations[static_cast<size_t>(a)], spam) * t0;
    return d;
}

double objective_of(const DesignMatrices& d,
                    const Eigen::Matrix<double, 16, 15>& mu, const Ptm& x) {
    const Eigen::Matrix<double, 15, 16> pred = d.u * x * d.v;
    double s = 0.0;
    for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 15; ++b) {
            const double r = pred(b, a) - mu(a, b);
            s += r * r;
        }
    return s;
}

}  // namespace

Eigen::Matrix<double, 16, 15> predict_mu(const GateSetEstimate& spam,
                                         const Ptm& x) {
    const DesignMatrices d = design(spam);
    const Eigen::Matrix<double, 15, 16> pred = d.u * x * d.v;
    return pred.transpose();
}

QptResult qpt_lstsq(const TomographyDataset& data, const GateSetEstimate& spam,
                    const Ptm& init) {
    const DesignMatrices d = design(spam);
    QptResult res;
    Ptm x = channel::project_cptp(init);
    double f = objective_of(d, data.mu, x);

    // Gradient Lipschitz bound of the quadratic objective fixes the
    // reference step size; backtracking handles the rest.
    const double su = d.u.jacobiSvd().singularValues()(0);
    const double sv = d.v.jacobiSvd().singularValues()(0);
    const double lip = 2.0 * su * su * sv * sv;
    double alpha = 1.0 / lip;

    int it = 0;
    bool converged = false;
    for (; it < 5000; ++it) {
        Eigen::Matrix<double, 15, 16> resm = d.u * x * d.v;
        for (int a = 0; a < 16; ++a)
            for (int b = 0; b < 15; ++b) resm(b, a) -= data.mu(a, b);
        const Ptm grad = 2.0 * d.u.transpose() * resm * d.v.transpose();
        const double gnorm2 = grad.squaredNorm();
        if (gnorm2 < 1e-28) {
            converged = true;
            break;
        }

        double step = alpha;
        Ptm xn;
        double fn = f;
        bool accepted = false;
        bool fixed_point = false;
        for (int trial = 0; trial < 40; ++trial) {
            xn = channel::project_cptp(x - step * grad);
            const double move2 = (xn - x).squaredNorm();
            if (move2 < 1e-30) {
                fixed_point = true;  // projection undoes the whole step
                break;
            }
            fn = objective_of(d, data.mu, xn);
            // Sufficient-decrease test on the realized displacement; the
            // raw gradient norm overstates what a projected step can give.
            if (fn <= f - 1e-4 * move2 / step) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (fixed_point || !accepted) {
            converged = true;
            break;
        }
        const double improvement = f - fn;
        x = xn;
        f = fn;
        alpha = std::min(2.0 * step, 64.0 / lip);
        if (improvement < 1e-10) {
            converged = true;
            ++it;
            break;
        }
    }
    res.x = x;
    res.objective = f;
    res.iterations = it;
    res.converged = converged;
    return res;
}

Ptm hidden_gauge_ptm(double phi) {
    CMat4 r = CMat4::Zero();
    r(0, 0) = r(2, 2) = 1.0;
    r(1, 1) = r(3, 3) = std::polar(1.0, phi);
    return channel::ptm_from_unitary(r);
}

namespace {

double gauge_score(const GateSetEstimate& est, const std::array<Ptm, 4>& ideals,
                   double phi) {
    const Ptm g = hidden_gauge_ptm(phi);
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
        s += channel::process_fidelity(
            ideals[static_cast<size_t>(i)],
            g.transpose() * est.p[static_cast<size_t>(i)] * g);
    return s;
}

}  // namespace

GateSetEstimate gauge_fix(const GateSetEstimate& est) {
    const std::array<Ptm, 4> ideals = ideal_ptms();
    constexpr int kGrid = 64;
    double best_phi = 0.0, best = -1e300;
    for (int k = 0; k < kGrid; ++k) {
        const double phi = -pi + 2.0 * pi * (k + 0.5) / kGrid;
        const double s = gauge_score(est, ideals, phi);
        if (s > best) {
            best = s;
            best_phi = phi;
        }
    }
    double a = best_phi - 2.0 * pi / kGrid;
    double b = best_phi + 2.0 * pi / kGrid;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = gauge_score(est, ideals, c1), f2 = gauge_score(est, ideals, c2);
    while (b - a > 1e-10) {
        if (f1 < f2) {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + gr * (b - a);
            f2 = gauge_score(est, ideals, c2);
        } else {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - gr * (b - a);
            f1 = gauge_score(est, ideals, c1);
        }
    }
    const double phi = 0.5 * (a + b);
    GateSetEstimate out = est;
    const Ptm g = hidden_gauge_ptm(phi);
    for (auto& m : out.p) m = (g.transpose() * m * g).eval();
    out.gauge_phi = wrap_angle(est.gauge_phi + phi);
    return out;
}

GateSetEstimate self_consistent_qpt(const std::array<TomographyDataset, 4>& data,
                                    double lambda, int max_iters) {
    if (!(lambda > 0.0) || lambda > 1.0)
        throw validation_error("self_consistent_qpt: lambda must be in (0, 1]");
    if (max_iters < 1)
        throw validation_error("self_consistent_qpt: max_iters must be >= 1");

    GateSetEstimate cur = ideal_estimate();
    GateSetEstimate prev = cur;
    std::vector<double> history;
    double r_prev = -1.0;

    for (int iter = 0; iter < max_iters; ++iter) {
        std::array<Ptm, 4> q;
        std::exception_ptr fail;
#pragma omp parallel for schedule(dynamic)
        for (int g = 0; g < 4; ++g) {
            try {
                q[static_cast<size_t>(g)] =
                    qpt_lstsq(data[static_cast<size_t>(g)], cur,
                              cur.p[static_cast<size_t>(g)])
                        .x;
            } catch (...) {
#pragma omp critical
                fail = std::current_exception();
            }
        }
        if (fail) std::rethrow_exception(fail);

        double r2 = 0.0;
        for (int g = 0; g < 4; ++g)
            r2 += (cur.p[static_cast<size_t>(g)] - q[static_cast<size_t>(g)])
                      .squaredNorm();
        const double r = std::sqrt(r2);
        history.push_back(r);

        // Already self-consistent at numerical precision; the
        // monotonicity rules below would only be comparing float jitter.
        if (r < 1e-8) {
            cur.residual_history = history;
            return cur;
        }

        if (iter == 1 && r > 2.0 * r_prev && r > 1e-6)
            throw numeric_error(
                "self_consistent_qpt: residual more than doubled on the "
                "first update; the iteration is unstable");
        if (iter >= 1 && r > r_prev) {
            prev.residual_history = history;
            return prev;
        }

        prev = cur;
        for (int g = 0; g < 4; ++g)
            cur.p[static_cast<size_t>(g)] = channel::project_cptp(
                (1.0 - lambda) * cur.p[static_cast<size_t>(g)] +
                lambda * q[static_cast<size_t>(g)]);
        cur = gauge_fix(cur);
        r_prev = r;
    }
    cur.residual_history = history;
    return cur;
}

Ptm truth_ptm(const device::DeviceModel& model,
              const cal::CalibratedGateSet& gs, GateId g) {
    switch (g) {
        case GateId::rx:
            return device::gate_ptm(model, device::Rotation{pi / 2, 0.0});
        case GateId::ry:
            return device::gate_ptm(model, device::Rotation{pi / 2, pi / 2});
        case GateId::iswap: {
            if (!gs.iswap_phases_tuned)
                throw precondition_error("truth_ptm: iswap not calibrated");
            const Ptm fr = channel::ptm_from_unitary(device::computational_block(
                device::frame_unitary(gs.iswap.delta1, gs.iswap.delta2)));
            return channel::compose(
                fr, device::gate_ptm(
                        model, device::Swap{gs.iswap.length, gs.iswap.detuning}));
        }
        case GateId::cphase: {
            if (!gs.cphase_phases_tuned)
                throw precondition_error("truth_ptm: cphase not calibrated");
            const Ptm fr = channel::ptm_from_unitary(device::computational_block(
                device::frame_unitary(gs.cphase.delta1, gs.cphase.delta2)));
            return channel::compose(
                fr, device::gate_ptm(model, device::CPhase{gs.cphase.length,
                                                           gs.cphase.detuning}));
        }
    }
    throw validation_error("truth_ptm: unknown gate id");
}

// ---- Serialization -------------------------------------------------------

namespace {

nlohmann::json ptm_to_json(const Ptm& p) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < 16; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < 16; ++j) row.push_back(p(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Ptm ptm_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 16)
        throw validation_error("ptm_from_json: expected 16 rows");
    Ptm p;
    for (int i = 0; i < 16; ++i) {
        const auto& row = j.at(static_cast<size_t>(i));
        if (!row.is_array() || row.size() != 16)
            throw validation_error("ptm_from_json: expected 16 columns");
        for (int jj = 0; jj < 16; ++jj)
            p(i, jj) = row.at(static_cast<size_t>(jj)).get<double>();
    }
    return p;
}

}  // namespace

nlohmann::json to_json(const TomographyDataset& d) {
    nlohmann::json mu = nlohmann::json::array();
    for (int a = 0; a < 16; ++a) {
        nlohmann::json row = nlohmann::json::array();
        for (int b = 0; b < 15; ++b) row.push_back(d.mu(a, b));
        mu.push_back(std::move(row));
    }
    return nlohmann::json{{"mu", std::move(mu)},
                          {"shots", d.shots},
                          {"seed", d.seed},
                          {"target", d.target_name},
                          {"device", d.device_snapshot}};
}

TomographyDataset dataset_from_json(const nlohmann::json& j) {
    try {
        TomographyDataset d;
        const auto& mu = j.at("mu");
        if (!mu.is_array() || mu.size() != 16)
            throw validation_error("dataset_from_json: expected 16 mu rows");
        for (int a = 0; a < 16; ++a) {
            const auto& row = mu.at(static_cast<size_t>(a));
            if (!row.is_array() || row.size() != 15)
                throw validation_error(
                    "dataset_from_json: expected 15 mu columns");
            for (int b = 0; b < 15; ++b)
                d.mu(a, b) = row.at(static_cast<size_t>(b)).get<double>();
        }
        d.shots = j.value("shots", 0);
        d.seed = j.value("seed", uint64_t{0});
        d.target_name = j.value("target", std::string{});
        if (j.contains("device")) d.device_snapshot = j.at("device");
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("dataset_from_json: ") + e.what());
    }
}

nlohmann::json to_json(const GateSetEstimate& e) {
    nlohmann::json gates;
    for (int i = 0; i < 4; ++i)
        gates[gate_name(kGateIds[static_cast<size_t>(i)])] =
            ptm_to_json(e.p[static_cast<size_t>(i)]);
    return nlohmann::json{{"gates", std::move(gates)},
                          {"gauge_phi", e.gauge_phi},
                          {"residual_history", e.residual_history}};
}

GateSetEstimate estimate_from_json(const nlohmann::json& j) {
    try {
        GateSetEstimate e;
        for (int i = 0; i < 4; ++i)
            e.p[static_cast<size_t>(i)] = ptm_from_json(
                j.at("gates").at(gate_name(kGateIds[static_cast<size_t>(i)])));
        e.gauge_phi = j.value("gauge_phi", 0.0);
        if (j.contains("residual_history"))
            e.residual_history =
                j.at("residual_history").get<std::vector<double>>();
        return e;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("estimate_from_json: ") + e.what());
    }
}

void write_ptm_csv(std::ostream& os, const Ptm& p) {
    os << "pauli";
    for (int j = 0; j < 16; ++j) os << ',' << pauli_label(j);
    os << '\n' << std::setprecision(17);
    for (int i = 0; i < 16; ++i) {
        os << pauli_label(i);
        for (int j = 0; j < 16; ++j) os << ',' << p(i, j);
        os << '\n';
    }
}

Ptm ptm_from_csv(std::istream& is) {
    auto fields = [](const std::string& line) {
        std::vector<std::string> out;
        size_t start = 0;
        while (true) {
            size_t comma = line.find(',', start);
            out.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return out;
    };
    std::string line;
    if (!std::getline(is, line))
        throw validation_error("ptm_from_csv: missing header");
    auto head = fields(line);
    if (head.size() != 17 || head[0] != "pauli")
        throw validation_error("ptm_from_csv: bad header");
    for (int j = 0; j < 16; ++j)
        if (head[j + 1] != pauli_label(j))
            throw validation_error("ptm_from_csv: bad header label " + head[j + 1]);
    Ptm p;
    for (int i = 0; i < 16; ++i) {
        if (!std::getline(is, line))
            throw validation_error("ptm_from_csv: truncated input");
        auto f = fields(line);
        if (f.size() != 17 || f[0] != pauli_label(i))
            throw validation_error("ptm_from_csv: bad row " + std::to_string(i));
        for (int j = 0; j < 16; ++j) {
            size_t used = 0;
            double v = 0.0;
            bool ok = true;
            try {
                v = std::stod(f[j + 1], &used);
            } catch (const std::exception&) {
                ok = false;
            }
            if (!ok || used != f[j + 1].size())
                throw validation_error("ptm_from_csv: bad number " + f[j + 1]);
            p(i, j) = v;
        }
    }
    return p;
}

}  // namespace hqt::tomo

/** \file
 * Subcommand implementations and the argv driver.
 *
 * Every command builds its whole document in memory (deterministic key
 * order, shortest round-trip floats) so repeated runs with the same config
 * are byte-identical.
 */
#include "hqt/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "hqt/calibration.hpp"
#include "hqt/channel.hpp"
#include "hqt/device.hpp"
#include "hqt/grid.hpp"
#include "hqt/lie.hpp"
#include "hqt/pauli.hpp"
#include "hqt/qvolume.hpp"
#include "hqt/reach.hpp"
#include "hqt/routing.hpp"
#include "hqt/tomography.hpp"
#include "hqt/types.hpp"

namespace hqt::cli {
namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw numeric_error("fmt: to_chars failed");
    return std::string(buf, end);
}

void check_field(const std::string& f) {
    if (f.find(',') != std::string::npos || f.find('\n') != std::string::npos)
        throw precondition_error("csv field contains a separator: " + f);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start < text.size()) {
        size_t nl = text.find('\n', start);
        if (nl == std::string::npos)
            throw validation_error("csv: missing trailing newline");
        out.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

json claims_json(const std::vector<Claim>& claims) {
    json arr = json::array();
    bool all = true;
    for (const auto& c : claims) {
        arr.push_back(
            {{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        all = all && c.passed;
    }
    return json{{"all_passed", all}, {"claims", arr}};
}

/// Renders a battery result in the requested format; exit 1 on any failure.
CmdResult claims_result(const RunConfig& cfg, std::vector<Claim> claims) {
    CmdResult r;
    r.output = cfg.format == "csv" ? claims_csv(claims)
                                   : claims_json(claims).dump(2) + "\n";
    for (const auto& c : claims)
        if (!c.passed) {
            r.exit_code = 1;
            r.error = "claim failed: " + c.name;
            break;
        }
    r.claims = std::move(claims);
    return r;
}

CmdResult table_result(const RunConfig& cfg, const json& doc,
                       const std::vector<std::pair<std::string, std::string>>& kv) {
    CmdResult r;
    r.output = cfg.format == "csv" ? kv_csv(kv) : doc.dump(2) + "\n";
    return r;
}

device::DeviceModel model_from_params(const json& params) {
    if (params.contains("model"))
        return device::model_from_json(params.at("model"));
    if (params.value("noiseless", false)) return device::noiseless_model();
    return device::default_model();
}

cal::CalOptions cal_options_from_params(const json& params) {
    cal::CalOptions opt;
    opt.scan_points = params.value("scan_points", opt.scan_points);
    opt.theta_points = params.value("theta_points", opt.theta_points);
    opt.max_rounds = params.value("max_rounds", opt.max_rounds);
    return opt;
}

int pauli_index_from_label(const std::string& label) {
    for (int i = 0; i < 16; ++i)
        if (pauli_label(i) == label) return i;
    throw validation_error("unknown Pauli label: " + label);
}

/// Four ground-truth transfer matrices of the calibrated gates, gauge-fixed.
tomo::GateSetEstimate truth_estimate(const device::DeviceModel& model,
                                     const cal::CalibratedGateSet& gs) {
    tomo::GateSetEstimate truth;
    for (auto g : tomo::kGateIds)
        truth.p[static_cast<int>(g)] = tomo::truth_ptm(model, gs, g);
    return tomo::gauge_fix(truth);
}

}  // namespace

std::string claims_csv(const std::vector<Claim>& claims) {
    std::string out = "name,passed,detail\n";
    for (const auto& c : claims) {
        check_field(c.name);
        check_field(c.detail);
        out += c.name + (c.passed ? ",1," : ",0,") + c.detail + "\n";
    }
    return out;
}

std::vector<Claim> claims_from_csv(const std::string& text) {
    auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "name,passed,detail")
        throw validation_error("claims csv: bad header");
    std::vector<Claim> out;
    for (size_t i = 1; i < lines.size(); ++i) {
        auto f = split_line(lines[i]);
        if (f.size() != 3 || (f[1] != "0" && f[1] != "1"))
            throw validation_error("claims csv: bad row " + std::to_string(i));
        out.push_back({f[0], f[1] == "1", f[2]});
    }
    return out;
}

std::string kv_csv(const std::vector<std::pair<std::string, std::string>>& rows) {
    std::string out = "quantity,value\n";
    for (const auto& [k, v] : rows) {
        check_field(k);
        check_field(v);
        out += k + "," + v + "\n";
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> kv_from_csv(
    const std::string& text) {
    auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "quantity,value")
        throw validation_error("kv csv: bad header");
    std::vector<std::pair<std::string, std::string>> out;
    for (size_t i = 1; i < lines.size(); ++i) {
        auto f = split_line(lines[i]);
        if (f.size() != 2)
            throw validation_error("kv csv: bad row " + std::to_string(i));
        out.emplace_back(f[0], f[1]);
    }
    return out;
}

std::vector<Claim> controllability_battery() {
    using namespace control;
    auto with = [](std::vector<HermitianGenerator> gens,
                   std::initializer_list<HermitianGenerator> extra) {
        for (const auto& g : extra) gens.push_back(g);
        return gens;
    };
    const auto control_only = single_qubit_generators(false);
    const auto both = single_qubit_generators(true);

    struct Case {
        std::string name;
        std::vector<HermitianGenerator> gens;
        bool universal;
    };
    const std::vector<Case> cases{
        {"both-rotations-cphase-universal", with(both, {coupling_zz()}), true},
        {"both-rotations-iswap-universal", with(both, {coupling_xxyy()}), true},
        {"both-rotations-swap-universal", with(both, {coupling_xxyyzz()}), true},
        {"hidden-arch-cphase-not-universal", with(control_only, {coupling_zz()}),
         false},
        {"hidden-arch-iswap-not-universal",
         with(control_only, {coupling_xxyy()}), false},
        {"hidden-arch-cphase-iswap-universal",
         with(control_only, {coupling_zz(), coupling_xxyy()}), true},
        {"hidden-arch-swap-universal", with(control_only, {coupling_xxyyzz()}),
         true},
    };
    std::vector<Claim> out;
    for (const auto& c : cases) {
        auto closure = lie_closure(c.gens);
        bool universal = closure.dimension == 15;
        out.push_back({c.name, universal == c.universal,
                       "closure dimension " + std::to_string(closure.dimension) +
                           "/15; expected " +
                           (c.universal ? "universal" : "restricted")});
    }
    return out;
}

std::vector<Claim> reachability_battery() {
    using namespace control;
    const std::vector<int> native_full{0, 3, 12, 15};  // 11 1Z Z1 ZZ
    const std::vector<int> native_hidden{0, 12};       // 11 Z1
    auto gates = [](std::initializer_list<const char*> names) {
        std::vector<NamedGate> v;
        for (const char* n : names) v.push_back(gate_by_name(n));
        return v;
    };
    struct Case {
        std::string name;
        std::vector<NamedGate> g;
        const std::vector<int>& native;
        bool full_span;
    };
    const std::vector<Case> cases{
        {"both-qubit-rotations-span-16",
         gates({"rx90", "ry90", "rx90_h", "ry90_h"}), native_full, true},
        {"hidden-iswap-cphase-span-16",
         gates({"rx90", "ry90", "iswap", "cphase"}), native_hidden, true},
        {"hidden-cphase-only-below-16", gates({"rx90", "ry90", "cphase"}),
         native_hidden, false},
        {"hidden-iswap-only-below-16", gates({"rx90", "ry90", "iswap"}),
         native_hidden, false},
        {"hidden-swap-only-below-16", gates({"rx90", "ry90", "swap"}),
         native_hidden, false},
        {"hidden-sqrt-swap-span-16", gates({"rx90", "ry90", "sqrt_swap"}),
         native_hidden, true},
        {"hidden-cphase-swap-span-16", gates({"rx90", "ry90", "cphase", "swap"}),
         native_hidden, true},
        {"hidden-iswap-swap-span-16", gates({"rx90", "ry90", "iswap", "swap"}),
         native_hidden, true},
    };
    std::vector<Claim> out;
    for (const auto& c : cases) {
        auto rep = measurement_reachability(c.g, c.native);
        bool ok = c.full_span ? rep.span_dimension == 16 : rep.span_dimension < 16;
        out.push_back({c.name, ok,
                       "span dimension " + std::to_string(rep.span_dimension) +
                           "/16; expected " +
                           (c.full_span ? "complete" : "incomplete")});
    }
    out.push_back({"sqrt-swap-completeness-battery",
                   verify_sqrt_swap_completeness(),
                   "pairwise exchange-gate battery"});
    return out;
}

CmdResult cmd_controllability(const RunConfig& cfg) {
    if (cfg.params.contains("couplings")) {
        // Report-only mode on a user-supplied generator set.
        using namespace control;
        std::vector<HermitianGenerator> gens =
            single_qubit_generators(cfg.params.value("hidden_rotations", false));
        for (const auto& item : cfg.params.at("couplings")) {
            const std::string name = item.get<std::string>();
            if (name == "zz")
                gens.push_back(coupling_zz());
            else if (name == "xxyy")
                gens.push_back(coupling_xxyy());
            else if (name == "xxyyzz")
                gens.push_back(coupling_xxyyzz());
            else
                throw validation_error("unknown coupling: " + name);
        }
        auto closure = lie_closure(gens);
        json basis = json::array();
        for (const auto& b : closure.basis) basis.push_back(b.label);
        json doc{{"dimension", closure.dimension},
                 {"universal", closure.dimension == 15},
                 {"basis", basis}};
        return table_result(
            cfg, doc,
            {{"dimension", std::to_string(closure.dimension)},
             {"universal", closure.dimension == 15 ? "1" : "0"}});
    }
    return claims_result(cfg, controllability_battery());
}

CmdResult cmd_reachability(const RunConfig& cfg) {
    if (cfg.params.contains("gates")) {
        // Report-only mode on a user-supplied gate set.
        using namespace control;
        std::vector<NamedGate> gates;
        for (const auto& item : cfg.params.at("gates"))
            gates.push_back(gate_by_name(item.get<std::string>()));
        std::vector<int> native{0, 12};
        if (cfg.params.contains("native")) {
            native.clear();
            for (const auto& item : cfg.params.at("native"))
                native.push_back(pauli_index_from_label(item.get<std::string>()));
        }
        ReachabilityOptions opt;
        opt.max_depth = cfg.params.value("max_depth", opt.max_depth);
        auto rep = measurement_reachability(gates, native, opt);

        json witnesses = json::object();
        for (const auto& [label, w] : rep.witness_sequences)
            witnesses[label] = {{"sign", w.sign}, {"word", w.word}};
        json doc{{"span_dimension", rep.span_dimension},
                 {"complete", rep.span_dimension == 16},
                 {"reachable", rep.reachable},
                 {"unreachable", rep.unreachable},
                 {"clifford_path", rep.clifford_path},
                 {"witnesses", witnesses}};

        auto join = [](const std::set<std::string>& s) {
            std::string out;
            for (const auto& x : s) out += (out.empty() ? "" : "|") + x;
            return out;
        };
        return table_result(
            cfg, doc,
            {{"span_dimension", std::to_string(rep.span_dimension)},
             {"complete", rep.span_dimension == 16 ? "1" : "0"},
             {"reachable", join(rep.reachable)},
             {"unreachable", join(rep.unreachable)},
             {"clifford_path", rep.clifford_path ? "1" : "0"}});
    }
    return claims_result(cfg, reachability_battery());
}

CmdResult cmd_tuneup(const RunConfig& cfg) {
    const auto model = model_from_params(cfg.params);
    const auto opt = cal_options_from_params(cfg.params);
    const auto gs = cal::full_tuneup(model, opt);

    const double sigma_true =
        wrap_angle(model.true_iswap.gamma1 + model.true_iswap.gamma2);
    const double beta_true = model.beta();
    const double delta1_true = wrap_angle(sigma_true - pi + beta_true);
    const auto truth = truth_estimate(model, gs);
    const auto ideal = tomo::ideal_ptms();

    struct Phase {
        const char* name;
        double estimate;
        double truth;
    };
    const std::vector<Phase> phases{
        {"sigma", gs.sigma, sigma_true},
        {"beta", gs.beta, beta_true},
        {"delta1", gs.iswap.delta1, delta1_true},
        {"gamma01", gs.cphase.delta1, model.true_cphase.gamma01},
        {"gamma10", gs.cphase.delta2, model.true_cphase.gamma10},
    };

    json jphases = json::object();
    std::vector<std::pair<std::string, std::string>> kv;
    for (const auto& p : phases) {
        const double err = wrap_angle(p.estimate - p.truth);
        jphases[p.name] = {
            {"estimate", p.estimate}, {"truth", p.truth}, {"error", err}};
        kv.emplace_back(std::string(p.name) + "_estimate", fmt(p.estimate));
        kv.emplace_back(std::string(p.name) + "_truth", fmt(p.truth));
        kv.emplace_back(std::string(p.name) + "_error", fmt(err));
    }

    json jfid = json::object();
    for (auto g : tomo::kGateIds) {
        const int i = static_cast<int>(g);
        const double f = channel::average_fidelity(ideal[i], truth.p[i]);
        jfid[tomo::gate_name(g)] = f;
        kv.emplace_back(std::string("f_avg_") + tomo::gate_name(g), fmt(f));
    }

    json doc{{"device", device::to_json(model)},
             {"settings", cal::to_json(gs)},
             {"phases", jphases},
             {"gauge_fidelities", jfid}};
    return table_result(cfg, doc, kv);
}

CmdResult cmd_qpt(const RunConfig& cfg) {
    const auto model = model_from_params(cfg.params);
    const auto opt = cal_options_from_params(cfg.params);
    const int shots = cfg.params.value("shots", 0);
    const double lambda = cfg.params.value("lambda", 0.1);
    const int max_iters = cfg.params.value("max_iters", 100);

    const auto gs = cal::full_tuneup(model, opt);
    const auto data = tomo::collect_gate_datasets(model, gs, shots, cfg.seed);

    // First round: every surrounding word is assumed ideal.
    const auto ideal_est = tomo::ideal_estimate();
    const auto ideal = tomo::ideal_ptms();
    tomo::GateSetEstimate first = ideal_est;
    for (int g = 0; g < 4; ++g)
        first.p[g] = tomo::qpt_lstsq(data[g], ideal_est, ideal[g]).x;
    first = tomo::gauge_fix(first);

    const auto self = tomo::self_consistent_qpt(data, lambda, max_iters);
    const auto truth = truth_estimate(model, gs);

    json jgates = json::array();
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("shots", std::to_string(shots));
    kv.emplace_back("seed", std::to_string(cfg.seed));
    CmdResult r;
    for (auto g : tomo::kGateIds) {
        const int i = static_cast<int>(g);
        const std::string name = tomo::gate_name(g);
        const double f_before = channel::average_fidelity(ideal[i], first.p[i]);
        const double f_after = channel::average_fidelity(ideal[i], self.p[i]);
        const double f_truth = channel::average_fidelity(ideal[i], truth.p[i]);
        jgates.push_back({{"gate", name},
                          {"f_before", f_before},
                          {"f_after", f_after},
                          {"f_truth", f_truth}});
        kv.emplace_back("f_before_" + name, fmt(f_before));
        kv.emplace_back("f_after_" + name, fmt(f_after));
        kv.emplace_back("f_truth_" + name, fmt(f_truth));

        std::ostringstream before, after;
        tomo::write_ptm_csv(before, first.p[i]);
        tomo::write_ptm_csv(after, self.p[i]);
        r.attachments.emplace_back(name + "_before.csv", before.str());
        r.attachments.emplace_back(name + "_after.csv", after.str());
    }
    kv.emplace_back("iterations", std::to_string(self.residual_history.size()));

    json doc{{"device", device::to_json(model)},
             {"shots", shots},
             {"seed", cfg.seed},
             {"gates", jgates},
             {"residual_history", self.residual_history},
             {"first_estimate", tomo::to_json(first)},
             {"estimate", tomo::to_json(self)}};
    CmdResult table = table_result(cfg, doc, kv);
    r.output = std::move(table.output);
    if (cfg.format != "csv") r.attachments.clear();  // matrices live in JSON
    return r;
}

CmdResult cmd_qv_map(const RunConfig& cfg) {
    const int samples = cfg.params.value("samples", 200);
    const double epsilon = cfg.params.value("epsilon", 1.0);

    std::vector<std::pair<int, int>> grids = qv::default_grid_set();
    if (cfg.params.contains("grids")) {
        grids.clear();
        for (const auto& g : cfg.params.at("grids"))
            grids.emplace_back(g.at(0).get<int>(), g.at(1).get<int>());
    }

    std::vector<qv::QvConfig> presets;
    if (cfg.params.contains("gamma_tau") || cfg.params.contains("differential")) {
        if (cfg.params.contains("gamma_tau"))
            for (const auto& rate : cfg.params.at("gamma_tau")) {
                qv::QvConfig c;
                c.gamma_tau = rate.get<double>();
                presets.push_back(c);
            }
        if (cfg.params.contains("differential")) {
            const auto& d = cfg.params.at("differential");
            qv::QvConfig c;
            c.gamma_c_tau = d.at("gamma_c_tau").get<double>();
            c.gamma_tau = d.value("gamma_tau", 0.0);
            presets.push_back(c);
        }
    } else {
        presets = qv::default_presets(samples, cfg.seed);
    }
    for (auto& c : presets) {
        c.samples = samples;
        c.seed = cfg.seed;
        c.epsilon = epsilon;
    }

    const auto rows = qv::qv_map(grids, presets);
    CmdResult r;
    r.output = cfg.format == "csv" ? qv::qv_csv(rows)
                                   : qv::to_json(rows).dump(2) + "\n";
    return r;
}

CmdResult cmd_route_demo(const RunConfig& cfg) {
    const int k = cfg.params.value("k", 3);
    const int h = cfg.params.value("h", 2);
    const qv::GridTopology topo(k, h);

    qv::Pairing pairing;
    if (cfg.params.contains("pairing")) {
        for (const auto& p : cfg.params.at("pairing"))
            pairing.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    } else {
        SplitMix64 rng(cfg.seed);
        pairing = qv::sample_pairing(topo, rng);
    }

    const auto groups = qv::group_pairs(pairing, topo);
    const auto plan = qv::layer_cost(pairing, topo);
    qv::validate_plan(plan, pairing, topo);

    json jpairs = json::array();
    for (const auto& [u, v] : pairing) jpairs.push_back({u, v});
    json jgroups = json::array();
    for (const auto& g : groups) jgroups.push_back(g);
    json doc{{"k", k},
             {"h", h},
             {"seed", cfg.seed},
             {"pairing", jpairs},
             {"groups", jgroups},
             {"validated", true},
             {"plan", qv::to_json(plan)}};
    return table_result(
        cfg, doc,
        {{"k", std::to_string(k)},
         {"h", std::to_string(h)},
         {"seed", std::to_string(cfg.seed)},
         {"pairs", std::to_string(pairing.size())},
         {"groups", std::to_string(groups.size())},
         {"n_g", std::to_string(plan.n_g)},
         {"n_s", std::to_string(plan.n_s)},
         {"layers", std::to_string(plan.layers.size())},
         {"validated", "1"}});
}

CmdResult run_command(const std::string& name, const RunConfig& cfg) {
    try {
        if (name == "controllability") return cmd_controllability(cfg);
        if (name == "reachability") return cmd_reachability(cfg);
        if (name == "tuneup") return cmd_tuneup(cfg);
        if (name == "qpt") return cmd_qpt(cfg);
        if (name == "qv-map") return cmd_qv_map(cfg);
        if (name == "route-demo") return cmd_route_demo(cfg);
        throw validation_error("unknown subcommand: " + name);
    } catch (const json::exception& e) {
        CmdResult r;
        r.exit_code = 2;
        r.error = std::string("config error: ") + e.what();
        return r;
    } catch (const std::logic_error& e) {  // validation / precondition
        CmdResult r;
        r.exit_code = 2;
        r.error = e.what();
        return r;
    } catch (const std::exception& e) {  // numeric failure in a pipeline
        CmdResult r;
        r.exit_code = 1;
        r.error = e.what();
        return r;
    }
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"hidden-qubit architecture toolkit"};
    app.require_subcommand(1);

    RunConfig rc;
    std::string config_path;
    struct Verb {
        const char* name;
        const char* help;
    };
    const std::vector<Verb> verbs{
        {"controllability", "Lie-closure universality claims or a custom report"},
        {"reachability", "measurement-reachability claims or a custom report"},
        {"tuneup", "five-stage pulse calibration on a simulated device"},
        {"qpt", "tuneup plus first-round and self-consistent tomography"},
        {"qv-map", "quantum-volume table over grid shapes and error rates"},
        {"route-demo", "sample a pairing and emit its validated routing plan"},
    };
    for (const auto& v : verbs) {
        auto* sub = app.add_subcommand(v.name, v.help);
        sub->add_option("--config", config_path, "JSON parameter file");
        sub->add_option("--seed", rc.seed, "seed for stochastic runs");
        sub->add_option("--out", rc.out_path, "output path (default: stdout)");
        sub->add_option("--format", rc.format, "output format")
            ->check(CLI::IsMember({"json", "csv"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config file " << config_path
                      << "\n";
            return 2;
        }
        try {
            rc.params = json::parse(in);
        } catch (const json::exception& e) {
            std::cerr << "error: bad config file: " << e.what() << "\n";
            return 2;
        }
    }

    const std::string verb = app.get_subcommands().front()->get_name();
    const CmdResult res = run_command(verb, rc);

    for (const auto& c : res.claims)
        std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": "
                  << c.detail << "\n";
    if (!res.error.empty()) std::cerr << "error: " << res.error << "\n";

    if (!res.output.empty()) {
        if (rc.out_path.empty()) {
            std::cout << res.output;
        } else {
            std::ofstream out(rc.out_path, std::ios::binary);
            if (!out) {
                std::cerr << "error: cannot write " << rc.out_path << "\n";
                return 2;
            }
            out << res.output;
        }
    }
    for (const auto& [suffix, content] : res.attachments) {
        if (rc.out_path.empty()) continue;  // attachments need a base path
        std::ofstream out(rc.out_path + "." + suffix, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write attachment " << suffix << "\n";
            return 2;
        }
        out << content;
    }
    return res.exit_code;
}

}  // namespace hqt::cli

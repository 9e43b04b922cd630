/** \file
 * Monte-Carlo quantum-volume estimation over random pairings.
 */
#include "hqt/qvolume.hpp"

#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include "hqt/rng.hpp"
#include "hqt/routing.hpp"

namespace hqt::qv {
namespace {

/// Shortest representation that round-trips through from_chars.
std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw validation_error("qv csv: bad number '" + std::string(s) + "'");
    return x;
}

int parse_int(std::string_view s) {
    int x = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw validation_error("qv csv: bad integer '" + std::string(s) + "'");
    return x;
}

constexpr const char* kCsvHeader =
    "k,h,control_lines,N,gamma_tau,n_s_mean,n_g_mean,log2_vq";

QvEstimate finish_estimate(const GridTopology& topo, const QvConfig& cfg,
                           long long sum_s, long long sum_g) {
    QvEstimate est;
    est.n_s_mean = static_cast<double>(sum_s) / cfg.samples;
    est.n_g_mean = static_cast<double>(sum_g) / cfg.samples;

    const int n_sites = topo.sites();
    const double n = topo.qubits();
    // Error accumulated per layer across the whole processor.
    const double rate =
        cfg.gamma_c_tau ? n_sites * (*cfg.gamma_c_tau) +
                              static_cast<double>(topo.h) * n_sites * cfg.gamma_tau
                        : n * cfg.gamma_tau;
    const double denom = rate * est.n_s_mean;
    est.d = denom > 0.0 ? cfg.epsilon / denom
                        : std::numeric_limits<double>::infinity();
    est.log2_vq = std::min(est.d, n);
    return est;
}

template <bool Parallel>
QvEstimate run_samples(const GridTopology& topo, const QvConfig& cfg) {
    cfg.validate();
    long long sum_s = 0, sum_g = 0;
    std::exception_ptr failure;

#pragma omp parallel for reduction(+ : sum_s, sum_g) schedule(dynamic) if (Parallel)
    for (int i = 0; i < cfg.samples; ++i) {
        try {
            SplitMix64 rng(stream_seed(cfg.seed, static_cast<uint64_t>(i)));
            const Pairing pairing = sample_pairing(topo, rng);
            const RoutingPlan plan = layer_cost(pairing, topo);
            sum_s += plan.n_s;
            sum_g += plan.n_g;
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return finish_estimate(topo, cfg, sum_s, sum_g);
}

}  // namespace

void QvConfig::validate() const {
    if (!(gamma_tau >= 0.0))
        throw validation_error("QvConfig: gamma_tau must be >= 0");
    if (gamma_c_tau && !(*gamma_c_tau >= 0.0))
        throw validation_error("QvConfig: gamma_c_tau must be >= 0");
    if (!(epsilon > 0.0)) throw validation_error("QvConfig: epsilon must be > 0");
    if (samples < 1) throw validation_error("QvConfig: samples must be >= 1");
}

QvEstimate quantum_volume(const GridTopology& topo, const QvConfig& cfg) {
    return run_samples<true>(topo, cfg);
}

QvEstimate quantum_volume_serial(const GridTopology& topo, const QvConfig& cfg) {
    return run_samples<false>(topo, cfg);
}

std::vector<QvRow> qv_map(const std::vector<std::pair<int, int>>& grids,
                          const std::vector<QvConfig>& cfgs) {
    std::vector<QvRow> rows;
    rows.reserve(grids.size() * cfgs.size());
    for (const QvConfig& cfg : cfgs) {
        for (const auto& [k, h] : grids) {
            const GridTopology topo(k, h);
            const QvEstimate est = quantum_volume(topo, cfg);
            const TopologyMetrics metrics = topology_metrics(topo);
            QvRow row;
            row.k = k;
            row.h = h;
            row.control_lines = metrics.control_lines;
            row.N = topo.qubits();
            row.gamma_tau = cfg.gamma_c_tau ? *cfg.gamma_c_tau : cfg.gamma_tau;
            row.n_s_mean = est.n_s_mean;
            row.n_g_mean = est.n_g_mean;
            row.log2_vq = est.log2_vq;
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<std::pair<int, int>> default_grid_set() {
    std::vector<std::pair<int, int>> grids;
    for (int k = 2; k <= 6; ++k)
        for (int h : {0, 1, 2, 4, 8}) grids.emplace_back(k, h);
    return grids;
}

std::vector<QvConfig> default_presets(int samples, uint64_t seed) {
    std::vector<QvConfig> cfgs;
    for (double rate : {0.004, 4e-4, 4e-6}) {
        QvConfig c;
        c.gamma_tau = rate;
        c.samples = samples;
        c.seed = seed;
        cfgs.push_back(c);
    }
    QvConfig diff;  // only control qubits decohere appreciably
    diff.gamma_tau = 0.0;
    diff.gamma_c_tau = 4e-6;
    diff.samples = samples;
    diff.seed = seed;
    cfgs.push_back(diff);
    return cfgs;
}

std::string qv_csv(const std::vector<QvRow>& rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const QvRow& r : rows) {
        out += std::to_string(r.k);
        out += ',';
        out += std::to_string(r.h);
        out += ',';
        out += std::to_string(r.control_lines);
        out += ',';
        out += std::to_string(r.N);
        out += ',';
        out += format_double(r.gamma_tau);
        out += ',';
        out += format_double(r.n_s_mean);
        out += ',';
        out += format_double(r.n_g_mean);
        out += ',';
        out += format_double(r.log2_vq);
        out += '\n';
    }
    return out;
}

std::vector<QvRow> qv_rows_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw validation_error("qv csv: missing or wrong header row");
    std::vector<QvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        size_t start = 0;
        const std::string_view sv(line);
        while (true) {
            const size_t comma = sv.find(',', start);
            fields.push_back(sv.substr(
                start, comma == std::string_view::npos ? comma : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 8)
            throw validation_error("qv csv: expected 8 fields per row");
        QvRow r;
        r.k = parse_int(fields[0]);
        r.h = parse_int(fields[1]);
        r.control_lines = parse_int(fields[2]);
        r.N = parse_int(fields[3]);
        r.gamma_tau = parse_double(fields[4]);
        r.n_s_mean = parse_double(fields[5]);
        r.n_g_mean = parse_double(fields[6]);
        r.log2_vq = parse_double(fields[7]);
        rows.push_back(r);
    }
    return rows;
}

nlohmann::json to_json(const std::vector<QvRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const QvRow& r : rows)
        arr.push_back({{"k", r.k},
                       {"h", r.h},
                       {"control_lines", r.control_lines},
                       {"N", r.N},
                       {"gamma_tau", r.gamma_tau},
                       {"n_s_mean", r.n_s_mean},
                       {"n_g_mean", r.n_g_mean},
                       {"log2_vq", r.log2_vq}});
    return arr;
}

std::vector<QvRow> qv_rows_from_json(const nlohmann::json& j) {
    try {
        std::vector<QvRow> rows;
        for (const auto& e : j) {
            QvRow r;
            r.k = e.at("k").get<int>();
            r.h = e.at("h").get<int>();
            r.control_lines = e.at("control_lines").get<int>();
            r.N = e.at("N").get<int>();
            r.gamma_tau = e.at("gamma_tau").get<double>();
            r.n_s_mean = e.at("n_s_mean").get<double>();
            r.n_g_mean = e.at("n_g_mean").get<double>();
            r.log2_vq = e.at("log2_vq").get<double>();
            rows.push_back(r);
        }
        return rows;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("qv rows: bad json: ") + e.what());
    }
}

}  // namespace hqt::qv

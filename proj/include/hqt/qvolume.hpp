#pragma once
/** \file
 * Quantum-volume estimation for hidden-qubit grids.
 *
 * The figure of merit is the error-budget proxy
 *     log2 V_Q = min(eps / (N * n_s_mean * rate), N),
 * where n_s_mean is the Monte-Carlo mean number of parallel gate layers
 * needed to entangle a uniformly random pairing of the N qubits (see
 * routing.hpp) and `rate` is the per-qubit error probability per layer.
 * In differential mode the denominator uses per-species rates,
 * (N_c * gamma_c + N_h * gamma) * tau, instead of N * gamma * tau.
 *
 * Monte-Carlo sampling is OpenMP-parallel with one SplitMix64 stream per
 * sample, so results are independent of the thread count; a serial
 * reference implementation is kept for testing and benchmarking.
 */
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hqt/grid.hpp"
#include "hqt/types.hpp"

namespace hqt::qv {

/// Monte-Carlo configuration for quantum_volume().
struct QvConfig {
    /// Error probability per qubit per two-qubit gate duration.  In
    /// differential mode this is the hidden-qubit rate.
    double gamma_tau = 0.0;
    /// Control-qubit rate; setting it switches on differential mode.
    std::optional<double> gamma_c_tau;
    double epsilon = 1.0;  ///< total error budget
    int samples = 200;     ///< random pairings to average over
    uint64_t seed = 0;

    /// Throws validation_error on nonsensical settings (negative rates,
    /// epsilon <= 0, samples < 1).
    void validate() const;
};

struct QvEstimate {
    double log2_vq = 0.0;   ///< min(d, N)
    double d = 0.0;         ///< unclamped depth budget (may be infinite)
    double n_s_mean = 0.0;  ///< mean layers per pairing
    double n_g_mean = 0.0;  ///< mean gates per pairing
};

/// Averages layer_cost over cfg.samples uniformly random pairings and
/// applies the error-budget formula.  OpenMP-parallel; deterministic.
QvEstimate quantum_volume(const GridTopology& topo, const QvConfig& cfg);

/// Single-threaded reference; bit-identical results to quantum_volume().
QvEstimate quantum_volume_serial(const GridTopology& topo, const QvConfig& cfg);

/// One output row of qv_map; matches the CSV column order.  Differential
/// rows report the control-qubit rate in gamma_tau.
struct QvRow {
    int k = 0;
    int h = 0;
    int control_lines = 0;
    int N = 0;
    double gamma_tau = 0.0;
    double n_s_mean = 0.0;
    double n_g_mean = 0.0;
    double log2_vq = 0.0;
};

/// Cartesian product of grids and configs, one row per (grid, config).
std::vector<QvRow> qv_map(const std::vector<std::pair<int, int>>& grids,
                          const std::vector<QvConfig>& cfgs);

/// The sampled (k, h) set used by the command-line tool:
/// k in {2..6} x h in {0, 1, 2, 4, 8}.
std::vector<std::pair<int, int>> default_grid_set();

/// Uniform rates {0.004, 4e-4, 4e-6} plus one differential config
/// (control 4e-6, hidden 0), all sharing `samples` and `seed`.
std::vector<QvConfig> default_presets(int samples, uint64_t seed);

/// CSV with the exact header
/// k,h,control_lines,N,gamma_tau,n_s_mean,n_g_mean,log2_vq
/// and shortest round-trip number formatting (locale independent).
std::string qv_csv(const std::vector<QvRow>& rows);

/// Inverse of qv_csv; throws validation_error on malformed input.
std::vector<QvRow> qv_rows_from_csv(const std::string& text);

nlohmann::json to_json(const std::vector<QvRow>& rows);
std::vector<QvRow> qv_rows_from_json(const nlohmann::json& j);

}  // namespace hqt::qv

/** \file
 * Square grid of control qubits with star-coupled hidden qubits.
 *
 * A k x k lattice of control qubits, each carrying h hidden qubits reachable
 * only through it.  One control qubit plus its hidden qubits form a "grid
 * group".  Qubit index q = site*(h+1) + j with j = 0 the control qubit;
 * site = row*k + col.
 */
#pragma once

#include <cstdlib>
#include <vector>

#include "hqt/types.hpp"

namespace hqt::qv {

struct GridTopology {
    int k = 1;  ///< grid side, control qubits per row/column
    int h = 0;  ///< hidden qubits per control qubit

    GridTopology(int k_side, int hidden_per_site);

    int sites() const { return k * k; }
    int qubits() const { return (h + 1) * k * k; }

    int site_of(int q) const { return q / (h + 1); }
    bool is_control(int q) const { return q % (h + 1) == 0; }
    int control_qubit(int site) const { return site * (h + 1); }

    int row(int site) const { return site / k; }
    int col(int site) const { return site % k; }
    int site_index(int r, int c) const { return r * k + c; }
    int l1(int site_a, int site_b) const {
        return std::abs(row(site_a) - row(site_b)) +
               std::abs(col(site_a) - col(site_b));
    }
    bool sites_adjacent(int site_a, int site_b) const {
        return l1(site_a, site_b) == 1;
    }

    /// Coupling graph over qubit indices: control-control lattice edges plus
    /// control-hidden star edges.
    std::vector<std::vector<int>> adjacency() const;
};

struct TopologyMetrics {
    double n_c = 0.0;       ///< control lines per qubit
    double n_r = 0.0;       ///< readout resonators per qubit
    int d_c = 0;            ///< max distance to the nearest control qubit
    double d_bar = 0.0;     ///< mean pairwise graph distance
    int control_lines = 0;  ///< qubit drives + one line per coupler
    int readout_lines = 0;
};

/// Line counts and exact mean pairwise distance (all-pairs BFS).
TopologyMetrics topology_metrics(const GridTopology& topo);

}  // namespace hqt::qv

/** \file
 * Grid topology construction and network metrics.
 */
#include "hqt/grid.hpp"

#include <queue>

namespace hqt::qv {

GridTopology::GridTopology(int k_side, int hidden_per_site)
    : k(k_side), h(hidden_per_site) {
    if (k < 1) throw validation_error("GridTopology: grid side must be >= 1");
    if (h < 0)
        throw validation_error("GridTopology: hidden count must be >= 0");
}

std::vector<std::vector<int>> GridTopology::adjacency() const {
    std::vector<std::vector<int>> adj(static_cast<size_t>(qubits()));
    for (int s = 0; s < sites(); ++s) {
        const int c = control_qubit(s);
        const int r0 = row(s), c0 = col(s);
        if (c0 + 1 < k) {
            const int t = control_qubit(site_index(r0, c0 + 1));
            adj[(size_t)c].push_back(t);
            adj[(size_t)t].push_back(c);
        }
        if (r0 + 1 < k) {
            const int t = control_qubit(site_index(r0 + 1, c0));
            adj[(size_t)c].push_back(t);
            adj[(size_t)t].push_back(c);
        }
        for (int j = 1; j <= h; ++j) {
            adj[(size_t)c].push_back(c + j);
            adj[(size_t)(c + j)].push_back(c);
        }
    }
    return adj;
}

TopologyMetrics topology_metrics(const GridTopology& topo) {
    TopologyMetrics m;
    const int k = topo.k, h = topo.h;
    const int n = topo.qubits();
    m.control_lines = k * k + 2 * k * (k - 1) + h * k * k;
    m.readout_lines = k * k;
    m.n_c = static_cast<double>(m.control_lines) / n;
    m.n_r = 1.0 / (h + 1);
    m.d_c = h > 0 ? 1 : 0;

    const auto adj = topo.adjacency();
    long long total = 0;
    std::vector<int> dist(static_cast<size_t>(n));
    for (int src = 0; src < n; ++src) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[(size_t)src] = 0;
        std::queue<int> q;
        q.push(src);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int v : adj[(size_t)u])
                if (dist[(size_t)v] < 0) {
                    dist[(size_t)v] = dist[(size_t)u] + 1;
                    q.push(v);
                }
        }
        for (int v = src + 1; v < n; ++v) total += dist[(size_t)v];
    }
    const long long pairs = static_cast<long long>(n) * (n - 1) / 2;
    m.d_bar = pairs > 0 ? static_cast<double>(total) / pairs : 0.0;
    return m;
}

}  // namespace hqt::qv

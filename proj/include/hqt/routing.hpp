/** \file
 * Transpilation of one all-to-all gate layer onto the hidden-qubit grid.
 *
 * A random set of qubit pairs is split into groups whose pairs occupy
 * distinct grid groups (multigraph edge coloring), each group's hidden
 * qubits are swapped onto the lattice, the lattice occupants are permuted
 * until paired qubits meet on adjacent sites, the gates fire, and
 * everything is undone.  The emitted RoutingPlan is replayable, which is
 * how all of this is validated.
 */
#pragma once

#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hqt/grid.hpp"
#include "hqt/rng.hpp"

namespace hqt::qv {

/// Disjoint qubit pairs; floor(N/2) of them (one qubit idles when N is odd).
using Pairing = std::vector<std::pair<int, int>>;

/// Uniform random pairing via Fisher-Yates shuffle.
Pairing sample_pairing(const GridTopology& topo, SplitMix64& rng);

/// Splits pair indices into groups such that no two pairs in a group share
/// a grid group.  Group count never exceeds floor(3(h+1)/2) (Shannon bound
/// for the pairing multigraph); exceeding it throws numeric_error.
std::vector<std::vector<int>> group_pairs(const Pairing& pairing,
                                          const GridTopology& topo);

struct SiteAssignment {
    /// Meeting sites aligned with the input pairs: pair i's first qubit
    /// travels to sites[i].first, the second to sites[i].second (adjacent,
    /// disjoint across pairs).  Same-grid-group pairs get (s, s).
    std::vector<std::pair<int, int>> sites;
    int cost = 0;        ///< summed L1 site travel
    bool exact = false;  ///< solved by branch and bound
};

/// Minimum-total-travel assignment of adjacent meeting sites to the pairs
/// of one group.  Exact branch and bound for k <= 4, greedy construction
/// plus exchange local search beyond.
SiteAssignment assign_meeting_sites(const std::vector<std::pair<int, int>>& pairs,
                                    const GridTopology& topo);
SiteAssignment assign_meeting_sites_exact(
    const std::vector<std::pair<int, int>>& pairs, const GridTopology& topo);
SiteAssignment assign_meeting_sites_heuristic(
    const std::vector<std::pair<int, int>>& pairs, const GridTopology& topo);

/// Decomposes a lattice permutation (occupant of site s ends at perm[s])
/// into parallel nearest-neighbor swap layers: column phase, row phase,
/// column phase, each odd-even transposition sorted.  At most 3k layers.
std::vector<std::vector<std::pair<int, int>>> route_permutation(
    const std::vector<int>& perm, int k);

enum class OpKind { hidden_swap, grid_swap, entangle };

struct LayerOp {
    OpKind kind = OpKind::grid_swap;
    int a = 0;  ///< lattice position (qubit index at rest)
    int b = 0;
};

struct RoutingPlan {
    std::vector<std::vector<LayerOp>> layers;
    int n_g = 0;  ///< total gates (swaps + entangles)
    int n_s = 0;  ///< parallel time steps (non-empty layers)
};

/// Runs the six-step procedure for every group and concatenates the layers.
RoutingPlan layer_cost(const Pairing& pairing, const GridTopology& topo);

/// Replays the plan: ops within a layer disjoint and on coupled positions,
/// every pair entangled exactly once while adjacent, all positions restored
/// at the end, totals consistent.  Throws validation_error on any failure.
void validate_plan(const RoutingPlan& plan, const Pairing& pairing,
                   const GridTopology& topo);

nlohmann::json to_json(const RoutingPlan& plan);

}  // namespace hqt::qv

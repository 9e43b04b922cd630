/** \file
 * Pair grouping, meeting-site assignment, permutation routing, and the
 * six-step layer builder with its replay validator.
 */
#include "hqt/routing.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>

namespace hqt::qv {
namespace {

/// FNV-1a over the pairs' grid groups, used to seed deterministic
/// restarts.  Hashing sites rather than qubit indices keeps the coloring
/// (and hence layer counts) invariant under relabeling of a site's
/// interchangeable hidden qubits.
uint64_t pairing_hash(const Pairing& pairing, const GridTopology& topo) {
    uint64_t x = 0xcbf29ce484222325ull;
    for (const auto& [u, v] : pairing) {
        x = (x ^ static_cast<uint64_t>(topo.site_of(u))) * 0x100000001b3ull;
        x = (x ^ static_cast<uint64_t>(topo.site_of(v))) * 0x100000001b3ull;
    }
    return x;
}

template <class Urbg>
void fisher_yates(std::vector<int>& a, Urbg& rng) {
    for (size_t i = a.size(); i > 1; --i) {
        const size_t j = uniform_below(rng, i);
        std::swap(a[i - 1], a[j]);
    }
}

}  // namespace

Pairing sample_pairing(const GridTopology& topo, SplitMix64& rng) {
    std::vector<int> order(static_cast<size_t>(topo.qubits()));
    std::iota(order.begin(), order.end(), 0);
    fisher_yates(order, rng);
    Pairing p;
    p.reserve(order.size() / 2);
    for (size_t i = 0; i + 1 < order.size(); i += 2)
        p.emplace_back(order[i], order[i + 1]);
    return p;
}

// ---- Grouping (multigraph edge coloring) ---------------------------------

namespace {

struct Coloring {
    int palette = 0;
    std::vector<int> color;                  ///< per pair, -1 = uncolored
    std::vector<std::vector<int>> at;        ///< [site][color] -> pair or -1
    std::vector<std::pair<int, int>> sites;  ///< grid groups per pair

    bool free_at(int site, int c) const { return at[(size_t)site][(size_t)c] < 0; }

    void place(int p, int c) {
        color[(size_t)p] = c;
        at[(size_t)sites[(size_t)p].first][(size_t)c] = p;
        at[(size_t)sites[(size_t)p].second][(size_t)c] = p;
    }
    void remove(int p) {
        const int c = color[(size_t)p];
        at[(size_t)sites[(size_t)p].first][(size_t)c] = -1;
        at[(size_t)sites[(size_t)p].second][(size_t)c] = -1;
        color[(size_t)p] = -1;
    }

    /// Collects the maximal alternating component in colors {a, b}
    /// containing pair p (each site hosts at most one pair per color, so
    /// components are paths or cycles; same-group pairs fold both ends
    /// onto one site and behave like any other link).
    std::vector<int> component(int p, int a, int b) const {
        std::vector<int> comp;
        std::vector<int> stack{p};
        std::set<int> seen{p};
        while (!stack.empty()) {
            const int q = stack.back();
            stack.pop_back();
            comp.push_back(q);
            const int other = color[(size_t)q] == a ? b : a;
            for (int s : {sites[(size_t)q].first, sites[(size_t)q].second}) {
                const int next = at[(size_t)s][(size_t)other];
                if (next >= 0 && seen.insert(next).second) stack.push_back(next);
            }
        }
        return comp;
    }

    void flip(const std::vector<int>& comp, int a, int b) {
        for (int q : comp) remove_keep(q);
        for (int q : comp)
            place(q, color_flipped[(size_t)q] == a ? b : a);
    }

    // flip() helpers: removing all first avoids transient double occupancy.
    std::vector<int> color_flipped;
    void remove_keep(int q) {
        color_flipped.resize(color.size());
        color_flipped[(size_t)q] = color[(size_t)q];
        remove(q);
    }
};

bool try_place_with_repair(Coloring& col, int p) {
    const auto [g1, g2] = col.sites[(size_t)p];
    for (int c = 0; c < col.palette; ++c)
        if (col.free_at(g1, c) && col.free_at(g2, c)) {
            col.place(p, c);
            return true;
        }
    // Kempe repair: flip an alternating two-color component hoping to free
    // one color at both grid groups.
    for (int a = 0; a < col.palette; ++a) {
        for (int b = 0; b < col.palette; ++b) {
            if (a == b) continue;
            for (int s : {g1, g2}) {
                const int blocker = col.at[(size_t)s][(size_t)a];
                if (blocker < 0) continue;
                const auto comp = col.component(blocker, a, b);
                col.flip(comp, a, b);
                if (col.free_at(g1, a) && col.free_at(g2, a)) {
                    col.place(p, a);
                    return true;
                }
                col.flip(comp, b, a);  // undo
            }
        }
    }
    return false;
}

}  // namespace

std::vector<std::vector<int>> group_pairs(const Pairing& pairing,
                                          const GridTopology& topo) {
    const int n = static_cast<int>(pairing.size());
    const int palette = 3 * (topo.h + 1) / 2;

    Coloring col;
    col.palette = palette;
    col.sites.reserve((size_t)n);
    for (const auto& [u, v] : pairing) {
        if (u < 0 || v < 0 || u >= topo.qubits() || v >= topo.qubits() || u == v)
            throw validation_error("group_pairs: pair out of range");
        col.sites.emplace_back(topo.site_of(u), topo.site_of(v));
    }
    {
        std::set<int> used;
        for (const auto& [u, v] : pairing)
            if (!used.insert(u).second || !used.insert(v).second)
                throw validation_error("group_pairs: qubit paired twice");
    }

    std::vector<int> order((size_t)n);
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 restart_rng(pairing_hash(pairing, topo));

    for (int attempt = 0; attempt < 400; ++attempt) {
        col.color.assign((size_t)n, -1);
        col.at.assign((size_t)topo.sites(), std::vector<int>((size_t)palette, -1));
        bool ok = true;
        for (int p : order)
            if (!try_place_with_repair(col, p)) {
                ok = false;
                break;
            }
        if (ok) {
            std::vector<std::vector<int>> groups((size_t)palette);
            for (int p = 0; p < n; ++p)
                groups[(size_t)col.color[(size_t)p]].push_back(p);
            groups.erase(std::remove_if(groups.begin(), groups.end(),
                                        [](const auto& g) { return g.empty(); }),
                         groups.end());
            return groups;
        }
        fisher_yates(order, restart_rng);
    }
    throw numeric_error(
        "group_pairs: exceeded the Shannon palette after restarts "
        "(internal coloring error)");
}

// ---- Meeting-site assignment ---------------------------------------------

namespace {

struct AssignProblem {
    std::vector<int> inter;  ///< indices (into the input) needing dominoes
    std::vector<std::pair<int, int>> origin;       ///< per inter pair
    std::vector<int> span;                         ///< L1 between origins
    std::vector<std::pair<int, int>> dominoes;     ///< oriented adjacent sites
    std::vector<std::vector<int>> cost;            ///< [inter][domino]
};

AssignProblem build_problem(const std::vector<std::pair<int, int>>& pairs,
                            const GridTopology& topo) {
    AssignProblem pr;
    for (size_t i = 0; i < pairs.size(); ++i) {
        const auto& [u, v] = pairs[i];
        const int su = topo.site_of(u), sv = topo.site_of(v);
        if (su != sv) {
            pr.inter.push_back(static_cast<int>(i));
            pr.origin.emplace_back(su, sv);
            pr.span.push_back(topo.l1(su, sv));
        }
    }
    for (int s = 0; s < topo.sites(); ++s)
        for (int t = 0; t < topo.sites(); ++t)
            if (topo.sites_adjacent(s, t)) pr.dominoes.emplace_back(s, t);
    pr.cost.resize(pr.inter.size());
    for (size_t i = 0; i < pr.inter.size(); ++i) {
        pr.cost[i].resize(pr.dominoes.size());
        for (size_t d = 0; d < pr.dominoes.size(); ++d)
            pr.cost[i][d] = topo.l1(pr.origin[i].first, pr.dominoes[d].first) +
                            topo.l1(pr.origin[i].second, pr.dominoes[d].second);
    }
    if (2 * pr.inter.size() > static_cast<size_t>(topo.sites()))
        throw validation_error(
            "assign_meeting_sites: group demands more sites than the grid has");
    return pr;
}

SiteAssignment finish(const AssignProblem& pr,
                      const std::vector<std::pair<int, int>>& pairs,
                      const GridTopology& topo, const std::vector<int>& pick,
                      bool exact) {
    SiteAssignment out;
    out.exact = exact;
    out.sites.resize(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        const int s = topo.site_of(pairs[i].first);
        out.sites[i] = {s, s};
    }
    for (size_t i = 0; i < pr.inter.size(); ++i) {
        out.sites[(size_t)pr.inter[i]] = pr.dominoes[(size_t)pick[i]];
        out.cost += pr.cost[i][(size_t)pick[i]];
    }
    return out;
}

/// Greedy construction + pairwise-exchange local search over oriented
/// dominoes.  Three deterministic greedy orders are tried; each start is
/// polished by (a) relocating one pair to any free domino and (b) moving
/// one pair onto a domino blocked by exactly one other pair, relocating
/// that pair simultaneously.  The best of the three results wins.
class HeuristicSolver {
  public:
    explicit HeuristicSolver(const AssignProblem& pr) : pr_(pr) {
        int max_site = 0;
        for (const auto& [s, t] : pr.dominoes)
            max_site = std::max({max_site, s, t});
        n_sites_ = max_site + 1;
        const size_t m = pr.inter.size();
        ranked_.resize(m);
        for (size_t i = 0; i < m; ++i) {
            ranked_[i].resize(pr.dominoes.size());
            std::iota(ranked_[i].begin(), ranked_[i].end(), 0);
            std::sort(ranked_[i].begin(), ranked_[i].end(), [&](int a, int b) {
                return pr.cost[i][(size_t)a] != pr.cost[i][(size_t)b]
                           ? pr.cost[i][(size_t)a] < pr.cost[i][(size_t)b]
                           : a < b;
            });
        }
    }

    std::vector<int> solve() {
        const size_t m = pr_.inter.size();
        std::vector<std::vector<size_t>> orders;
        std::vector<size_t> by_index(m);
        std::iota(by_index.begin(), by_index.end(), size_t{0});
        orders.push_back(by_index);
        auto by_span = by_index;
        std::sort(by_span.begin(), by_span.end(), [&](size_t a, size_t b) {
            return pr_.span[a] != pr_.span[b] ? pr_.span[a] > pr_.span[b]
                                              : a < b;
        });
        orders.push_back(by_span);
        std::reverse(by_span.begin(), by_span.end());
        orders.push_back(by_span);

        std::vector<int> best;
        int best_cost = std::numeric_limits<int>::max();
        for (const auto& order : orders) {
            std::vector<int> pick = construct(order);
            local_search(pick);
            const int c = total_cost(pick);
            if (c < best_cost) {
                best_cost = c;
                best = pick;
            }
        }
        return best;
    }

  private:
    const AssignProblem& pr_;
    int n_sites_ = 0;
    std::vector<std::vector<int>> ranked_;

    int total_cost(const std::vector<int>& pick) const {
        int c = 0;
        for (size_t i = 0; i < pick.size(); ++i)
            c += pr_.cost[i][(size_t)pick[i]];
        return c;
    }

    /// Greedy first-fit in the given order; dead ends fall back to a fresh
    /// row-wise domino tiling, which always has enough disjoint dominoes.
    std::vector<int> construct(const std::vector<size_t>& order) const {
        const size_t m = pr_.inter.size();
        std::vector<int> pick(m, -1);
        std::vector<bool> used((size_t)n_sites_, false);
        bool stuck = false;
        for (size_t i : order) {
            int found = -1;
            for (int d : ranked_[i]) {
                const auto& [s, t] = pr_.dominoes[(size_t)d];
                if (!used[(size_t)s] && !used[(size_t)t]) {
                    found = d;
                    break;
                }
            }
            if (found < 0) {
                stuck = true;
                break;
            }
            pick[i] = found;
            used[(size_t)pr_.dominoes[(size_t)found].first] = true;
            used[(size_t)pr_.dominoes[(size_t)found].second] = true;
        }
        if (stuck) return tiling_assignment();
        return pick;
    }

    /// Pair i gets the i-th domino of a fixed disjoint tiling (horizontal
    /// strips, vertical leftovers in the last column for odd grids), in the
    /// cheaper of its two orientations.
    std::vector<int> tiling_assignment() const {
        std::vector<std::pair<int, int>> tiles;
        // Reconstruct k from the number of sites (square lattice).
        int k = 1;
        while (k * k < n_sites_) ++k;
        for (int r = 0; r < k; ++r)
            for (int c = 0; c + 1 < k; c += 2)
                tiles.emplace_back(r * k + c, r * k + c + 1);
        if (k % 2 == 1)
            for (int r = 0; r + 1 < k; r += 2)
                tiles.emplace_back(r * k + k - 1, (r + 1) * k + k - 1);
        const size_t m = pr_.inter.size();
        if (tiles.size() < m)
            throw numeric_error(
                "assign_meeting_sites: tiling fallback too small "
                "(internal error)");
        std::vector<int> pick(m, -1);
        for (size_t i = 0; i < m; ++i) {
            const auto [s, t] = tiles[i];
            const int fwd = domino_id(s, t), bwd = domino_id(t, s);
            pick[i] = pr_.cost[i][(size_t)fwd] <= pr_.cost[i][(size_t)bwd]
                          ? fwd
                          : bwd;
        }
        return pick;
    }

    int domino_id(int s, int t) const {
        for (size_t d = 0; d < pr_.dominoes.size(); ++d)
            if (pr_.dominoes[d].first == s && pr_.dominoes[d].second == t)
                return (int)d;
        throw numeric_error("assign_meeting_sites: missing domino (internal)");
    }

    void local_search(std::vector<int>& pick) const {
        const size_t m = pr_.inter.size();
        std::vector<int> owner((size_t)n_sites_, -1);
        const auto set_owner = [&](size_t i, int who) {
            owner[(size_t)pr_.dominoes[(size_t)pick[i]].first] = who;
            owner[(size_t)pr_.dominoes[(size_t)pick[i]].second] = who;
        };
        for (size_t i = 0; i < m; ++i) set_owner(i, (int)i);

        bool improved = true;
        int sweeps = 0;
        while (improved && sweeps++ < 500) {
            improved = false;
            for (size_t i = 0; i < m; ++i) {
                const int cur = pr_.cost[i][(size_t)pick[i]];
                // (a) relocate pair i to a strictly cheaper free domino
                bool moved = false;
                for (int d : ranked_[i]) {
                    if (pr_.cost[i][(size_t)d] >= cur) break;
                    const auto& [s, t] = pr_.dominoes[(size_t)d];
                    const int os = owner[(size_t)s], ot = owner[(size_t)t];
                    if ((os < 0 || os == (int)i) && (ot < 0 || ot == (int)i)) {
                        set_owner(i, -1);
                        pick[i] = d;
                        set_owner(i, (int)i);
                        improved = moved = true;
                        break;
                    }
                }
                if (moved) continue;
                // (b) take a domino blocked by exactly one pair j, and move
                // j anywhere that stays disjoint; accept the best joint gain
                int best_gain = 0, best_d = -1, best_j = -1, best_e = -1;
                for (int d : ranked_[i]) {
                    if (d == pick[i]) continue;
                    const auto& [s, t] = pr_.dominoes[(size_t)d];
                    const int os = owner[(size_t)s], ot = owner[(size_t)t];
                    int j = -1;
                    if (os >= 0 && os != (int)i) j = os;
                    if (ot >= 0 && ot != (int)i) {
                        if (j >= 0 && ot != j) continue;  // two blockers
                        j = ot;
                    }
                    if (j < 0) continue;  // free dominoes handled in (a)
                    for (int e : ranked_[(size_t)j]) {
                        const auto& [es, et] = pr_.dominoes[(size_t)e];
                        const int a = owner[(size_t)es], b = owner[(size_t)et];
                        const bool clear =
                            (a < 0 || a == j || a == (int)i) &&
                            (b < 0 || b == j || b == (int)i);
                        if (!clear) continue;
                        if (es == s || es == t || et == s || et == t) continue;
                        const int gain =
                            cur + pr_.cost[(size_t)j][(size_t)pick[(size_t)j]] -
                            pr_.cost[i][(size_t)d] - pr_.cost[(size_t)j][(size_t)e];
                        if (gain > best_gain) {
                            best_gain = gain;
                            best_d = d;
                            best_j = j;
                            best_e = e;
                        }
                        break;  // ranked: first feasible e is j's cheapest
                    }
                }
                if (best_gain > 0) {
                    set_owner(i, -1);
                    set_owner((size_t)best_j, -1);
                    pick[i] = best_d;
                    pick[(size_t)best_j] = best_e;
                    set_owner(i, (int)i);
                    set_owner((size_t)best_j, best_j);
                    improved = true;
                }
            }
        }
    }
};

std::vector<int> solve_heuristic(const AssignProblem& pr) {
    return HeuristicSolver(pr).solve();
}

std::vector<int> solve_exact(const AssignProblem& pr,
                             const std::vector<int>& warm_start) {
    const size_t m = pr.inter.size();
    for (const auto& [s, t] : pr.dominoes)
        if (s >= 64 || t >= 64)
            throw validation_error(
                "assign_meeting_sites_exact: grid too large for exact search");
    std::vector<int> best = warm_start;
    int best_cost = 0;
    for (size_t i = 0; i < m; ++i) best_cost += pr.cost[i][(size_t)best[i]];

    // Cheapest achievable per pair, for the suffix lower bound.
    std::vector<int> cheapest(m, 0);
    for (size_t i = 0; i < m; ++i)
        cheapest[i] = *std::min_element(pr.cost[i].begin(), pr.cost[i].end());
    std::vector<int> suffix(m + 1, 0);
    for (size_t i = m; i-- > 0;) suffix[i] = suffix[i + 1] + cheapest[i];

    std::vector<int> pick(m, -1), cur(m, -1);
    uint64_t mask = 0;
    const auto site_bits = [&](int d) {
        return (uint64_t{1} << pr.dominoes[(size_t)d].first) |
               (uint64_t{1} << pr.dominoes[(size_t)d].second);
    };

    // Depth-first over pairs in input order with cost-sorted candidates.
    std::vector<std::vector<int>> ranked(m);
    for (size_t i = 0; i < m; ++i) {
        ranked[i].resize(pr.dominoes.size());
        std::iota(ranked[i].begin(), ranked[i].end(), 0);
        std::sort(ranked[i].begin(), ranked[i].end(), [&](int a, int b) {
            return pr.cost[i][(size_t)a] != pr.cost[i][(size_t)b]
                       ? pr.cost[i][(size_t)a] < pr.cost[i][(size_t)b]
                       : a < b;
        });
    }

    const std::function<void(size_t, int)> dfs = [&](size_t depth, int acc) {
        if (acc + suffix[depth] >= best_cost) return;
        if (depth == m) {
            best = cur;
            best_cost = acc;
            return;
        }
        for (int d : ranked[depth]) {
            const uint64_t bits = site_bits(d);
            if (mask & bits) continue;
            if (acc + pr.cost[depth][(size_t)d] + suffix[depth + 1] >= best_cost)
                continue;  // candidates are cost-sorted, but keep scanning:
                           // later dominoes may be free where this one is not
            mask |= bits;
            cur[depth] = d;
            dfs(depth + 1, acc + pr.cost[depth][(size_t)d]);
            mask &= ~bits;
        }
    };
    dfs(0, 0);
    return best;
}

}  // namespace

SiteAssignment assign_meeting_sites_heuristic(
    const std::vector<std::pair<int, int>>& pairs, const GridTopology& topo) {
    const AssignProblem pr = build_problem(pairs, topo);
    return finish(pr, pairs, topo, solve_heuristic(pr), false);
}

SiteAssignment assign_meeting_sites_exact(
    const std::vector<std::pair<int, int>>& pairs, const GridTopology& topo) {
    const AssignProblem pr = build_problem(pairs, topo);
    return finish(pr, pairs, topo, solve_exact(pr, solve_heuristic(pr)), true);
}

SiteAssignment assign_meeting_sites(const std::vector<std::pair<int, int>>& pairs,
                                    const GridTopology& topo) {
    return topo.k <= 4 ? assign_meeting_sites_exact(pairs, topo)
                       : assign_meeting_sites_heuristic(pairs, topo);
}

// ---- Permutation routing -------------------------------------------------

namespace {

/// Perfect matching columns -> destination columns in the (multi)graph
/// with multiplicities cnt; Kuhn's augmenting paths.  A perfect matching
/// exists by Hall's theorem while the demand graph stays regular.  The
/// `preferred` mask marks edges that can be served by a qubit already in
/// the round's target row; maximizing their use first keeps near-identity
/// permutations cheap (a fully preferred round needs no column swaps).
std::vector<int> column_matching(const std::vector<std::vector<int>>& cnt,
                                 const std::vector<std::vector<char>>& preferred,
                                 int k) {
    std::vector<int> match_to((size_t)k, -1), match_from((size_t)k, -1);
    const std::function<bool(int, bool, std::vector<bool>&)> augment =
        [&](int c, bool pref_only, std::vector<bool>& vis) -> bool {
        for (int t = 0; t < k; ++t) {
            if (cnt[(size_t)c][(size_t)t] == 0 || vis[(size_t)t]) continue;
            if (pref_only && !preferred[(size_t)c][(size_t)t]) continue;
            vis[(size_t)t] = true;
            if (match_from[(size_t)t] < 0 ||
                augment(match_from[(size_t)t], pref_only, vis)) {
                match_from[(size_t)t] = c;
                match_to[(size_t)c] = t;
                return true;
            }
        }
        return false;
    };
    for (int c = 0; c < k; ++c) {
        std::vector<bool> vis((size_t)k, false);
        augment(c, true, vis);
    }
    for (int c = 0; c < k; ++c) {
        if (match_to[(size_t)c] >= 0) continue;
        std::vector<bool> vis((size_t)k, false);
        if (!augment(c, false, vis))
            throw numeric_error(
                "route_permutation: column matching failed (internal error)");
    }
    return match_to;
}

}  // namespace

std::vector<std::vector<std::pair<int, int>>> route_permutation(
    const std::vector<int>& perm, int k) {
    if (k < 1) throw validation_error("route_permutation: k must be >= 1");
    const int n = k * k;
    if (static_cast<int>(perm.size()) != n)
        throw validation_error("route_permutation: permutation size != k^2");
    {
        std::vector<bool> seen((size_t)n, false);
        for (int t : perm) {
            if (t < 0 || t >= n || seen[(size_t)t])
                throw validation_error("route_permutation: not a permutation");
            seen[(size_t)t] = true;
        }
    }

    std::vector<std::vector<std::pair<int, int>>> layers;
    bool identity = true;
    for (int s = 0; s < n; ++s) identity &= perm[(size_t)s] == s;
    if (identity) return layers;

    // Intermediate row per qubit: peel k perfect matchings off the
    // column-demand multigraph so every (row, destination column) slot is
    // used exactly once in the middle phase.
    std::vector<std::vector<int>> cnt((size_t)k, std::vector<int>((size_t)k, 0));
    std::vector<std::vector<std::vector<int>>> bucket(
        (size_t)k, std::vector<std::vector<int>>((size_t)k));
    for (int s = 0; s < n; ++s) {
        const int c = s % k, dest_col = perm[(size_t)s] % k;
        ++cnt[(size_t)c][(size_t)dest_col];
        bucket[(size_t)c][(size_t)dest_col].push_back(s);
    }
    std::vector<int> irow((size_t)n, -1);
    for (int rho = 0; rho < k; ++rho) {
        std::vector<std::vector<char>> preferred(
            (size_t)k, std::vector<char>((size_t)k, 0));
        for (int c = 0; c < k; ++c)
            for (int t = 0; t < k; ++t)
                for (int s : bucket[(size_t)c][(size_t)t])
                    if (s / k == rho) {
                        preferred[(size_t)c][(size_t)t] = 1;
                        break;
                    }
        const std::vector<int> match = column_matching(cnt, preferred, k);
        for (int c = 0; c < k; ++c) {
            const int t = match[(size_t)c];
            --cnt[(size_t)c][(size_t)t];
            auto& b = bucket[(size_t)c][(size_t)t];
            // serve the qubit closest to the target row, ideally already there
            size_t pickat = 0;
            for (size_t i = 1; i < b.size(); ++i)
                if (std::abs(b[i] / k - rho) < std::abs(b[pickat] / k - rho))
                    pickat = i;
            irow[(size_t)b[pickat]] = rho;
            b.erase(b.begin() + (long)pickat);
        }
    }

    std::vector<int> occ((size_t)n);
    std::iota(occ.begin(), occ.end(), 0);

    // One odd-even transposition pass; keys are per original site.
    const auto sort_phase = [&](bool columns, const std::vector<int>& key) {
        for (int t = 0; t < k; ++t) {
            std::vector<std::pair<int, int>> layer;
            for (int line = 0; line < k; ++line)
                for (int i = t % 2; i + 1 < k; i += 2) {
                    const int p = columns ? i * k + line : line * k + i;
                    const int q = columns ? (i + 1) * k + line : line * k + i + 1;
                    if (key[(size_t)occ[(size_t)p]] > key[(size_t)occ[(size_t)q]]) {
                        std::swap(occ[(size_t)p], occ[(size_t)q]);
                        layer.emplace_back(p, q);
                    }
                }
            if (!layer.empty()) layers.push_back(std::move(layer));
        }
    };

    std::vector<int> dest_col((size_t)n), dest_row((size_t)n);
    for (int s = 0; s < n; ++s) {
        dest_col[(size_t)s] = perm[(size_t)s] % k;
        dest_row[(size_t)s] = perm[(size_t)s] / k;
    }
    sort_phase(true, irow);
    sort_phase(false, dest_col);
    sort_phase(true, dest_row);

    for (int s = 0; s < n; ++s)
        if (occ[(size_t)perm[(size_t)s]] != s)
            throw numeric_error(
                "route_permutation: replay mismatch (internal error)");
    return layers;
}

// ---- Six-step layer builder ----------------------------------------------

RoutingPlan layer_cost(const Pairing& pairing, const GridTopology& topo) {
    RoutingPlan plan;
    const auto groups = group_pairs(pairing, topo);

    const auto push_layer = [&](std::vector<LayerOp> layer) {
        if (layer.empty()) return;
        plan.n_g += static_cast<int>(layer.size());
        plan.layers.push_back(std::move(layer));
    };

    for (const auto& group : groups) {
        std::vector<std::pair<int, int>> members;
        members.reserve(group.size());
        for (int p : group) members.push_back(pairing[(size_t)p]);

        // Step 2: swap hidden members onto the lattice; for same-group
        // pairs swap one in only if both are hidden.
        std::vector<LayerOp> swap_in;
        std::vector<LayerOp> local_entangles;
        for (auto& [u, v] : members) {
            const int su = topo.site_of(u), sv = topo.site_of(v);
            if (su == sv) {
                if (!topo.is_control(u) && !topo.is_control(v)) {
                    const int in = std::min(u, v), stay = std::max(u, v);
                    swap_in.push_back(
                        {OpKind::hidden_swap, topo.control_qubit(su), in});
                    local_entangles.push_back(
                        {OpKind::entangle, topo.control_qubit(su), stay});
                } else {
                    const int hid = topo.is_control(u) ? v : u;
                    local_entangles.push_back(
                        {OpKind::entangle, topo.control_qubit(su), hid});
                }
            } else {
                if (!topo.is_control(u))
                    swap_in.push_back(
                        {OpKind::hidden_swap, topo.control_qubit(su), u});
                if (!topo.is_control(v))
                    swap_in.push_back(
                        {OpKind::hidden_swap, topo.control_qubit(sv), v});
            }
        }
        push_layer(swap_in);
        // Same-group pairs are adjacent right now; entangling them before
        // the permutation frees their sites for routing.
        push_layer(local_entangles);

        // Step 3: choose meeting sites and route the lattice occupants.
        const SiteAssignment assign = assign_meeting_sites(members, topo);
        std::vector<int> perm((size_t)topo.sites());
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<int> inv = perm;  // inv[target] = source under perm
        const auto require = [&](int src, int dst) {
            const int holder = inv[(size_t)dst];
            if (perm[(size_t)src] == dst) return;
            const int old = perm[(size_t)src];
            std::swap(perm[(size_t)src], perm[(size_t)holder]);
            inv[(size_t)dst] = src;
            inv[(size_t)old] = holder;
        };
        for (size_t i = 0; i < members.size(); ++i) {
            const auto& [u, v] = members[i];
            const int su = topo.site_of(u), sv = topo.site_of(v);
            if (su == sv) continue;
            require(su, assign.sites[i].first);
            require(sv, assign.sites[i].second);
        }
        const auto route = route_permutation(perm, topo.k);
        for (const auto& sl : route) {
            std::vector<LayerOp> layer;
            for (const auto& [a, b] : sl)
                layer.push_back({OpKind::grid_swap, topo.control_qubit(a),
                                 topo.control_qubit(b)});
            push_layer(std::move(layer));
        }

        // Step 4: entangle the routed pairs at their meeting sites.
        std::vector<LayerOp> entangles;
        for (size_t i = 0; i < members.size(); ++i) {
            const auto& [u, v] = members[i];
            if (topo.site_of(u) == topo.site_of(v)) continue;
            entangles.push_back({OpKind::entangle,
                                 topo.control_qubit(assign.sites[i].first),
                                 topo.control_qubit(assign.sites[i].second)});
        }
        push_layer(entangles);

        // Steps 5-6: undo the permutation and the hidden swaps.
        for (auto it = route.rbegin(); it != route.rend(); ++it) {
            std::vector<LayerOp> layer;
            for (const auto& [a, b] : *it)
                layer.push_back({OpKind::grid_swap, topo.control_qubit(a),
                                 topo.control_qubit(b)});
            push_layer(std::move(layer));
        }
        push_layer(swap_in);
    }
    plan.n_s = static_cast<int>(plan.layers.size());
    return plan;
}

// ---- Replay validation ----------------------------------------------------

void validate_plan(const RoutingPlan& plan, const Pairing& pairing,
                   const GridTopology& topo) {
    const auto fail = [](const std::string& what) {
        throw validation_error("validate_plan: " + what);
    };

    const auto coupled = [&](int a, int b) {
        if (a == b) return false;
        const int sa = topo.site_of(a), sb = topo.site_of(b);
        if (sa == sb) return topo.is_control(a) != topo.is_control(b);
        return topo.is_control(a) && topo.is_control(b) &&
               topo.sites_adjacent(sa, sb);
    };

    std::vector<int> occ((size_t)topo.qubits());
    std::iota(occ.begin(), occ.end(), 0);

    std::map<std::pair<int, int>, int> wanted;
    for (const auto& [u, v] : pairing)
        ++wanted[{std::min(u, v), std::max(u, v)}];
    if (wanted.size() != pairing.size()) fail("duplicate pair in input");

    int ops = 0;
    for (const auto& layer : plan.layers) {
        if (layer.empty()) fail("empty layer");
        std::set<int> touched;
        for (const auto& op : layer) {
            if (op.a < 0 || op.b < 0 || op.a >= topo.qubits() ||
                op.b >= topo.qubits())
                fail("operation out of range");
            if (!coupled(op.a, op.b)) fail("operation on uncoupled positions");
            if (!touched.insert(op.a).second || !touched.insert(op.b).second)
                fail("overlapping operations in one layer");
            ++ops;
            if (op.kind == OpKind::entangle) {
                const int qu = occ[(size_t)op.a], qv = occ[(size_t)op.b];
                const auto key =
                    std::make_pair(std::min(qu, qv), std::max(qu, qv));
                const auto it = wanted.find(key);
                if (it == wanted.end() || it->second == 0)
                    fail("entangle on a non-requested pair");
                --it->second;
            } else {
                std::swap(occ[(size_t)op.a], occ[(size_t)op.b]);
            }
        }
    }
    for (const auto& [key, count] : wanted)
        if (count != 0) fail("pair never entangled");
    for (int p = 0; p < topo.qubits(); ++p)
        if (occ[(size_t)p] != p) fail("positions not restored");
    if (ops != plan.n_g) fail("gate count mismatch");
    if (static_cast<int>(plan.layers.size()) != plan.n_s)
        fail("layer count mismatch");
}

nlohmann::json to_json(const RoutingPlan& plan) {
    const auto kind_name = [](OpKind k) {
        switch (k) {
            case OpKind::hidden_swap: return "hidden_swap";
            case OpKind::grid_swap: return "grid_swap";
            case OpKind::entangle: return "entangle";
        }
        return "?";
    };
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : plan.layers) {
        nlohmann::json jl = nlohmann::json::array();
        for (const auto& op : layer)
            jl.push_back({{"kind", kind_name(op.kind)}, {"a", op.a}, {"b", op.b}});
        layers.push_back(std::move(jl));
    }
    return nlohmann::json{
        {"layers", std::move(layers)}, {"n_g", plan.n_g}, {"n_s", plan.n_s}};
}

}  // namespace hqt::qv

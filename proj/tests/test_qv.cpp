// Grid topology metrics, pairing/grouping/routing, and the quantum-volume
// estimator: closed-form oracles, brute-force cross-checks, replay
// validation, and serialization round trips.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <vector>

#include "hqt/grid.hpp"
#include "hqt/qvolume.hpp"
#include "hqt/rng.hpp"
#include "hqt/routing.hpp"
#include "hqt/types.hpp"

using namespace hqt;
using namespace hqt::qv;

namespace {

// Independent mean-pairwise-distance oracle: BFS per node on the adjacency
// lists, summed over unordered pairs.
double brute_d_bar(const GridTopology& topo) {
    const auto adj = topo.adjacency();
    const int n = topo.qubits();
    long long total = 0;
    for (int src = 0; src < n; ++src) {
        std::vector<int> dist((size_t)n, -1);
        std::queue<int> q;
        dist[(size_t)src] = 0;
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
        for (int v = src + 1; v < n; ++v) {
            REQUIRE(dist[(size_t)v] > 0);
            total += dist[(size_t)v];
        }
    }
    return static_cast<double>(total) / (static_cast<double>(n) * (n - 1) / 2);
}

std::vector<int> random_permutation(int n, SplitMix64& rng) {
    std::vector<int> p((size_t)n);
    std::iota(p.begin(), p.end(), 0);
    for (size_t i = p.size(); i > 1; --i) std::swap(p[i - 1], p[uniform_below(rng, i)]);
    return p;
}

// Replays swap layers over site occupants and checks perm is realized with
// adjacent, disjoint swaps only.
void check_route(const std::vector<int>& perm, int k,
                 const std::vector<std::vector<std::pair<int, int>>>& layers) {
    const GridTopology topo(k, 0);
    std::vector<int> occ((size_t)(k * k));
    std::iota(occ.begin(), occ.end(), 0);
    for (const auto& layer : layers) {
        REQUIRE(!layer.empty());
        std::set<int> touched;
        for (const auto& [p, q] : layer) {
            REQUIRE(topo.sites_adjacent(p, q));
            REQUIRE(touched.insert(p).second);
            REQUIRE(touched.insert(q).second);
            std::swap(occ[(size_t)p], occ[(size_t)q]);
        }
    }
    for (int s = 0; s < k * k; ++s) REQUIRE(occ[(size_t)perm[(size_t)s]] == s);
    REQUIRE(layers.size() <= 3 * (size_t)k);
}

}  // namespace

TEST_CASE("grid topology indexing") {
    const GridTopology topo(3, 2);
    CHECK(topo.sites() == 9);
    CHECK(topo.qubits() == 27);
    CHECK(topo.site_of(7) == 2);
    CHECK(topo.is_control(6));
    CHECK_FALSE(topo.is_control(7));
    CHECK(topo.control_qubit(2) == 6);
    for (int s = 0; s < topo.sites(); ++s)
        CHECK(topo.site_index(topo.row(s), topo.col(s)) == s);
    CHECK(topo.l1(0, 8) == 4);   // opposite corners of the 3x3 lattice
    CHECK(topo.sites_adjacent(4, 5));
    CHECK_FALSE(topo.sites_adjacent(2, 3));  // row wrap is not adjacency

    const auto adj = topo.adjacency();
    REQUIRE(adj.size() == 27);
    for (int q = 0; q < topo.qubits(); ++q) {
        if (topo.is_control(q)) {
            int lattice = 0;
            const int s = topo.site_of(q);
            for (int t = 0; t < topo.sites(); ++t)
                if (topo.sites_adjacent(s, t)) ++lattice;
            CHECK((int)adj[(size_t)q].size() == lattice + topo.h);
        } else {
            REQUIRE(adj[(size_t)q].size() == 1);
            CHECK(adj[(size_t)q][0] == topo.control_qubit(topo.site_of(q)));
        }
    }

    CHECK_THROWS_AS(GridTopology(0, 1), validation_error);
    CHECK_THROWS_AS(GridTopology(2, -1), validation_error);
}

TEST_CASE("topology metrics against hand oracles") {
    SUBCASE("line counts vs adjacency edge count") {
        for (const auto& [k, h] : {std::pair{2, 0}, {3, 2}, {4, 1}, {2, 4}}) {
            const GridTopology topo(k, h);
            const auto m = topology_metrics(topo);
            const auto adj = topo.adjacency();
            size_t degree_sum = 0;
            for (const auto& nb : adj) degree_sum += nb.size();
            const int couplers = static_cast<int>(degree_sum / 2);
            CHECK(m.control_lines == k * k + couplers);
            CHECK(m.readout_lines == k * k);
            CHECK(m.n_c == doctest::Approx((double)m.control_lines / topo.qubits())
                               .epsilon(1e-15));
            CHECK(m.n_r == doctest::Approx(1.0 / (h + 1)).epsilon(1e-15));
            CHECK(m.d_c == (h > 0 ? 1 : 0));
        }
    }
    SUBCASE("mean distance, tiny closed forms") {
        CHECK(topology_metrics(GridTopology(1, 2)).d_bar ==
              doctest::Approx(4.0 / 3.0).epsilon(1e-14));
        CHECK(topology_metrics(GridTopology(2, 0)).d_bar ==
              doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    }
    SUBCASE("mean distance vs independent BFS") {
        for (const auto& [k, h] : {std::pair{3, 2}, {4, 1}, {2, 4}}) {
            const GridTopology topo(k, h);
            CHECK(topology_metrics(topo).d_bar ==
                  doctest::Approx(brute_d_bar(topo)).epsilon(1e-13));
        }
    }
}

TEST_CASE("topology metric limits") {
    SUBCASE("bare grid approaches three lines per qubit") {
        double prev_gap = 10.0;
        for (int k : {5, 10, 40}) {
            const auto m = topology_metrics(GridTopology(k, 0));
            // exact closed form: one drive + two coupler-halves per qubit,
            // minus the open boundary correction 2/k
            CHECK(m.n_c == doctest::Approx(3.0 - 2.0 / k).epsilon(1e-14));
            CHECK(std::abs(m.n_c - 3.0) < prev_gap);
            prev_gap = std::abs(m.n_c - 3.0);
            CHECK(m.n_r == doctest::Approx(1.0).epsilon(1e-15));
        }
    }
    SUBCASE("10x10 mean distance near 2 sqrt(N) / 3") {
        const auto m = topology_metrics(GridTopology(10, 0));
        CHECK(std::abs(m.d_bar - 20.0 / 3.0) / (20.0 / 3.0) < 0.05);
    }
    SUBCASE("many hidden qubits: line ratio to the 11/5 network tends to 5/11") {
        const auto m = topology_metrics(GridTopology(2, 999));
        const double ratio = m.n_c / (11.0 / 5.0);
        CHECK(std::abs(ratio - 5.0 / 11.0) < 1e-3);
    }
}

TEST_CASE("splitmix streams") {
    SplitMix64 a(42), b(42);
    for (int i = 0; i < 10; ++i) CHECK(a() == b());
    SplitMix64 c(43);
    CHECK(a() != c());

    std::set<uint64_t> seeds;
    for (uint64_t i = 0; i < 100; ++i) seeds.insert(stream_seed(7, i));
    CHECK(seeds.size() == 100);

    SplitMix64 r(5);
    std::vector<int> counts(10, 0);
    for (int i = 0; i < 10000; ++i) {
        const auto x = uniform_below(r, size_t{10});
        REQUIRE(x < 10);
        ++counts[(size_t)x];
    }
    for (int c10 : counts) CHECK(std::abs(c10 - 1000) < 200);
}

TEST_CASE("pairing sampler basics") {
    SUBCASE("even N covers every qubit once") {
        const GridTopology topo(2, 4);  // N = 20
        SplitMix64 rng(1);
        const Pairing p = sample_pairing(topo, rng);
        REQUIRE(p.size() == 10);
        std::set<int> seen;
        for (const auto& [u, v] : p) {
            CHECK(seen.insert(u).second);
            CHECK(seen.insert(v).second);
        }
        CHECK(seen.size() == 20);
    }
    SUBCASE("odd N leaves exactly one qubit idle") {
        const GridTopology topo(5, 0);  // N = 25
        SplitMix64 rng(2);
        const Pairing p = sample_pairing(topo, rng);
        REQUIRE(p.size() == 12);
        std::set<int> seen;
        for (const auto& [u, v] : p) {
            seen.insert(u);
            seen.insert(v);
        }
        CHECK(seen.size() == 24);
    }
    SUBCASE("deterministic in the stream") {
        const GridTopology topo(3, 1);
        SplitMix64 r1(9), r2(9);
        CHECK(sample_pairing(topo, r1) == sample_pairing(topo, r2));
    }
}

TEST_CASE("pairing sampler uniformity (chi-square)") {
    const auto canonical = [](Pairing p) {
        for (auto& [u, v] : p)
            if (u > v) std::swap(u, v);
        std::sort(p.begin(), p.end());
        return p;
    };
    SUBCASE("all three matchings of four qubits") {
        const GridTopology topo(2, 0);
        SplitMix64 rng(12345);
        std::map<Pairing, int> matching_counts;
        std::map<std::pair<int, int>, int> pair_counts;
        const int n_samples = 100000;
        for (int i = 0; i < n_samples; ++i) {
            const Pairing p = canonical(sample_pairing(topo, rng));
            ++matching_counts[p];
            for (const auto& pr : p) ++pair_counts[pr];
        }
        REQUIRE(matching_counts.size() == 3);
        double chi2 = 0.0;
        const double expect = n_samples / 3.0;
        for (const auto& [m, c] : matching_counts)
            chi2 += (c - expect) * (c - expect) / expect;
        CHECK(chi2 < 9.21);  // 0.99 quantile, 2 dof

        REQUIRE(pair_counts.size() == 6);
        double chi2p = 0.0;
        const double expectp = 2.0 * n_samples / 6.0;
        for (const auto& [pr, c] : pair_counts)
            chi2p += (c - expectp) * (c - expectp) / expectp;
        CHECK(chi2p < 15.09);  // 0.99 quantile, 5 dof
    }
    SUBCASE("fifteen matchings of six qubits") {
        const GridTopology topo(1, 5);
        SplitMix64 rng(777);
        std::map<Pairing, int> counts;
        const int n_samples = 100000;
        for (int i = 0; i < n_samples; ++i)
            ++counts[canonical(sample_pairing(topo, rng))];
        REQUIRE(counts.size() == 15);
        double chi2 = 0.0;
        const double expect = n_samples / 15.0;
        for (const auto& [m, c] : counts)
            chi2 += (c - expect) * (c - expect) / expect;
        CHECK(chi2 < 29.15);  // 0.99 quantile, 14 dof
    }
}

TEST_CASE("pair grouping: partition, site-disjointness, palette bound") {
    for (const auto& [k, h] : {std::pair{2, 4}, {3, 2}, {4, 1}}) {
        const GridTopology topo(k, h);
        const int bound = 3 * (h + 1) / 2;
        SplitMix64 rng(100 + (uint64_t)k);
        for (int trial = 0; trial < 1000; ++trial) {
            const Pairing pairing = sample_pairing(topo, rng);
            const auto groups = group_pairs(pairing, topo);
            CHECK((int)groups.size() <= bound);
            std::vector<int> owner(pairing.size(), -1);
            for (size_t g = 0; g < groups.size(); ++g) {
                std::set<int> sites;
                for (int idx : groups[g]) {
                    REQUIRE(idx >= 0);
                    REQUIRE(idx < (int)pairing.size());
                    REQUIRE(owner[(size_t)idx] == -1);
                    owner[(size_t)idx] = (int)g;
                    const int su = topo.site_of(pairing[(size_t)idx].first);
                    const int sv = topo.site_of(pairing[(size_t)idx].second);
                    REQUIRE(sites.insert(su).second);
                    if (sv != su) REQUIRE(sites.insert(sv).second);
                }
            }
            for (int o : owner) REQUIRE(o >= 0);
        }
    }

    SUBCASE("no hidden qubits means one group") {
        const GridTopology topo(4, 0);
        SplitMix64 rng(55);
        for (int trial = 0; trial < 200; ++trial) {
            const auto groups = group_pairs(sample_pairing(topo, rng), topo);
            CHECK(groups.size() == 1);
        }
    }
    SUBCASE("bad pairings rejected") {
        const GridTopology topo(2, 1);
        CHECK_THROWS_AS(group_pairs(Pairing{{0, 0}}, topo), validation_error);
        CHECK_THROWS_AS(group_pairs(Pairing{{0, 1}, {1, 2}}, topo),
                        validation_error);
        CHECK_THROWS_AS(group_pairs(Pairing{{0, 99}}, topo), validation_error);
    }
}

TEST_CASE("meeting-site assignment") {
    SUBCASE("already-adjacent pairs keep their sites at zero cost") {
        const GridTopology topo(4, 0);
        const std::vector<std::pair<int, int>> pairs{{0, 1}, {2, 3}, {5, 9}};
        const SiteAssignment a = assign_meeting_sites(pairs, topo);
        CHECK(a.exact);
        CHECK(a.cost == 0);
        REQUIRE(a.sites.size() == 3);
        CHECK(a.sites[0] == std::pair{0, 1});
        CHECK(a.sites[1] == std::pair{2, 3});
        CHECK(a.sites[2] == std::pair{5, 9});
    }
    SUBCASE("same-site pair is pinned in place") {
        const GridTopology topo(2, 2);
        const SiteAssignment a = assign_meeting_sites({{0, 1}}, topo);
        CHECK(a.cost == 0);
        CHECK(a.sites[0] == std::pair{0, 0});
    }
    SUBCASE("opposite corners of a 3x3 meet after L1 - 1 moves") {
        const GridTopology topo(3, 0);
        const SiteAssignment a = assign_meeting_sites({{0, 8}}, topo);
        // brute-force oracle over every oriented adjacent site pair
        int best = std::numeric_limits<int>::max();
        for (int s = 0; s < 9; ++s)
            for (int t = 0; t < 9; ++t)
                if (topo.sites_adjacent(s, t))
                    best = std::min(best, topo.l1(0, s) + topo.l1(8, t));
        CHECK(best == topo.l1(0, 8) - 1);
        CHECK(a.cost == best);
        CHECK(topo.sites_adjacent(a.sites[0].first, a.sites[0].second));
    }
    SUBCASE("exact solver matches exhaustive enumeration on 3x3 groups") {
        const GridTopology topo(3, 2);
        SplitMix64 rng(31);
        int checked = 0;
        while (checked < 30) {
            const Pairing pairing = sample_pairing(topo, rng);
            const auto groups = group_pairs(pairing, topo);
            std::vector<std::pair<int, int>> members;
            for (int idx : groups[0]) members.push_back(pairing[(size_t)idx]);
            if (members.size() > 4) continue;
            ++checked;
            const SiteAssignment a = assign_meeting_sites_exact(members, topo);

            std::vector<std::pair<int, int>> dominoes;
            for (int s = 0; s < 9; ++s)
                for (int t = 0; t < 9; ++t)
                    if (topo.sites_adjacent(s, t)) dominoes.emplace_back(s, t);
            int best = std::numeric_limits<int>::max();
            std::vector<int> choice;
            const std::function<void(size_t, int, uint32_t)> enumerate =
                [&](size_t i, int acc, uint32_t mask) {
                    if (i == members.size()) {
                        best = std::min(best, acc);
                        return;
                    }
                    const auto& [u, v] = members[i];
                    const int su = topo.site_of(u), sv = topo.site_of(v);
                    if (su == sv) {
                        enumerate(i + 1, acc, mask);
                        return;
                    }
                    for (const auto& [t1, t2] : dominoes) {
                        const uint32_t bits = (1u << t1) | (1u << t2);
                        if (mask & bits) continue;
                        enumerate(i + 1, acc + topo.l1(su, t1) + topo.l1(sv, t2),
                                  mask | bits);
                    }
                };
            enumerate(0, 0, 0);
            CHECK(a.cost == best);
        }
    }
    SUBCASE("heuristic never beats exact, usually ties (4x4)") {
        const GridTopology topo(4, 1);
        SplitMix64 rng(90);
        int agree = 0;
        const int n_instances = 200;
        for (int i = 0; i < n_instances; ++i) {
            const Pairing pairing = sample_pairing(topo, rng);
            const auto groups = group_pairs(pairing, topo);
            std::vector<std::pair<int, int>> members;
            for (int idx : groups[0]) members.push_back(pairing[(size_t)idx]);
            const SiteAssignment ex = assign_meeting_sites_exact(members, topo);
            const SiteAssignment he = assign_meeting_sites_heuristic(members, topo);
            CHECK(ex.exact);
            CHECK_FALSE(he.exact);
            REQUIRE(he.cost >= ex.cost);
            if (he.cost == ex.cost) ++agree;
        }
        CHECK(agree >= n_instances * 9 / 10);
    }
    SUBCASE("a group larger than the lattice can host is rejected") {
        const GridTopology topo(2, 2);
        // three site-spanning pairs need six disjoint sites, grid has four
        const std::vector<std::pair<int, int>> pairs{{0, 3}, {1, 4}, {2, 5}};
        CHECK_THROWS_AS(assign_meeting_sites(pairs, topo), validation_error);
    }
}

TEST_CASE("permutation routing") {
    SUBCASE("identity needs no layers") {
        std::vector<int> perm(9);
        std::iota(perm.begin(), perm.end(), 0);
        CHECK(route_permutation(perm, 3).empty());
    }
    SUBCASE("adjacent transposition is one swap") {
        std::vector<int> perm(9);
        std::iota(perm.begin(), perm.end(), 0);
        std::swap(perm[4], perm[5]);
        const auto layers = route_permutation(perm, 3);
        REQUIRE(layers.size() == 1);
        REQUIRE(layers[0].size() == 1);
        const auto [p, q] = layers[0][0];
        CHECK(std::min(p, q) == 4);
        CHECK(std::max(p, q) == 5);
    }
    SUBCASE("invalid input rejected") {
        CHECK_THROWS_AS(route_permutation({0, 1, 2}, 2), validation_error);
        CHECK_THROWS_AS(route_permutation({0, 0, 2, 2}, 2), validation_error);
        CHECK_THROWS_AS(route_permutation({0, 1, 2, 4}, 2), validation_error);
        CHECK_THROWS_AS(route_permutation({0}, 0), validation_error);
    }
    SUBCASE("random permutations replay within 3k layers") {
        SplitMix64 rng(4242);
        for (int k = 2; k <= 6; ++k)
            for (int trial = 0; trial < 100; ++trial) {
                const auto perm = random_permutation(k * k, rng);
                check_route(perm, k, route_permutation(perm, k));
            }
    }
}

TEST_CASE("layer cost oracles") {
    SUBCASE("bare grid, all pairs adjacent: one layer of N/2 gates") {
        const GridTopology topo(4, 0);
        Pairing pairing;
        for (int s = 0; s < 16; s += 2) pairing.emplace_back(s, s + 1);
        const RoutingPlan plan = layer_cost(pairing, topo);
        CHECK(plan.n_s == 1);
        CHECK(plan.n_g == 8);
        validate_plan(plan, pairing, topo);
    }
    SUBCASE("2x2 bare grid: the three pairings average 5/3 layers") {
        const GridTopology topo(2, 0);
        const std::vector<Pairing> all{{{0, 1}, {2, 3}},
                                       {{0, 2}, {1, 3}},
                                       {{0, 3}, {1, 2}}};
        std::vector<int> ns;
        for (const auto& pairing : all) {
            const RoutingPlan plan = layer_cost(pairing, topo);
            validate_plan(plan, pairing, topo);
            ns.push_back(plan.n_s);
        }
        std::sort(ns.begin(), ns.end());
        CHECK(ns == std::vector<int>{1, 1, 3});
        CHECK((ns[0] + ns[1] + ns[2]) / 3.0 == doctest::Approx(5.0 / 3.0));
    }
}

TEST_CASE("layer cost replay over random pairings") {
    for (const auto& [k, h] :
         {std::pair{2, 0}, {2, 4}, {3, 2}, {4, 1}, {5, 0}}) {
        const GridTopology topo(k, h);
        SplitMix64 rng(9000 + (uint64_t)(10 * k + h));
        for (int trial = 0; trial < 40; ++trial) {
            const Pairing pairing = sample_pairing(topo, rng);
            const RoutingPlan plan = layer_cost(pairing, topo);
            validate_plan(plan, pairing, topo);
            CHECK(plan.n_g >= (int)pairing.size());
            CHECK(plan.n_s >= 1);
        }
    }
}

TEST_CASE("layer counts invariant under hidden-qubit relabeling") {
    const GridTopology topo(3, 2);
    SplitMix64 rng(606);
    for (int trial = 0; trial < 100; ++trial) {
        const Pairing pairing = sample_pairing(topo, rng);
        // random permutation of the hidden slots at every site
        std::vector<int> relabel((size_t)topo.qubits());
        std::iota(relabel.begin(), relabel.end(), 0);
        for (int s = 0; s < topo.sites(); ++s) {
            std::vector<int> slots;
            for (int j = 1; j <= topo.h; ++j)
                slots.push_back(topo.control_qubit(s) + j);
            for (size_t i = slots.size(); i > 1; --i)
                std::swap(slots[i - 1], slots[uniform_below(rng, i)]);
            for (int j = 1; j <= topo.h; ++j)
                relabel[(size_t)(topo.control_qubit(s) + j)] = slots[(size_t)j - 1];
        }
        Pairing mapped = pairing;
        for (auto& [u, v] : mapped) {
            u = relabel[(size_t)u];
            v = relabel[(size_t)v];
        }
        const RoutingPlan a = layer_cost(pairing, topo);
        const RoutingPlan b = layer_cost(mapped, topo);
        CHECK(a.n_s == b.n_s);
        CHECK(a.n_g == b.n_g);
        validate_plan(b, mapped, topo);
    }
}

TEST_CASE("plan validator catches tampering") {
    const GridTopology topo(2, 4);
    SplitMix64 rng(13);
    const Pairing pairing = sample_pairing(topo, rng);
    const RoutingPlan plan = layer_cost(pairing, topo);
    validate_plan(plan, pairing, topo);

    {
        RoutingPlan broken = plan;
        broken.n_g -= (int)broken.layers.back().size();
        broken.n_s -= 1;
        broken.layers.pop_back();
        CHECK_THROWS_AS(validate_plan(broken, pairing, topo), validation_error);
    }
    {
        RoutingPlan broken = plan;
        broken.n_g += 1;
        CHECK_THROWS_AS(validate_plan(broken, pairing, topo), validation_error);
    }
    {
        RoutingPlan broken = plan;
        // duplicate an op inside its layer: overlap within the layer
        broken.layers[0].push_back(broken.layers[0][0]);
        broken.n_g += 1;
        CHECK_THROWS_AS(validate_plan(broken, pairing, topo), validation_error);
    }
    {
        RoutingPlan broken = plan;
        broken.layers[0][0].b = topo.qubits() + 5;
        CHECK_THROWS_AS(validate_plan(broken, pairing, topo), validation_error);
    }
    {
        // flipping an entangle into a swap leaves a pair un-entangled
        RoutingPlan broken = plan;
        bool flipped = false;
        for (auto& layer : broken.layers)
            for (auto& op : layer)
                if (!flipped && op.kind == OpKind::entangle) {
                    op.kind = OpKind::grid_swap;
                    flipped = true;
                }
        REQUIRE(flipped);
        CHECK_THROWS_AS(validate_plan(broken, pairing, topo), validation_error);
    }
}

TEST_CASE("routing plan json") {
    const GridTopology topo(2, 1);
    SplitMix64 rng(21);
    const Pairing pairing = sample_pairing(topo, rng);
    const RoutingPlan plan = layer_cost(pairing, topo);
    const nlohmann::json j = to_json(plan);
    CHECK(j.at("n_g").get<int>() == plan.n_g);
    CHECK(j.at("n_s").get<int>() == plan.n_s);
    REQUIRE(j.at("layers").size() == plan.layers.size());
    size_t ops = 0;
    for (const auto& layer : j.at("layers")) {
        for (const auto& op : layer) {
            const std::string kind = op.at("kind").get<std::string>();
            CHECK((kind == "hidden_swap" || kind == "grid_swap" ||
                   kind == "entangle"));
            ++ops;
        }
    }
    CHECK(ops == (size_t)plan.n_g);
}

TEST_CASE("quantum volume estimator") {
    const GridTopology topo(3, 2);

    SUBCASE("parallel and serial agree exactly") {
        QvConfig cfg;
        cfg.gamma_tau = 4e-4;
        cfg.samples = 40;
        cfg.seed = 7;
        const QvEstimate a = quantum_volume(topo, cfg);
        const QvEstimate b = quantum_volume_serial(topo, cfg);
        CHECK(a.log2_vq == b.log2_vq);
        CHECK(a.d == b.d);
        CHECK(a.n_s_mean == b.n_s_mean);
        CHECK(a.n_g_mean == b.n_g_mean);
    }
    SUBCASE("deterministic in the seed") {
        QvConfig cfg;
        cfg.gamma_tau = 0.004;
        cfg.samples = 10;
        cfg.seed = 3;
        const QvEstimate a = quantum_volume(topo, cfg);
        const QvEstimate b = quantum_volume(topo, cfg);
        CHECK(a.n_s_mean == b.n_s_mean);
        CHECK(a.log2_vq == b.log2_vq);
    }
    SUBCASE("zero rate saturates at N") {
        QvConfig cfg;
        cfg.gamma_tau = 0.0;
        cfg.samples = 5;
        const QvEstimate est = quantum_volume(topo, cfg);
        CHECK(est.log2_vq == doctest::Approx((double)topo.qubits()));
        CHECK(std::isinf(est.d));
    }
    SUBCASE("monotone non-increasing in the rate; doubling halves depth") {
        QvConfig cfg;
        cfg.samples = 20;
        cfg.seed = 11;
        double prev = std::numeric_limits<double>::infinity();
        for (double rate : {4e-6, 4e-4, 0.004}) {
            cfg.gamma_tau = rate;
            const double v = quantum_volume(topo, cfg).log2_vq;
            CHECK(v <= prev);
            prev = v;
        }
        cfg.gamma_tau = 0.004;
        const QvEstimate e1 = quantum_volume(topo, cfg);
        cfg.gamma_tau = 0.008;
        const QvEstimate e2 = quantum_volume(topo, cfg);
        CHECK(e1.d == doctest::Approx(2.0 * e2.d).epsilon(1e-12));
    }
    SUBCASE("differential mode formula") {
        const GridTopology small(2, 4);
        QvConfig cfg;
        cfg.gamma_tau = 0.0;
        cfg.gamma_c_tau = 4e-6;
        cfg.samples = 30;
        cfg.seed = 5;
        const QvEstimate est = quantum_volume(small, cfg);
        const double rate = small.sites() * 4e-6;  // only control qubits decohere
        CHECK(est.d == doctest::Approx(1.0 / (rate * est.n_s_mean)).epsilon(1e-12));

        // with no hidden qubits, differential and uniform modes coincide
        const GridTopology bare(3, 0);
        QvConfig uni;
        uni.gamma_tau = 1e-3;
        uni.samples = 15;
        uni.seed = 2;
        QvConfig diff = uni;
        diff.gamma_tau = 0.0;
        diff.gamma_c_tau = 1e-3;
        CHECK(quantum_volume(bare, uni).log2_vq ==
              quantum_volume(bare, diff).log2_vq);
    }
    SUBCASE("config validation") {
        QvConfig cfg;
        cfg.samples = 0;
        CHECK_THROWS_AS(quantum_volume(topo, cfg), validation_error);
        cfg.samples = 1;
        cfg.gamma_tau = -1.0;
        CHECK_THROWS_AS(quantum_volume(topo, cfg), validation_error);
        cfg.gamma_tau = 0.0;
        cfg.epsilon = 0.0;
        CHECK_THROWS_AS(quantum_volume(topo, cfg), validation_error);
    }
    SUBCASE("odd qubit count works end to end") {
        const GridTopology odd(5, 0);
        QvConfig cfg;
        cfg.gamma_tau = 4e-4;
        cfg.samples = 10;
        const QvEstimate est = quantum_volume(odd, cfg);
        CHECK(est.n_s_mean > 0.0);
        CHECK(est.n_g_mean >= 12.0);
    }
}

TEST_CASE("qv map table and serialization") {
    const std::vector<std::pair<int, int>> grids{{2, 0}, {2, 1}, {3, 0}};
    const auto cfgs = default_presets(20, 3);
    REQUIRE(cfgs.size() == 4);
    CHECK(cfgs[0].gamma_tau == 0.004);
    CHECK(cfgs[1].gamma_tau == 4e-4);
    CHECK(cfgs[2].gamma_tau == 4e-6);
    REQUIRE(cfgs[3].gamma_c_tau.has_value());
    CHECK(*cfgs[3].gamma_c_tau == 4e-6);
    CHECK(cfgs[3].gamma_tau == 0.0);

    const auto rows = qv_map(grids, cfgs);
    REQUIRE(rows.size() == grids.size() * cfgs.size());

    SUBCASE("rows match direct estimates and the metric columns") {
        const QvEstimate direct = quantum_volume(GridTopology(2, 1), cfgs[0]);
        const QvRow& row = rows[1];
        CHECK(row.k == 2);
        CHECK(row.h == 1);
        CHECK(row.N == 8);
        CHECK(row.control_lines ==
              topology_metrics(GridTopology(2, 1)).control_lines);
        CHECK(row.gamma_tau == 0.004);
        CHECK(row.n_s_mean == direct.n_s_mean);
        CHECK(row.log2_vq == direct.log2_vq);
        // differential rows report the control-qubit rate
        CHECK(rows[3 * grids.size()].gamma_tau == 4e-6);
    }
    SUBCASE("csv header and round trip") {
        const std::string csv = qv_csv(rows);
        CHECK(csv.rfind("k,h,control_lines,N,gamma_tau,n_s_mean,n_g_mean,"
                        "log2_vq\n",
                        0) == 0);
        const auto parsed = qv_rows_from_csv(csv);
        REQUIRE(parsed.size() == rows.size());
        CHECK(qv_csv(parsed) == csv);
        for (size_t i = 0; i < rows.size(); ++i) {
            CHECK(parsed[i].k == rows[i].k);
            CHECK(parsed[i].log2_vq == rows[i].log2_vq);
            CHECK(parsed[i].n_s_mean == rows[i].n_s_mean);
        }
        // determinism: regenerating the table gives identical bytes
        CHECK(qv_csv(qv_map(grids, cfgs)) == csv);
    }
    SUBCASE("json round trip") {
        const nlohmann::json j = to_json(rows);
        const auto parsed = qv_rows_from_json(j);
        REQUIRE(parsed.size() == rows.size());
        for (size_t i = 0; i < rows.size(); ++i) {
            CHECK(parsed[i].control_lines == rows[i].control_lines);
            CHECK(parsed[i].n_g_mean == rows[i].n_g_mean);
        }
        CHECK_THROWS_AS(qv_rows_from_json(nlohmann::json{{"k", 1}}),
                        validation_error);
    }
    SUBCASE("malformed csv rejected") {
        CHECK_THROWS_AS(qv_rows_from_csv("k,h\n1,2\n"), validation_error);
        CHECK_THROWS_AS(
            qv_rows_from_csv("k,h,control_lines,N,gamma_tau,n_s_mean,n_g_mean,"
                             "log2_vq\n1,2,3\n"),
            validation_error);
        CHECK_THROWS_AS(
            qv_rows_from_csv("k,h,control_lines,N,gamma_tau,n_s_mean,n_g_mean,"
                             "log2_vq\n1,2,3,4,x,6,7,8\n"),
            validation_error);
    }
    SUBCASE("sample count changes only the sampled columns") {
        std::vector<QvConfig> one{cfgs[1]}, many{cfgs[1]};
        one[0].samples = 1;
        many[0].samples = 50;
        const auto r1 = qv_map(grids, one);
        const auto r2 = qv_map(grids, many);
        for (size_t i = 0; i < r1.size(); ++i) {
            CHECK(r1[i].k == r2[i].k);
            CHECK(r1[i].h == r2[i].h);
            CHECK(r1[i].control_lines == r2[i].control_lines);
            CHECK(r1[i].N == r2[i].N);
            CHECK(r1[i].gamma_tau == r2[i].gamma_tau);
        }
    }
}

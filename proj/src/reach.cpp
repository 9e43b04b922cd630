/** \file
 * Measurement reachability by breadth-first search over gate words.
 *
 * Clifford gate sets admit exact bookkeeping: conjugation permutes the
 * signed Pauli operators, so each BFS node is (pauli index, sign) and the
 * first word reaching an index is a shortest witness.  Non-Clifford sets
 * (sqrt(SWAP)) fall back to accumulating the real span of the conjugated
 * operators and ranking it by Gram-Schmidt.
 */
#include "hqt/reach.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <unordered_set>

#include "hqt/pauli.hpp"

namespace hqt::control {

namespace {

using Mat2 = Eigen::Matrix2cd;

Mat2 rot_x90() {
    Mat2 m;
    const double s = 1.0 / std::sqrt(2.0);
    m << cxd(s, 0), cxd(0, -s), cxd(0, -s), cxd(s, 0);
    return m;
}

Mat2 rot_y90() {
    Mat2 m;
    const double s = 1.0 / std::sqrt(2.0);
    m << cxd(s, 0), cxd(-s, 0), cxd(s, 0), cxd(s, 0);
    return m;
}

std::vector<NamedGate> build_catalog() {
    const Mat2 id2 = Mat2::Identity();
    std::vector<NamedGate> cat;
    cat.push_back({"rx90", kron(rot_x90(), id2)});
    cat.push_back({"ry90", kron(rot_y90(), id2)});
    cat.push_back({"rx90_h", kron(id2, rot_x90())});
    cat.push_back({"ry90_h", kron(id2, rot_y90())});

    CMat4 iswap = CMat4::Zero();
    iswap(0, 0) = 1.0;
    iswap(3, 3) = 1.0;
    iswap(1, 2) = cxd(0, 1);
    iswap(2, 1) = cxd(0, 1);
    cat.push_back({"iswap", iswap});

    CMat4 cphase = CMat4::Identity();
    cphase(3, 3) = -1.0;
    cat.push_back({"cphase", cphase});

    CMat4 swap = CMat4::Zero();
    swap(0, 0) = 1.0;
    swap(3, 3) = 1.0;
    swap(1, 2) = 1.0;
    swap(2, 1) = 1.0;
    cat.push_back({"swap", swap});

    CMat4 sqrt_swap = CMat4::Zero();
    sqrt_swap(0, 0) = 1.0;
    sqrt_swap(3, 3) = 1.0;
    sqrt_swap(1, 1) = cxd(0.5, 0.5);
    sqrt_swap(2, 2) = cxd(0.5, 0.5);
    sqrt_swap(1, 2) = cxd(0.5, -0.5);
    sqrt_swap(2, 1) = cxd(0.5, -0.5);
    cat.push_back({"sqrt_swap", sqrt_swap});
    return cat;
}

struct CliffordTable {
    std::array<int, 16> perm{};
    std::array<int, 16> sign{};
};

/// Derive the signed-Pauli action of g^dag P_j g; empty if not Clifford.
bool derive_clifford(const CMat4& u, CliffordTable& out, double tol) {
    for (int j = 0; j < 16; ++j) {
        CMat4 a = u.adjoint() * pauli2(j) * u;
        bool found = false;
        for (int k = 0; k < 16 && !found; ++k) {
            cxd overlap = (pauli2(k) * a).trace() / 4.0;
            if (std::abs(std::abs(overlap) - 1.0) > tol) continue;
            if (std::abs(overlap.imag()) > tol) return false;
            if ((a - overlap.real() * pauli2(k)).norm() > tol) return false;
            out.perm[static_cast<size_t>(j)] = k;
            out.sign[static_cast<size_t>(j)] = overlap.real() > 0 ? 1 : -1;
            found = true;
        }
        if (!found) return false;
    }
    return true;
}

using Vec16 = Eigen::Matrix<double, 16, 1>;

Vec16 coords16(const CMat4& a) {
    Vec16 c;
    for (int k = 0; k < 16; ++k) c(k) = (pauli2(k) * a).trace().real();
    return c;
}

/// Canonical key of a unitary modulo global phase, for frontier dedup.
std::string phase_free_key(CMat4 u) {
    int br = 0, bc = 0;
    double best = 0.0;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            if (std::abs(u(r, c)) > best) {
                best = std::abs(u(r, c));
                br = r;
                bc = c;
            }
    u *= std::conj(u(br, bc)) / best;
    std::string key;
    key.reserve(16 * 16);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            auto re = static_cast<int64_t>(std::llround(u(r, c).real() * 1e6));
            auto im = static_cast<int64_t>(std::llround(u(r, c).imag() * 1e6));
            key += std::to_string(re) + "," + std::to_string(im) + ";";
        }
    return key;
}

std::vector<int> checked_natives(const std::vector<int>& native) {
    if (native.empty())
        throw validation_error("measurement_reachability: empty native list");
    std::vector<int> out;
    for (int m : native) {
        if (m < 0 || m > 15)
            throw validation_error(
                "measurement_reachability: native index out of range");
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    return out;
}

void fill_labels(ReachabilityReport& rep, const std::vector<bool>& in_span) {
    for (int j = 0; j < 16; ++j) {
        if (in_span[static_cast<size_t>(j)])
            rep.reachable.insert(pauli_label(j));
        else
            rep.unreachable.insert(pauli_label(j));
    }
}

ReachabilityReport clifford_search(const std::vector<NamedGate>& gates,
                                   const std::vector<CliffordTable>& tables,
                                   const std::vector<int>& native,
                                   const ReachabilityOptions& opt) {
    ReachabilityReport rep;
    rep.clifford_path = true;
    std::vector<bool> reached(16, false);

    struct Node {
        int pauli;
        int sign;
        std::vector<std::string> word;
    };
    for (int m : native) {
        std::vector<bool> visited(32, false);
        std::deque<Node> queue;
        queue.push_back({m, 1, {}});
        visited[static_cast<size_t>(m)] = true;
        while (!queue.empty()) {
            Node n = std::move(queue.front());
            queue.pop_front();
            reached[static_cast<size_t>(n.pauli)] = true;
            const std::string label = pauli_label(n.pauli);
            auto it = rep.witness_sequences.find(label);
            if (it == rep.witness_sequences.end() ||
                n.word.size() < it->second.word.size())
                rep.witness_sequences[label] = {n.pauli, n.sign, n.word};
            if (static_cast<int>(n.word.size()) >= opt.max_depth) continue;
            for (size_t g = 0; g < gates.size(); ++g) {
                const auto& t = tables[g];
                int p2 = t.perm[static_cast<size_t>(n.pauli)];
                int s2 = n.sign * t.sign[static_cast<size_t>(n.pauli)];
                size_t state = static_cast<size_t>(p2) + (s2 < 0 ? 16 : 0);
                if (visited[state]) continue;
                visited[state] = true;
                Node nxt{p2, s2, n.word};
                nxt.word.push_back(gates[g].name);
                queue.push_back(std::move(nxt));
            }
        }
    }
    rep.span_dimension =
        static_cast<int>(std::count(reached.begin(), reached.end(), true));
    fill_labels(rep, reached);
    return rep;
}

ReachabilityReport span_search(const std::vector<NamedGate>& gates,
                               const std::vector<int>& native,
                               const ReachabilityOptions& opt) {
    ReachabilityReport rep;
    std::vector<Vec16> basis;
    auto try_add = [&](Vec16 v) {
        double n = v.norm();
        if (n < 1e-14) return;
        v /= n;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) v -= b.dot(v) * b;
        if (v.norm() > opt.threshold) basis.push_back(v.normalized());
    };
    auto absorb = [&](const CMat4& u) {
        for (int m : native) try_add(coords16(u.adjoint() * pauli2(m) * u));
    };

    std::unordered_set<std::string> seen;
    std::vector<CMat4> frontier{CMat4::Identity()};
    seen.insert(phase_free_key(frontier.front()));
    absorb(frontier.front());
    for (int depth = 1; depth <= opt.max_depth && basis.size() < 16; ++depth) {
        std::vector<CMat4> next;
        for (const auto& u : frontier) {
            for (const auto& g : gates) {
                CMat4 u2 = u * g.u;
                if (!seen.insert(phase_free_key(u2)).second) continue;
                absorb(u2);
                next.push_back(std::move(u2));
            }
            if (basis.size() >= 16) break;
        }
        frontier = std::move(next);
    }

    rep.span_dimension = static_cast<int>(basis.size());
    std::vector<bool> in_span(16, false);
    for (int j = 0; j < 16; ++j) {
        Vec16 v = Vec16::Zero();
        v(j) = 1.0;
        for (const auto& b : basis) v -= b.dot(v) * b;
        in_span[static_cast<size_t>(j)] = v.norm() < 1e-7;
    }
    fill_labels(rep, in_span);
    return rep;
}

}  // namespace

const NamedGate& gate_by_name(const std::string& name) {
    static const std::vector<NamedGate> catalog = build_catalog();
    for (const auto& g : catalog)
        if (g.name == name) return g;
    throw validation_error("gate_by_name: unknown gate '" + name + "'");
}

ReachabilityReport measurement_reachability(const std::vector<NamedGate>& gates,
                                            const std::vector<int>& native,
                                            const ReachabilityOptions& opt) {
    if (opt.max_depth < 0)
        throw validation_error("measurement_reachability: negative max_depth");
    const std::vector<int> nat = checked_natives(native);

    if (!opt.force_span_path) {
        std::vector<CliffordTable> tables(gates.size());
        bool all_clifford = true;
        for (size_t g = 0; g < gates.size() && all_clifford; ++g)
            all_clifford = derive_clifford(gates[g].u, tables[g], opt.threshold);
        if (all_clifford) return clifford_search(gates, tables, nat, opt);
    }
    return span_search(gates, nat, opt);
}

bool verify_sqrt_swap_completeness() {
    const std::vector<int> native{0, 12};
    auto set_for = [](std::initializer_list<const char*> names) {
        std::vector<NamedGate> gates;
        for (const char* n : names) gates.push_back(gate_by_name(n));
        return gates;
    };
    bool ok = measurement_reachability(
                  set_for({"rx90", "ry90", "sqrt_swap"}), native)
                  .span_dimension == 16;
    const char* pairs[3][2] = {
        {"cphase", "iswap"}, {"cphase", "swap"}, {"iswap", "swap"}};
    for (const auto& p : pairs)
        ok = ok && measurement_reachability(
                       set_for({"rx90", "ry90", p[0], p[1]}), native)
                           .span_dimension == 16;
    return ok;
}

}  // namespace hqt::control

/** \file
 * Lie-algebra closure by repeated commutators in Pauli coordinates.
 */
#include "hqt/lie.hpp"

#include <array>

#include "hqt/pauli.hpp"

namespace hqt::control {

namespace {

constexpr double kRankThreshold = 1e-9;

using Vec15 = Eigen::Matrix<double, 15, 1>;

Vec15 coords15(const CMat4& a) {
    Vec15 c;
    for (int k = 1; k < 16; ++k) c(k - 1) = (pauli2(k) * a).trace().real();
    return c;
}

// Structure table: i[P_a, P_b] = alpha * P_k with alpha in {-2, 0, 2}.
struct Bracket {
    int k = 0;
    double alpha = 0.0;
};

const std::array<std::array<Bracket, 15>, 15>& bracket_table() {
    static const auto table = [] {
        std::array<std::array<Bracket, 15>, 15> t{};
        for (int a = 1; a < 16; ++a)
            for (int b = 1; b < 16; ++b) {
                CMat4 c = cxd(0, 1) *
                          (pauli2(a) * pauli2(b) - pauli2(b) * pauli2(a));
                Bracket& e = t[static_cast<size_t>(a - 1)][static_cast<size_t>(b - 1)];
                if (c.norm() < 1e-12) continue;
                for (int k = 1; k < 16; ++k) {
                    double overlap = (pauli2(k) * c).trace().real() / 4.0;
                    if (std::abs(overlap) > 1e-9) {
                        e.k = k;
                        e.alpha = overlap;
                        break;
                    }
                }
            }
        return t;
    }();
    return table;
}

Vec15 bracket(const Vec15& u, const Vec15& v) {
    const auto& t = bracket_table();
    Vec15 w = Vec15::Zero();
    for (int a = 1; a < 16; ++a) {
        if (u(a - 1) == 0.0) continue;
        for (int b = 1; b < 16; ++b) {
            const Bracket& e = t[static_cast<size_t>(a - 1)][static_cast<size_t>(b - 1)];
            if (e.alpha != 0.0) w(e.k - 1) += u(a - 1) * v(b - 1) * e.alpha;
        }
    }
    return w;
}

void validate(const HermitianGenerator& g) {
    if ((g.matrix - g.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw validation_error("lie_closure: generator '" + g.label +
                               "' is not Hermitian");
    if (std::abs(g.matrix.trace()) > 1e-12)
        throw validation_error("lie_closure: generator '" + g.label +
                               "' is not traceless");
}

}  // namespace

ClosureResult lie_closure(const std::vector<HermitianGenerator>& generators,
                          int max_dim) {
    if (max_dim < 0 || max_dim > 15)
        throw validation_error("lie_closure: max_dim must be in 0..15");
    for (const auto& g : generators) validate(g);

    std::vector<Vec15> basis;
    auto try_add = [&](Vec15 v) {
        if (static_cast<int>(basis.size()) >= max_dim) return;
        double n = v.norm();
        if (n < 1e-14) return;
        v /= n;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) v -= b.dot(v) * b;
        if (v.norm() > kRankThreshold) basis.push_back(v.normalized());
    };

    for (const auto& g : generators) try_add(coords15(g.matrix));
    // The basis grows while we iterate; new elements get bracketed with
    // every earlier one, which exhausts all pairs.
    for (size_t i = 0; i < basis.size(); ++i)
        for (size_t j = 0; j < i; ++j) {
            if (static_cast<int>(basis.size()) >= max_dim) break;
            try_add(bracket(basis[i], basis[j]));
        }

    ClosureResult res;
    res.dimension = static_cast<int>(basis.size());
    for (size_t i = 0; i < basis.size(); ++i) {
        PtmVec c = PtmVec::Zero();
        // Unit Frobenius norm: ||H||_F = ||c||/2 for H = (1/4) sum c_k P_k.
        for (int k = 1; k < 16; ++k) c(k) = 2.0 * basis[i](k - 1);
        res.basis.push_back(
            {from_pauli_coords(c), "closure_" + std::to_string(i)});
    }
    return res;
}

bool is_fully_controllable(const std::vector<HermitianGenerator>& generators) {
    return lie_closure(generators).dimension == 15;
}

std::vector<HermitianGenerator> single_qubit_generators(bool include_hidden) {
    std::vector<HermitianGenerator> gens;
    const char* names = "XYZ";
    for (int i = 1; i <= 3; ++i)
        gens.push_back({pauli2(4 * i), std::string{names[i - 1]} + "1"});
    if (include_hidden)
        for (int i = 1; i <= 3; ++i)
            gens.push_back({pauli2(i), std::string{"1"} + names[i - 1]});
    return gens;
}

HermitianGenerator coupling_zz() { return {pauli2(15), "ZZ"}; }

HermitianGenerator coupling_xxyy() {
    return {CMat4(pauli2(5) + pauli2(10)), "XX+YY"};
}

HermitianGenerator coupling_xxyyzz() {
    return {CMat4(pauli2(5) + pauli2(10) + pauli2(15)), "XX+YY+ZZ"};
}

}  // namespace hqt::control

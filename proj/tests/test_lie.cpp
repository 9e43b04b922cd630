#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "hqt/lie.hpp"
#include "hqt/pauli.hpp"

using namespace hqt;
using namespace hqt::control;

namespace {

// Independent closure oracle: enumerate left-normed nested commutators
// i[g, [g', [...]]] at the operator level and take the SVD rank of their
// Pauli coordinates.  By the Jacobi identity the left-normed brackets span
// the generated algebra.
int closure_rank_oracle(const std::vector<CMat4>& gens, int max_depth = 8) {
    std::vector<CMat4> level = gens;
    std::vector<Eigen::VectorXd> rows;
    auto coords15 = [](const CMat4& a) {
        Eigen::VectorXd c(15);
        for (int k = 1; k < 16; ++k) c(k - 1) = (pauli2(k) * a).trace().real();
        return c;
    };
    auto rank_of = [&]() {
        if (rows.empty()) return 0;
        Eigen::MatrixXd m(static_cast<int>(rows.size()), 15);
        for (size_t i = 0; i < rows.size(); ++i) m.row(static_cast<int>(i)) = rows[i];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        double top = svd.singularValues()(0);
        int r = 0;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > 1e-7 * top) ++r;
        return r;
    };
    for (const auto& g : gens) rows.push_back(coords15(g).normalized());
    int rank = rank_of();
    for (int depth = 1; depth < max_depth; ++depth) {
        std::vector<CMat4> next;
        for (const auto& w : level)
            for (const auto& g : gens) {
                CMat4 c = cxd(0, 1) * (g * w - w * g);
                double n = c.norm();
                if (n < 1e-12) continue;
                next.push_back(c / n);
                rows.push_back(coords15(c).normalized());
            }
        int r = rank_of();
        if (r == rank || r == 15) return r;
        rank = r;
        level = std::move(next);
    }
    return rank;
}

std::vector<CMat4> matrices(const std::vector<HermitianGenerator>& gens) {
    std::vector<CMat4> out;
    for (const auto& g : gens) out.push_back(g.matrix);
    return out;
}

std::vector<HermitianGenerator> with(std::vector<HermitianGenerator> base,
                                     const HermitianGenerator& extra) {
    base.push_back(extra);
    return base;
}

}  // namespace

TEST_CASE("single-qubit generators on both qubits plus ZZ close on su(4)") {
    auto gens = with(single_qubit_generators(true), coupling_zz());
    auto res = lie_closure(gens);
    CHECK(res.dimension == 15);
    CHECK(res.basis.size() == 15);
    CHECK(closure_rank_oracle(matrices(gens)) == 15);
}

TEST_CASE("hidden qubit with cPHASE-type coupling only does not close on su(4)") {
    auto gens = with(single_qubit_generators(false), coupling_zz());
    auto res = lie_closure(gens);
    CHECK(res.dimension < 15);
    CHECK(res.dimension == closure_rank_oracle(matrices(gens)));
    // The closed algebra is spanned by sigma_i (x) 1 and sigma_i (x) sigma_z,
    // i.e. Pauli indices {4,8,12} and {7,11,15}: dimension 6.
    CHECK(res.dimension == 6);
    for (const auto& b : res.basis) {
        PtmVec c = pauli_coords(b.matrix);
        for (int k = 1; k < 16; ++k) {
            bool allowed = (k % 4 == 0) || (k % 4 == 3);
            if (!allowed) CHECK(std::abs(c(k)) < 1e-9);
        }
    }
}

TEST_CASE("hidden qubit with iSWAP-type coupling only does not close on su(4)") {
    auto gens = with(single_qubit_generators(false), coupling_xxyy());
    auto res = lie_closure(gens);
    CHECK(res.dimension < 15);
    CHECK(res.dimension == closure_rank_oracle(matrices(gens)));
}

TEST_CASE("hidden qubit with SWAP-type (Heisenberg) coupling is universal") {
    auto gens = with(single_qubit_generators(false), coupling_xxyyzz());
    auto res = lie_closure(gens);
    CHECK(res.dimension == 15);
    CHECK(closure_rank_oracle(matrices(gens)) == 15);
}

TEST_CASE("is_fully_controllable claim battery") {
    auto hidden = single_qubit_generators(false);
    CHECK_FALSE(is_fully_controllable(with(hidden, coupling_zz())));
    CHECK_FALSE(is_fully_controllable(with(hidden, coupling_xxyy())));
    CHECK(is_fully_controllable(
        with(with(hidden, coupling_zz()), coupling_xxyy())));
    CHECK(is_fully_controllable(with(single_qubit_generators(true), coupling_zz())));
}

TEST_CASE("closure dimension is invariant under generator recombination") {
    auto gens = with(with(single_qubit_generators(false), coupling_zz()),
                     coupling_xxyy());
    int ref = lie_closure(gens).dimension;
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g;
    int n = static_cast<int>(gens.size());
    for (int rep = 0; rep < 5; ++rep) {
        // Random invertible real recombination of the generator list.
        Eigen::MatrixXd a(n, n);
        do {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) a(i, j) = g(rng);
        } while (std::abs(a.determinant()) < 1e-3);
        std::vector<HermitianGenerator> mixed;
        for (int i = 0; i < n; ++i) {
            CMat4 m = CMat4::Zero();
            for (int j = 0; j < n; ++j) m += a(i, j) * gens[static_cast<size_t>(j)].matrix;
            mixed.push_back({m, "mix"});
        }
        CHECK(lie_closure(mixed).dimension == ref);
    }
}

TEST_CASE("degenerate generators are deduplicated, not errors") {
    auto gens = single_qubit_generators(false);
    gens.push_back(gens[0]);  // duplicate sigma_x (x) 1
    CHECK(lie_closure(gens).dimension == 3);
}

TEST_CASE("max_dim caps the reported growth") {
    auto gens = with(single_qubit_generators(true), coupling_zz());
    auto res = lie_closure(gens, 7);
    CHECK(res.dimension <= 7);
}

TEST_CASE("invalid generators are rejected") {
    CMat4 nonherm = CMat4::Zero();
    nonherm(0, 1) = 1.0;  // not Hermitian
    CHECK_THROWS_AS(lie_closure({{nonherm, "bad"}}), validation_error);
    CMat4 traceful = CMat4::Identity();
    CHECK_THROWS_AS(lie_closure({{traceful, "id"}}), validation_error);
}

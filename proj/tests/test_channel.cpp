#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hqt/channel.hpp"
#include "test_util.hpp"

using namespace hqt;
using namespace hqt::channel;
using testutil::brute_ptm;
using testutil::haar_state;
using testutil::haar_unitary4;
using testutil::kraus_ptm;
using testutil::make_rng;
using testutil::random_kraus;

namespace {

const CMat4 kIswap = [] {
    CMat4 u = CMat4::Zero();
    u(0, 0) = 1.0;
    u(2, 1) = cxd(0, 1);  // |01> -> i|10>
    u(1, 2) = cxd(0, 1);  // |10> -> i|01>
    u(3, 3) = 1.0;
    return u;
}();

const CMat4 kCphase = [] {
    CMat4 u = CMat4::Identity();
    u(3, 3) = -1.0;
    return u;
}();

// Amplitude damping on the control qubit, identity on the hidden one.
std::vector<CMat4> amp_damp_kraus(double gamma) {
    Eigen::Matrix2cd k0 = Eigen::Matrix2cd::Zero(), k1 = Eigen::Matrix2cd::Zero();
    k0(0, 0) = 1.0;
    k0(1, 1) = std::sqrt(1.0 - gamma);
    k1(0, 1) = std::sqrt(gamma);
    Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    return {CMat4(kron(k0, id)), CMat4(kron(k1, id))};
}

Ptm depolarizing_ptm(double p) {
    // Lambda(rho) = p rho + (1-p) I/4; PTM diag(1, p, ..., p).
    Ptm r = Ptm::Identity() * p;
    r(0, 0) = 1.0;
    return r;
}

// Partial trace of a 16x16 Choi matrix over the (first) output factor,
// written with explicit index loops to stay independent of library code.
Eigen::Matrix4cd trace_out(const CMat& c) {
    Eigen::Matrix4cd t = Eigen::Matrix4cd::Zero();
    for (int b = 0; b < 4; ++b)
        for (int d = 0; d < 4; ++d)
            for (int a = 0; a < 4; ++a) t(b, d) += c(4 * a + b, 4 * a + d);
    return t;
}

}  // namespace

TEST_CASE("ptm of the identity channel is the identity matrix") {
    CHECK((ptm_from_unitary(CMat4::Identity()) - Ptm::Identity()).norm() < 1e-13);
}

TEST_CASE("ptm entries match the defining trace formula") {
    auto rng = make_rng(11);
    for (int rep = 0; rep < 5; ++rep) {
        CMat4 u = haar_unitary4(rng);
        CHECK((ptm_from_unitary(u) - brute_ptm(u)).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK((ptm_from_unitary(kCphase) - brute_ptm(kCphase)).cwiseAbs().maxCoeff() <
          1e-13);
}

TEST_CASE("iswap conjugation swaps Z components and entangles X components") {
    Ptm r = ptm_from_unitary(kIswap);
    // Hand-derived mappings: Z(x)1 <-> 1(x)Z, X(x)1 -> Z(x)Y, 1(x)X -> Y(x)Z.
    CHECK(r(3, 12) == doctest::Approx(1.0));   // column ZI -> row IZ
    CHECK(r(12, 3) == doctest::Approx(1.0));   // column IZ -> row ZI
    CHECK(r(14, 4) == doctest::Approx(1.0));   // column XI -> row ZY
    CHECK(r(11, 1) == doctest::Approx(1.0));   // column IX -> row YZ
    CHECK(r.col(12).cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("cphase conjugation: known entries") {
    Ptm r = ptm_from_unitary(kCphase);
    CHECK(r(7, 4) == doctest::Approx(1.0));    // X(x)1 -> X(x)Z
    CHECK(r(13, 1) == doctest::Approx(1.0));   // 1(x)X -> Z(x)X
    CHECK(r(12, 12) == doctest::Approx(1.0));  // Z(x)1 fixed
    CHECK(r(10, 5) == doctest::Approx(1.0));   // X(x)X -> Y(x)Y
}

TEST_CASE("unitary channel ptm is orthogonal and TP/unital") {
    auto rng = make_rng(12);
    for (int rep = 0; rep < 5; ++rep) {
        Ptm r = ptm_from_unitary(haar_unitary4(rng));
        CHECK((r.transpose() * r - Ptm::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        for (int j = 1; j < 16; ++j) {
            CHECK(std::abs(r(0, j)) < 1e-13);
            CHECK(std::abs(r(j, 0)) < 1e-13);
        }
        CHECK(r(0, 0) == doctest::Approx(1.0));
    }
}

TEST_CASE("global phase of the unitary does not change the ptm") {
    auto rng = make_rng(13);
    CMat4 u = haar_unitary4(rng);
    CMat4 v = u * std::exp(cxd(0, 0.7312));
    CHECK((ptm_from_unitary(u) - ptm_from_unitary(v)).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("choi of the identity channel is the maximally entangled projector") {
    CMat c = ptm_to_choi(Ptm::Identity());
    Eigen::VectorXcd omega = Eigen::VectorXcd::Zero(16);
    for (int i = 0; i < 4; ++i) omega(4 * i + i) = 0.5;
    CMat expect = omega * omega.adjoint();
    CHECK((c - expect).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::SelfAdjointEigenSolver<CMat> es(c);
    CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(1.0));
    CHECK(std::abs(c.trace().real() - 1.0) < 1e-14);
}

TEST_CASE("choi of the fully depolarizing channel is I/16") {
    CMat c = ptm_to_choi(depolarizing_ptm(0.0));
    CHECK((c - CMat::Identity(16, 16) / 16.0).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("choi of a random channel is PSD with Tr_out = I/4") {
    auto rng = make_rng(14);
    for (int rep = 0; rep < 5; ++rep) {
        Ptm r = kraus_ptm(random_kraus(rng));
        CMat c = ptm_to_choi(r);
        CHECK((c - c.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<CMat> es(c);
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
        CHECK((trace_out(c) - Eigen::Matrix4cd::Identity() / 4.0)
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
    }
}

TEST_CASE("ptm -> choi -> ptm roundtrip is exact for arbitrary matrices") {
    auto rng = make_rng(15);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 20; ++rep) {
        Ptm r;
        for (int i = 0; i < 16; ++i)
            for (int j = 0; j < 16; ++j) r(i, j) = g(rng);
        CHECK((choi_to_ptm(ptm_to_choi(r)) - r).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("cptp channels have entries in [-1, 1]") {
    auto rng = make_rng(16);
    for (int rep = 0; rep < 5; ++rep) {
        Ptm r = kraus_ptm(random_kraus(rng));
        CHECK(r.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
        CHECK(is_cptp(r));
    }
}

TEST_CASE("project_cptp leaves an amplitude damping channel unchanged") {
    Ptm r = kraus_ptm(amp_damp_kraus(0.3));
    CptpReport rep;
    Ptm p = project_cptp(r, {}, &rep);
    CHECK((p - r).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(rep.min_eigenvalue > -1e-7);
    CHECK(rep.tp_residual < 1e-7);
}

TEST_CASE("project_cptp is idempotent") {
    auto rng = make_rng(17);
    std::normal_distribution<double> g;
    Ptm r = kraus_ptm(random_kraus(rng));
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) r(i, j) += 0.05 * g(rng);
    Ptm p1 = project_cptp(r);
    Ptm p2 = project_cptp(p1);
    CHECK((p2 - p1).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(is_cptp(p1, 1e-6));
}

TEST_CASE("project_cptp clips a slightly non-CP depolarizing-like map") {
    // p > 1 makes the smallest Choi eigenvalue -(p-1)/16 < 0.
    Ptm bad = depolarizing_ptm(1.02);
    Ptm good = project_cptp(bad);
    CHECK(is_cptp(good, 1e-6));
    // The projection cannot be farther than the feasible point p = 1.
    CHECK((good - bad).norm() <= (depolarizing_ptm(1.0) - bad).norm() + 1e-9);
}

TEST_CASE("project_cptp restores a broken TP row") {
    Ptm r = ptm_from_unitary(kIswap);
    r(0, 5) = 0.2;
    r(0, 0) = 0.9;
    Ptm p = project_cptp(r);
    CHECK(p(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    for (int j = 1; j < 16; ++j) CHECK(std::abs(p(0, j)) < 1e-6);
}

TEST_CASE("average fidelity of a channel with itself is 1") {
    auto rng = make_rng(18);
    Ptm r = ptm_from_unitary(haar_unitary4(rng));
    CHECK(average_fidelity(r, r) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("average fidelity of a small ZZ rotation follows the analytic value") {
    double eps = 0.01;
    CMat4 zz = pauli2(15);
    // exp(-i eps ZZ/2) = cos(eps/2) 1 - i sin(eps/2) ZZ since ZZ^2 = 1.
    CMat4 u = std::cos(eps / 2) * CMat4::Identity() -
              cxd(0, std::sin(eps / 2)) * zz;
    double f = average_fidelity(Ptm::Identity(), ptm_from_unitary(u));
    // |Tr U|^2/16 = cos^2(eps/2) for exp(-i eps ZZ/2).
    double expect = (4.0 * std::cos(eps / 2) * std::cos(eps / 2) + 1.0) / 5.0;
    CHECK(f == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("unitary-vs-unitary fidelity matches |Tr U^dag V|^2 / 16") {
    auto rng = make_rng(19);
    for (int rep = 0; rep < 5; ++rep) {
        CMat4 u = haar_unitary4(rng), v = haar_unitary4(rng);
        double fpro = std::norm((u.adjoint() * v).trace()) / 16.0;
        double f = average_fidelity(ptm_from_unitary(u), ptm_from_unitary(v));
        CHECK(f == doctest::Approx((4 * fpro + 1) / 5).epsilon(1e-10));
    }
}

TEST_CASE("average fidelity of the depolarizing channel, with Haar MC oracle") {
    Ptm dep = depolarizing_ptm(0.0);
    CHECK(average_fidelity(Ptm::Identity(), dep) == doctest::Approx(0.25));

    // Monte-Carlo over Haar states: mean of <psi|Lambda(|psi><psi|)|psi>.
    auto rng = make_rng(20);
    int n = 100000;
    double sum = 0, sumsq = 0;
    for (int k = 0; k < n; ++k) {
        auto psi = haar_state(4, rng);
        CMat4 rho = psi * psi.adjoint();
        CMat4 out = apply_channel(dep, rho);
        double f = (psi.adjoint() * out * psi)(0, 0).real();
        sum += f;
        sumsq += f * f;
    }
    double mean = sum / n;
    double sd = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(mean - 0.25) < 3 * sd + 1e-6);
}

TEST_CASE("MC Haar fidelity agrees with average_fidelity for a noisy channel") {
    auto rng = make_rng(21);
    auto ks = random_kraus(rng);
    Ptm r = kraus_ptm(ks);
    CMat4 u = haar_unitary4(rng);
    Ptm ideal = ptm_from_unitary(u);
    double f = average_fidelity(ideal, r);

    int n = 100000;
    double sum = 0, sumsq = 0;
    for (int k = 0; k < n; ++k) {
        auto psi = haar_state(4, rng);
        CMat4 out = apply_channel(r, CMat4(psi * psi.adjoint()));
        Eigen::VectorXcd phi = u * psi;
        double v = (phi.adjoint() * out * phi)(0, 0).real();
        sum += v;
        sumsq += v * v;
    }
    double mean = sum / n;
    double sd = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(mean - f) < 3 * sd + 1e-6);
}

TEST_CASE("compose is the matrix product and a channel homomorphism") {
    auto rng = make_rng(22);
    CMat4 u = haar_unitary4(rng), v = haar_unitary4(rng);
    Ptm ru = ptm_from_unitary(u), rv = ptm_from_unitary(v);
    CHECK((compose(ru, rv) - ptm_from_unitary(CMat4(u * v))).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK((compose(ru, Ptm::Identity()) - ru).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((compose(ru, ptm_from_unitary(CMat4(u.adjoint()))) - Ptm::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("composition of CPTP maps stays CPTP") {
    auto rng = make_rng(23);
    for (int rep = 0; rep < 3; ++rep) {
        Ptm a = kraus_ptm(random_kraus(rng));
        Ptm b = kraus_ptm(random_kraus(rng));
        CHECK(is_cptp(compose(a, b), 1e-8));
    }
}

TEST_CASE("apply_channel reproduces unitary conjugation and preserves trace") {
    auto rng = make_rng(24);
    CMat4 u = haar_unitary4(rng);
    CMat4 rho = testutil::random_density(rng);
    CMat4 out = apply_channel(ptm_from_unitary(u), rho);
    CHECK((out - u * rho * u.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    auto ks = random_kraus(rng);
    CMat4 out2 = apply_channel(kraus_ptm(ks), rho);
    CHECK(std::abs(out2.trace().real() - 1.0) < 1e-11);
    CHECK((out2 - out2.adjoint()).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("hidden z rotation ptm: structure and periodicity") {
    CHECK((hidden_z_ptm(0.0) - Ptm::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    Ptm g = hidden_z_ptm(0.4321);
    CHECK((g.transpose() * g - Ptm::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    // Only hidden-qubit X/Y components rotate; Z(x)* and *(x)Z are fixed.
    CHECK(g(12, 12) == doctest::Approx(1.0));
    CHECK(g(3, 3) == doctest::Approx(1.0));
    CHECK(g(15, 15) == doctest::Approx(1.0));
    CHECK((hidden_z_ptm(2 * pi) - Ptm::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

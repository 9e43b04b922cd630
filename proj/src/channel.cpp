/** \file
 * PTM/Choi conversions, the CPTP projection, fidelities.
 */
#include "hqt/channel.hpp"

#include <array>
#include <sstream>

namespace hqt::channel {

namespace {

// Cached basis matrices P_i (x) P_j^T used by the PTM <-> Choi bijection.
// They are orthogonal under the Frobenius inner product with norm^2 = 16.
const std::array<CMat, 256>& choi_basis() {
    static const std::array<CMat, 256> basis = [] {
        std::array<CMat, 256> k;
        for (int i = 0; i < 16; ++i)
            for (int j = 0; j < 16; ++j)
                k[static_cast<size_t>(16 * i + j)] =
                    kron(pauli2(i), CMat(pauli2(j).transpose()));
        return k;
    }();
    return basis;
}

// Partial trace over the channel-output (first) tensor factor.
Eigen::Matrix4cd trace_out(const CMat& c) {
    Eigen::Matrix4cd t = Eigen::Matrix4cd::Zero();
    for (int a = 0; a < 4; ++a)
        t += c.block(4 * a, 4 * a, 4, 4);
    return t;
}

// Projection onto the TP affine subspace {C : Tr_out C = I/4} in Choi space.
CMat project_tp(const CMat& c) {
    Eigen::Matrix4cd delta =
        trace_out(c) - Eigen::Matrix4cd::Identity() / 4.0;
    CMat out = c;
    for (int a = 0; a < 4; ++a)
        out.block(4 * a, 4 * a, 4, 4) -= delta / 4.0;
    return out;
}

// Projection onto the PSD cone (Hermitian part, eigenvalues clipped at 0).
CMat project_psd(const CMat& c, double* min_eig = nullptr) {
    CMat h = 0.5 * (c + c.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    Eigen::VectorXd ev = es.eigenvalues();
    if (min_eig) *min_eig = ev.minCoeff();
    Eigen::VectorXd clipped = ev.cwiseMax(0.0);
    return es.eigenvectors() * clipped.asDiagonal() *
           es.eigenvectors().adjoint();
}

}  // namespace

Ptm ptm_from_unitary(const CMat4& u) {
    Ptm r;
    const CMat4 ud = u.adjoint();
    for (int j = 0; j < 16; ++j) {
        CMat4 a = u * pauli2(j) * ud;
        r.col(j) = pauli_coords(a) / 4.0;
    }
    return r;
}

CMat ptm_to_choi(const Ptm& r) {
    const auto& basis = choi_basis();
    CMat c = CMat::Zero(16, 16);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            c += (r(i, j) / 16.0) * basis[static_cast<size_t>(16 * i + j)];
    return c;
}

Ptm choi_to_ptm(const CMat& c) {
    if (c.rows() != 16 || c.cols() != 16)
        throw validation_error("choi_to_ptm: expected a 16x16 matrix");
    const auto& basis = choi_basis();
    Ptm r;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            // Tr[(P_i (x) P_j^T) C], the basis matrices are Hermitian.
            const CMat& b = basis[static_cast<size_t>(16 * i + j)];
            r(i, j) = b.cwiseProduct(c.transpose()).sum().real();
        }
    return r;
}

Ptm project_cptp(const Ptm& r, const CptpOptions& opt, CptpReport* report) {
    CMat x = ptm_to_choi(r);
    x = 0.5 * (x + x.adjoint());
    CMat p = CMat::Zero(16, 16), q = CMat::Zero(16, 16);
    double change = 0.0;
    int it = 0;
    for (; it < opt.max_iters; ++it) {
        CMat y = project_psd(x + p);
        p = x + p - y;
        CMat xn = project_tp(y + q);
        q = y + q - xn;
        change = (xn - x).norm();
        x = xn;
        if (change < opt.tol) break;
    }
    if (it == opt.max_iters) {
        std::ostringstream msg;
        msg << "project_cptp: no convergence after " << opt.max_iters
            << " iterations, last change " << change;
        throw numeric_error(msg.str());
    }
    if (report) {
        double min_eig = 0.0;
        project_psd(x, &min_eig);
        report->iters = it + 1;
        report->change = change;
        report->min_eigenvalue = min_eig;
        report->tp_residual =
            (trace_out(x) - Eigen::Matrix4cd::Identity() / 4.0).norm();
    }
    return choi_to_ptm(x);
}

bool is_cptp(const Ptm& r, double tol) {
    CMat c = ptm_to_choi(r);
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (c + c.adjoint()));
    if (es.eigenvalues().minCoeff() < -tol) return false;
    return (trace_out(c) - Eigen::Matrix4cd::Identity() / 4.0).norm() <= tol;
}

double process_fidelity(const Ptm& ideal, const Ptm& actual) {
    return (ideal.transpose() * actual).trace() / 16.0;
}

double average_fidelity(const Ptm& ideal, const Ptm& actual) {
    return (4.0 * process_fidelity(ideal, actual) + 1.0) / 5.0;
}

Ptm compose(const Ptm& after, const Ptm& before) {
    return after * before;
}

CMat4 apply_channel(const Ptm& r, const CMat4& rho) {
    // Pauli coordinates of a general (non-Hermitian) operator are complex;
    // apply the channel to Hermitian and anti-Hermitian parts separately.
    CMat4 h = 0.5 * (rho + rho.adjoint());
    CMat4 a = (rho - rho.adjoint()) * cxd(0, -0.5);  // Hermitian
    CMat4 out_h = from_pauli_coords(r * pauli_coords(h));
    CMat4 out_a = from_pauli_coords(r * pauli_coords(a));
    return out_h + cxd(0, 1) * out_a;
}

Ptm hidden_z_ptm(double phi) {
    Eigen::Matrix2cd rz = Eigen::Matrix2cd::Zero();
    rz(0, 0) = std::exp(cxd(0, -phi / 2));
    rz(1, 1) = std::exp(cxd(0, phi / 2));
    return ptm_from_unitary(
        CMat4(kron(Eigen::Matrix2cd::Identity(), rz)));
}

}  // namespace hqt::channel

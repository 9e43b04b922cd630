/** \file
 * Pauli basis construction and coordinate transforms.
 */
#include "hqt/pauli.hpp"

#include <array>

namespace hqt {

const Eigen::Matrix2cd& pauli1(int i) {
    static const std::array<Eigen::Matrix2cd, 4> basis = [] {
        std::array<Eigen::Matrix2cd, 4> p;
        p[0] = Eigen::Matrix2cd::Identity();
        p[1] << 0, 1, 1, 0;
        p[2] << 0, cxd(0, -1), cxd(0, 1), 0;
        p[3] << 1, 0, 0, -1;
        return p;
    }();
    if (i < 0 || i > 3) throw validation_error("pauli1: index out of range");
    return basis[static_cast<size_t>(i)];
}

const CMat4& pauli2(int i) {
    static const std::array<CMat4, 16> basis = [] {
        std::array<CMat4, 16> p;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                p[static_cast<size_t>(4 * a + b)] =
                    kron(pauli1(a), pauli1(b));
        return p;
    }();
    if (i < 0 || i > 15) throw validation_error("pauli2: index out of range");
    return basis[static_cast<size_t>(i)];
}

std::string pauli_label(int i) {
    static const char letters[] = "1XYZ";
    if (i < 0 || i > 15) throw validation_error("pauli_label: index out of range");
    return std::string{letters[i / 4], letters[i % 4]};
}

CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
    return out;
}

PtmVec pauli_coords(const CMat4& a) {
    PtmVec c;
    for (int i = 0; i < 16; ++i) c(i) = (pauli2(i) * a).trace().real();
    return c;
}

CMat4 from_pauli_coords(const PtmVec& c) {
    CMat4 a = CMat4::Zero();
    for (int i = 0; i < 16; ++i) a += c(i) * pauli2(i);
    return a / 4.0;
}

}  // namespace hqt

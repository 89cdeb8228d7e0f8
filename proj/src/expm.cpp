#include "pxp/expm.hpp"

#include <cmath>

namespace pxp {

namespace {

int scaling_power(const Eigen::MatrixXd& A, double target) {
    const double nrm = A.cwiseAbs().rowwise().sum().maxCoeff(); // inf-norm
    int s = 0;
    double scaled = nrm;
    while (scaled > target && s < 60) {
        scaled *= 0.5;
        ++s;
    }
    return s;
}

} // namespace

Eigen::MatrixXd expm_pade(const Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows());
    const int s = scaling_power(A, 0.5);
    const Eigen::MatrixXd As = A / std::ldexp(1.0, s);

    // Diagonal [6/6] Pade coefficients: p(x) = sum c_k x^k, exp ~ p(A)/p(-A).
    static const double c[7] = {1.0, 1.0 / 2, 5.0 / 44, 1.0 / 66, 1.0 / 792,
                                1.0 / 15840, 1.0 / 665280};
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd A2 = As * As;
    const Eigen::MatrixXd A4 = A2 * A2;
    const Eigen::MatrixXd A6 = A4 * A2;
    const Eigen::MatrixXd U = As * (c[1] * I + c[3] * A2 + c[5] * A4);
    const Eigen::MatrixXd V = c[0] * I + c[2] * A2 + c[4] * A4 + c[6] * A6;
    // p(A) = V + U, p(-A) = V - U
    Eigen::MatrixXd R = (V - U).partialPivLu().solve(V + U);
    for (int k = 0; k < s; ++k) R = R * R;
    return R;
}

Eigen::MatrixXd expm_series6(const Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows());
    const int s = scaling_power(A, 1.0 / 32); // small argument keeps O(x^7) error tiny
    const Eigen::MatrixXd As = A / std::ldexp(1.0, s);

    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= 6; ++k) {
        term = term * As / static_cast<double>(k);
        R += term;
    }
    for (int k = 0; k < s; ++k) R = R * R;
    return R;
}

} // namespace pxp

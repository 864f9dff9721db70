// Independent reference computations used only by tests: a naive
// permutation-sum permanent, the published quarter matrix and probe
// amplitudes, and random unitaries.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace qmetro::oracle {

using cxd = std::complex<double>;

/// Permanent by explicit sum over all permutations.
inline cxd permanent_naive(const Eigen::MatrixXcd& a) {
    const int n = static_cast<int>(a.rows());
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    cxd total(0.0, 0.0);
    do {
        cxd term(1.0, 0.0);
        for (int i = 0; i < n; ++i) term *= a(i, perm[i]);
        total += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

/// The ideal balanced quarter with internal phases (phi1, phi2), written out
/// entry by entry.
inline Eigen::Matrix4cd ideal_quarter(double phi1, double phi2) {
    const cxd i(0.0, 1.0);
    const cxd e1 = std::polar(1.0, phi1);
    const cxd e2 = std::polar(1.0, phi2);
    Eigen::Matrix4cd u;
    u << e2, i * e2, i, -1.0,
         i * e2, -e2, 1.0, i,
         i, 1.0, -e1, i * e1,
         -1.0, i, i * e1, e1;
    return 0.5 * u;
}

/// Probe amplitudes generated by the ideal quarter from |0011>, over the
/// 10-state basis in lexicographically descending order:
/// |2000>, |1100>, |1010>, |1001>, |0200>, |0110>, |0101>, |0020>, |0011>, |0002>.
inline Eigen::VectorXcd probe_amplitudes(double phi1) {
    const cxd i(0.0, 1.0);
    const cxd c = i / (2.0 * std::sqrt(2.0));
    const cxd e = std::polar(1.0, -2.0 * phi1);
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(10);
    amp(0) = c;             // |2000>
    amp(1) = -0.5;          // |1100>
    amp(4) = -c;            // |0200>
    amp(7) = c * e;         // |0020>
    amp(8) = -0.5 * e;      // |0011>
    amp(9) = -c * e;        // |0002>
    return amp;
}

/// Haar-ish random unitary from the QR decomposition of a random complex
/// Gaussian matrix.
inline Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd g(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) g(r, c) = cxd(gauss(rng), gauss(rng));
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < n; ++c) {
        const cxd d = r(c, c) / std::abs(r(c, c));
        q.col(c) *= d;
    }
    return q;
}

/// Largest entrywise deviation between two states allowed to differ by one
/// global phase.
inline double distance_up_to_global_phase(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    int anchor = 0;
    b.cwiseAbs().maxCoeff(&anchor);
    const cxd phase = a(anchor) / b(anchor);
    return (a - phase * b).cwiseAbs().maxCoeff();
}

}  // namespace qmetro::oracle

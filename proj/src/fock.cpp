#include "qmetro/fock.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace qmetro {

namespace {

double occupation_factorial(const std::vector<int>& occ) {
    double f = 1.0;
    for (int n : occ)
        for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

// Mode index repeated by its occupation, e.g. (0,2,1,0) -> [1,1,2].
std::vector<int> repeated_modes(const ModeOccupation& s) {
    std::vector<int> out;
    out.reserve(s.photons());
    for (int j = 0; j < s.modes(); ++j)
        for (int k = 0; k < s.occ[j]; ++k) out.push_back(j);
    return out;
}

}  // namespace

int ModeOccupation::photons() const {
    int total = 0;
    for (int n : occ) {
        if (n < 0) throw std::invalid_argument("ModeOccupation: negative photon count");
        total += n;
    }
    return total;
}

FockBasis FockBasis::enumerate(int mode_count, int photon_count) {
    if (mode_count < 1) throw std::invalid_argument("FockBasis: need at least one mode");
    if (photon_count < 0) throw std::invalid_argument("FockBasis: negative photon count");

    FockBasis basis;
    basis.modes = mode_count;
    basis.photons = photon_count;

    // Depth-first, filling each mode from its maximum down, which yields the
    // lexicographically descending order.
    std::vector<int> occ(mode_count, 0);
    auto rec = [&](auto&& self, int mode, int remaining) -> void {
        if (mode == mode_count - 1) {
            occ[mode] = remaining;
            basis.states.push_back(ModeOccupation(occ));
            return;
        }
        for (int k = remaining; k >= 0; --k) {
            occ[mode] = k;
            self(self, mode + 1, remaining - k);
        }
    };
    rec(rec, 0, photon_count);
    return basis;
}

int FockBasis::index_of(const ModeOccupation& state) const {
    for (std::size_t i = 0; i < states.size(); ++i)
        if (states[i] == state) return static_cast<int>(i);
    return -1;
}

cxd permanent(const Eigen::MatrixXcd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("permanent: matrix must be square");
    const int n = static_cast<int>(a.rows());
    if (n == 0) return cxd(1.0, 0.0);
    if (n > 8) throw std::invalid_argument("permanent: dimension above desk-scale cap of 8");

    // Ryser with Gray-code subset iteration: perm(A) =
    // sum_{S != 0} (-1)^{n-|S|} prod_i (sum_{j in S} A(i,j)).
    Eigen::VectorXcd row_sums = Eigen::VectorXcd::Zero(n);
    cxd total(0.0, 0.0);
    std::uint32_t gray = 0;
    const std::uint32_t subsets = 1u << n;
    for (std::uint32_t k = 1; k < subsets; ++k) {
        const std::uint32_t next = k ^ (k >> 1);
        const std::uint32_t changed = next ^ gray;
        const int j = std::countr_zero(changed);
        if (next & changed)
            row_sums += a.col(j);
        else
            row_sums -= a.col(j);
        gray = next;

        cxd prod(1.0, 0.0);
        for (int i = 0; i < n; ++i) prod *= row_sums(i);
        const int popcount = std::popcount(next);
        total += ((n - popcount) % 2 == 0) ? prod : -prod;
    }
    return total;
}

PureState evolve(const Eigen::MatrixXcd& u, const ModeOccupation& input) {
    const int m = input.modes();
    if (u.rows() != u.cols() || u.rows() != m)
        throw std::invalid_argument("evolve: unitary dimension does not match mode count");
    const int n = input.photons();

    PureState out;
    out.basis = FockBasis::enumerate(m, n);
    out.amplitudes.resize(static_cast<Eigen::Index>(out.basis.size()));

    const std::vector<int> cols = repeated_modes(input);
    const double in_fact = occupation_factorial(input.occ);

    Eigen::MatrixXcd sub(n, n);
    for (std::size_t ti = 0; ti < out.basis.size(); ++ti) {
        const ModeOccupation& t = out.basis.states[ti];
        const std::vector<int> rows = repeated_modes(t);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) sub(r, c) = u(rows[r], cols[c]);
        const double norm = std::sqrt(in_fact * occupation_factorial(t.occ));
        out.amplitudes(static_cast<Eigen::Index>(ti)) = std::conj(permanent(sub)) / norm;
    }
    return out;
}

Eigen::VectorXd probabilities_indistinguishable(const Eigen::MatrixXcd& u,
                                                const ModeOccupation& input) {
    return evolve(u, input).amplitudes.cwiseAbs2();
}

Eigen::VectorXd probabilities_distinguishable(const Eigen::MatrixXcd& u,
                                              const ModeOccupation& input) {
    const int m = input.modes();
    if (u.rows() != u.cols() || u.rows() != m)
        throw std::invalid_argument("probabilities_distinguishable: dimension mismatch");
    if (input.photons() != 2)
        throw std::invalid_argument("probabilities_distinguishable: input must carry exactly 2 photons");

    const FockBasis basis = FockBasis::enumerate(m, 2);
    const std::vector<int> src = repeated_modes(input);
    const Eigen::MatrixXd p = u.cwiseAbs2();

    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
    std::vector<int> occ(m, 0);
    for (int i1 = 0; i1 < m; ++i1) {
        for (int i2 = 0; i2 < m; ++i2) {
            std::fill(occ.begin(), occ.end(), 0);
            ++occ[i1];
            ++occ[i2];
            const int idx = basis.index_of(ModeOccupation(occ));
            out(idx) += p(i1, src[0]) * p(i2, src[1]);
        }
    }
    return out;
}

Eigen::VectorXd mix_visibility(const Eigen::VectorXd& p_ind, const Eigen::VectorXd& p_dist,
                               double v) {
    if (p_ind.size() != p_dist.size())
        throw std::invalid_argument("mix_visibility: probability vectors must share a basis");
    if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("mix_visibility: visibility must lie in [0, 1]");
    Eigen::VectorXd p = v * p_ind + (1.0 - v) * p_dist;
    return p / p.sum();
}

}  // namespace qmetro

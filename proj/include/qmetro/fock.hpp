// Fock-state representation and evolution of photons through multiport
// unitaries, for indistinguishable and distinguishable photons.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace qmetro {

using cxd = std::complex<double>;

/// Photon counts per optical mode, |n1 n2 ... nm>.
struct ModeOccupation {
    std::vector<int> occ;

    ModeOccupation() = default;
    ModeOccupation(std::initializer_list<int> counts) : occ(counts) {}
    explicit ModeOccupation(std::vector<int> counts) : occ(std::move(counts)) {}

    int modes() const { return static_cast<int>(occ.size()); }
    int photons() const;

    bool operator==(const ModeOccupation& other) const { return occ == other.occ; }
};

/// Complete n-photon, m-mode occupation basis in a fixed deterministic order
/// (lexicographically descending occupation tuples), so that serialized
/// outcome columns are stable across runs. For m=4, n=2 this holds the 10
/// two-photon outcomes.
struct FockBasis {
    int modes = 0;
    int photons = 0;
    std::vector<ModeOccupation> states;

    static FockBasis enumerate(int mode_count, int photon_count);

    std::size_t size() const { return states.size(); }
    /// Index of a state in the basis; -1 if absent.
    int index_of(const ModeOccupation& state) const;
};

struct PureState {
    FockBasis basis;
    Eigen::VectorXcd amplitudes;

    double norm() const { return amplitudes.norm(); }
};

/// Exact matrix permanent by Gray-code Ryser iteration. Dimension is capped
/// at 8 (two-photon desk scale never exceeds that).
cxd permanent(const Eigen::MatrixXcd& a);

/// Evolve a Fock input through an m-mode network.
///
/// Amplitude convention: the network matrix u maps input-mode operators onto
/// output-mode operators (scattering form), so a single photon entering mode
/// j exits mode i with amplitude conj(u(i,j)). For n photons the transition
/// amplitude to outcome t is conj(perm(u_{t,s})) / sqrt(prod_i s_i! t_i!),
/// where u_{t,s} repeats rows by the output occupation and columns by the
/// input occupation. This is the convention under which the quarter matrix
/// of the device module generates its documented probe state.
PureState evolve(const Eigen::MatrixXcd& u, const ModeOccupation& input);

/// |amplitude|^2 of evolve(u, input), ordered like FockBasis::enumerate.
Eigen::VectorXd probabilities_indistinguishable(const Eigen::MatrixXcd& u,
                                                const ModeOccupation& input);

/// Output distribution when the photons are fully distinguishable: each
/// photon routes independently with single-photon probabilities |u(i,j)|^2
/// and label assignments are aggregated into occupation outcomes. Exact
/// enumeration (m^2 terms), no sampling. Requires exactly 2 photons.
Eigen::VectorXd probabilities_distinguishable(const Eigen::MatrixXcd& u,
                                              const ModeOccupation& input);

/// v * p_ind + (1 - v) * p_dist, renormalized. v is the two-photon
/// interference visibility in [0, 1].
Eigen::VectorXd mix_visibility(const Eigen::VectorXd& p_ind,
                               const Eigen::VectorXd& p_dist, double v);

}  // namespace qmetro

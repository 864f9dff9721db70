#include "qmetro/likelihood.hpp"

#include <stdexcept>

namespace qmetro {

DeviceLikelihood::DeviceLikelihood(const DeviceModel& model)
    : DeviceLikelihood(model, standard_input()) {}

DeviceLikelihood::DeviceLikelihood(const DeviceModel& model, const ModeOccupation& input)
    : model_(model) {
    if (input.modes() != 4 || input.photons() != 2)
        throw std::invalid_argument("DeviceLikelihood: input must be a 2-photon, 4-mode occupation");

    const Eigen::Matrix4cd q_in = quarter_unitary(model.quarter_in);
    quarter_out_ = quarter_unitary(model.quarter_out);

    probe_ = evolve(q_in, input);
    const FockBasis& basis = probe_.basis;

    // Two-photon transition matrix of the output quarter: column s holds the
    // amplitudes of evolve(quarter_out, basis state s), so the full output
    // state is transfer_ * (phase factors .* probe).
    for (int s = 0; s < 10; ++s) {
        const PureState col = evolve(quarter_out_, basis.states[s]);
        for (int t = 0; t < 10; ++t) transfer_(t, s) = col.amplitudes(t);
    }

    // Phase generators per intermediate state, ordered as the parameters
    // (phi_A, phi_B, phi_D): occupations of modes 4, 3 and 1.
    for (int s = 0; s < 10; ++s) {
        const auto& occ = basis.states[s].occ;
        generators_(s, 0) = occ[3];
        generators_(s, 1) = occ[2];
        generators_(s, 2) = occ[0];
    }

    int col = 0;
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < input.occ[j]; ++k) input_columns_[col++] = q_in.col(j);

    std::vector<int> occ(4, 0);
    for (int i1 = 0; i1 < 4; ++i1)
        for (int i2 = 0; i2 < 4; ++i2) {
            std::fill(occ.begin(), occ.end(), 0);
            ++occ[i1];
            ++occ[i2];
            pair_outcome_[i1][i2] = basis.index_of(ModeOccupation(occ));
        }

    visibility_ = model.visibility;
    efficiencies_ = model.outcome_efficiencies;
}

Vector10 DeviceLikelihood::probabilities(const Eigen::Vector3d& total_phases) const {
    Vector10 p;
    eval<false>(total_phases, p, nullptr);
    return p;
}

void DeviceLikelihood::probabilities_and_jacobian(const Eigen::Vector3d& total_phases, Vector10& p,
                                                  Matrix10x3& jacobian) const {
    eval<true>(total_phases, p, &jacobian);
}

template <bool WithJacobian>
void DeviceLikelihood::eval(const Eigen::Vector3d& theta, Vector10& p_out,
                            Matrix10x3* jac_out) const {
    // Indistinguishable branch. Under the scattering convention each
    // intermediate state s picks up exp(-i g_s . theta).
    std::array<std::array<cxd, 3>, 3> z;  // z[axis][power]
    for (int axis = 0; axis < 3; ++axis) {
        const cxd base = std::polar(1.0, -theta(axis));
        z[axis][0] = cxd(1.0, 0.0);
        z[axis][1] = base;
        z[axis][2] = base * base;
    }
    Eigen::Matrix<cxd, 10, 1> phased;
    for (int s = 0; s < 10; ++s)
        phased(s) = probe_.amplitudes(s) * z[0][generators_(s, 0)] * z[1][generators_(s, 1)] *
                    z[2][generators_(s, 2)];
    const Eigen::Matrix<cxd, 10, 1> amp = transfer_ * phased;
    const Vector10 p_ind = amp.cwiseAbs2();

    // Distinguishable branch: per-photon single-mode routing. The phase
    // layer acts on modes (1..4) = (phi_D, 0, phi_B, phi_A).
    Eigen::Vector4cd mode_phase;
    mode_phase << std::polar(1.0, theta(2)), cxd(1.0, 0.0), std::polar(1.0, theta(1)),
        std::polar(1.0, theta(0));
    std::array<Eigen::Vector4cd, 2> w;
    std::array<Eigen::Vector4d, 2> single;
    for (int l = 0; l < 2; ++l) {
        w[l] = quarter_out_ * mode_phase.cwiseProduct(input_columns_[l]).eval();
        single[l] = w[l].cwiseAbs2();
    }
    Vector10 p_dist = Vector10::Zero();
    for (int i1 = 0; i1 < 4; ++i1)
        for (int i2 = 0; i2 < 4; ++i2)
            p_dist(pair_outcome_[i1][i2]) += single[0](i1) * single[1](i2);

    const Vector10 mixed = visibility_ * p_ind + (1.0 - visibility_) * p_dist;
    const Vector10 weighted = efficiencies_.cwiseProduct(mixed);
    const double total = weighted.sum();
    p_out = weighted / total;

    if constexpr (!WithJacobian) {
        (void)jac_out;
        return;
    }

    // Mode index carrying each parameter: phi_A on mode 4, phi_B on mode 3,
    // phi_D on mode 1.
    static constexpr int kParamMode[3] = {3, 2, 0};
    Matrix10x3& jac = *jac_out;
    for (int j = 0; j < 3; ++j) {
        Eigen::Matrix<cxd, 10, 1> dphased;
        for (int s = 0; s < 10; ++s)
            dphased(s) = phased(s) * cxd(0.0, -static_cast<double>(generators_(s, j)));
        const Eigen::Matrix<cxd, 10, 1> damp = transfer_ * dphased;
        const Vector10 dp_ind =
            2.0 * (amp.conjugate().cwiseProduct(damp)).real();

        std::array<Eigen::Vector4d, 2> dsingle;
        for (int l = 0; l < 2; ++l) {
            Eigen::Vector4cd dv = Eigen::Vector4cd::Zero();
            const int mode = kParamMode[j];
            dv(mode) = cxd(0.0, 1.0) * mode_phase(mode) * input_columns_[l](mode);
            const Eigen::Vector4cd dw = quarter_out_ * dv;
            dsingle[l] = 2.0 * (w[l].conjugate().cwiseProduct(dw)).real();
        }
        Vector10 dp_dist = Vector10::Zero();
        for (int i1 = 0; i1 < 4; ++i1)
            for (int i2 = 0; i2 < 4; ++i2)
                dp_dist(pair_outcome_[i1][i2]) +=
                    dsingle[0](i1) * single[1](i2) + single[0](i1) * dsingle[1](i2);

        const Vector10 dweighted =
            efficiencies_.cwiseProduct(visibility_ * dp_ind + (1.0 - visibility_) * dp_dist);
        jac.col(j) = dweighted / total - p_out * (dweighted.sum() / total);
    }
}

template void DeviceLikelihood::eval<false>(const Eigen::Vector3d&, Vector10&, Matrix10x3*) const;
template void DeviceLikelihood::eval<true>(const Eigen::Vector3d&, Vector10&, Matrix10x3*) const;

}  // namespace qmetro

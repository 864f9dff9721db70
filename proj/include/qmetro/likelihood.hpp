// Compiled evaluator of the device's 10-outcome likelihood as a function of
// the three total phases (unknown + control). Factors everything that does
// not depend on the phases out of the hot loop, and provides analytic phase
// derivatives as an independent route to the Fisher information.
#pragma once

#include <Eigen/Dense>
#include <array>

#include "qmetro/device.hpp"
#include "qmetro/fock.hpp"

namespace qmetro {

using Matrix10x3 = Eigen::Matrix<double, 10, 3>;

class DeviceLikelihood {
public:
    explicit DeviceLikelihood(const DeviceModel& model);
    DeviceLikelihood(const DeviceModel& model, const ModeOccupation& input);

    /// Outcome distribution at total phases (phi_A, phi_B, phi_D). Agrees
    /// with likelihood(model, total, 0, input) to machine precision.
    Vector10 probabilities(const Eigen::Vector3d& total_phases) const;

    /// Distribution plus its analytic Jacobian d p / d phi (10 x 3).
    void probabilities_and_jacobian(const Eigen::Vector3d& total_phases, Vector10& p,
                                    Matrix10x3& jacobian) const;

    /// State after the input quarter (the entangled probe).
    const PureState& probe() const { return probe_; }

    const DeviceModel& model() const { return model_; }

private:
    template <bool WithJacobian>
    void eval(const Eigen::Vector3d& total_phases, Vector10& p, Matrix10x3* jacobian) const;

    DeviceModel model_;
    PureState probe_;
    Eigen::Matrix<cxd, 10, 10> transfer_;      // two-photon transition matrix of the output quarter
    Eigen::Matrix<int, 10, 3> generators_;     // (n4, n3, n1) per intermediate basis state
    Eigen::Matrix4cd quarter_out_;
    std::array<Eigen::Vector4cd, 2> input_columns_;   // single-photon input amplitudes
    std::array<std::array<int, 4>, 4> pair_outcome_;  // (mode, mode) -> outcome index
    double visibility_ = 1.0;
    Vector10 efficiencies_;
};

}  // namespace qmetro

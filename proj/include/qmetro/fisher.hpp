// Classical and quantum Fisher information for the three-phase estimation
// problem, with two independent computation routes (finite differences and
// analytic amplitude derivatives).
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "qmetro/fock.hpp"
#include "qmetro/likelihood.hpp"

namespace qmetro {

/// phases -> outcome distribution.
using PhaseLikelihoodFn = std::function<Eigen::VectorXd(const Eigen::Vector3d&)>;

/// Outcomes below this probability are dropped from Fisher sums; they carry
/// no information and poison the finite differences.
inline constexpr double kFisherProbabilityFloor = 1e-12;

struct FisherReport {
    Eigen::Vector3d phases;
    Eigen::Matrix3d fi;
    double fi_inv_trace = 0.0;
    std::optional<Eigen::Matrix3d> qfi;
    std::optional<double> qcrb_trace;
};

/// Fisher information matrix by central finite differences with step h.
Eigen::Matrix3d fi_matrix(const PhaseLikelihoodFn& likelihood, const Eigen::Vector3d& phases,
                          double step = 1e-5);

/// Same matrix from the analytic Jacobian of the device likelihood. Kept as
/// an independent route for cross-checks.
Eigen::Matrix3d fi_matrix_analytic(const DeviceLikelihood& engine, const Eigen::Vector3d& phases);

/// Tr(F^-1) computed from the eigenvalues of the (PSD) matrix, with a small
/// floor so that singular directions show up as a huge trace instead of a
/// sign-unstable one.
double fi_inv_trace(const Eigen::Matrix3d& fi);

/// Quantum Fisher matrix 4 [<n_i n_j> - <n_i><n_j>] of a pure 4-mode probe,
/// for the parameters (phi_A, phi_B, phi_D) generated by the photon numbers
/// of modes 4, 3 and 1 (mode 2 is the reference arm).
Eigen::Matrix3d qfi_pure(const PureState& probe);

/// Generalization over an arbitrary choice of generator modes.
Eigen::MatrixXd qfi_pure_general(const PureState& probe, const std::vector<int>& generator_modes);

FisherReport fisher_report(const DeviceLikelihood& engine, const Eigen::Vector3d& phases);

}  // namespace qmetro

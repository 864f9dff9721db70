// Cramér-Rao bound searches over the phase space and the comparison bounds
// (distinguishable photons, optimal classical single-photon probes, linear
// phase combinations, sequential strategies).
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qmetro/device.hpp"

namespace qmetro {

enum class PhotonMode {
    indistinguishable,  // the device's own visibility
    distinguishable,    // visibility forced to zero
};

/// Device model adjusted for a photon mode (and optional explicit
/// visibility override).
DeviceModel with_mode(const DeviceModel& model, PhotonMode mode);

struct CombinationBound {
    Eigen::Vector3d nu;
    double value = 0.0;
};

struct MinCrbResult {
    double min_trace = 0.0;
    /// All refined local minima within 1e-3 of the smallest, deduplicated.
    std::vector<Eigen::Vector3d> argmins;
};

/// Coarse grid scan of Tr(F^-1) over [0, pi)^3 followed by Nelder-Mead
/// refinement from the 10 best cells. Requires at least 20 grid points per
/// axis.
MinCrbResult min_crb_search(const DeviceModel& model, PhotonMode mode, int grid_points_per_axis);

struct ThresholdDensity {
    double density = 0.0;              // fraction with Tr(F^-1) < t (and finite)
    double divergence_fraction = 0.0;  // fraction with Tr(F^-1) >= 1e4
    double std_error = 0.0;            // binomial standard error of density
    int n_samples = 0;
};

/// Threshold above which a phase point counts as a divergence region.
inline constexpr double kDivergenceThreshold = 1e4;

/// Monte Carlo estimate of the fraction of uniform phase triples whose CRB
/// lies below t. Requires n_samples >= 10^4.
ThresholdDensity threshold_density(const DeviceModel& model, PhotonMode mode, double t,
                                   int n_samples, std::uint64_t seed);

/// Variance bound nu^T QFI^-1 nu on the linear combination nu . phi.
double linear_combination_bound(const Eigen::Matrix3d& qfi, const Eigen::Vector3d& nu);

/// Top unit eigenvector of the QFI (ties broken by the lowest eigen index,
/// sign fixed so its first nonzero component is positive) and the bound
/// 1 / lambda_max.
CombinationBound optimal_combination(const Eigen::Matrix3d& qfi);

/// Best total variance for estimating nu . phi with sequential classical
/// probes of total mean photon number n: min over allocations of
/// sum_i nu_i^2 / n_i, which closes to (sum |nu_i|)^2 / n. Computed both in
/// closed form and numerically; the two must agree to 1e-6.
double sequential_bound(const Eigen::Vector3d& nu, double total_mean_photons);

/// Minimum of Tr(QFI^-1) over single-photon probes of the form
/// gamma |ref> + delta sum_i |e_i> on d+1 modes, per probe over n_probes.
/// 1-D numeric optimization, cross-checked against d (1+sqrt(d))^2 / 4.
double optimal_single_photon_bound(int d, int n_probes);

}  // namespace qmetro

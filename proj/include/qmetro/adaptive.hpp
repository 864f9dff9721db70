// Adaptive estimation loop: expected-posterior-variance control selection,
// probe sampling from the device likelihood, and campaign orchestration.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "qmetro/device.hpp"
#include "qmetro/likelihood.hpp"
#include "qmetro/smc.hpp"

namespace qmetro {

/// Full outcome distribution at total phases (particle position + control).
using TotalPhasePdf = std::function<Vector10(const Eigen::Vector3d& total_phases)>;

struct ControlStrategy {
    int n_candidates = 30;
    /// Upper edge of the uniform candidate cube [0, span)^3. The bound
    /// minima are spread over the full 2*pi torus, so the default span keeps
    /// every working point reachable from any truth triple.
    double control_span = 2.0 * std::numbers::pi;
    /// Device working points (CRB minima). For each, the control steering
    /// the posterior mean onto it is offered as an extra candidate, which
    /// lets the search track the sharpening posterior. Empty disables
    /// steering.
    std::vector<Eigen::Vector3d> steer_targets;
    std::mt19937_64 rng;
};

struct SmcConfig {
    int n_particles = 2000;
    Eigen::Vector3d prior_center =
        Eigen::Vector3d::Constant(std::numbers::pi / 2.0);
    double prior_width = std::numbers::pi;
    double resample_ess_fraction = 0.5;
    double liu_west_a = 0.98;
};

struct AdaptiveConfig {
    SmcConfig smc;
    int n_candidates = 30;
    double control_span = 2.0 * std::numbers::pi;
    bool steer_to_minima = true;  // include working-point steering candidates
    bool adaptive = true;         // false: zero control on every probe
    int threads = 0;              // 0: hardware concurrency
};

/// CRB minima of the device (over [0, pi)^3 plus their symmetry images),
/// used as steering targets by the control search.
std::vector<Eigen::Vector3d> device_working_points(const DeviceModel& device);

struct StepRecord {
    Eigen::Vector3d control;
    int outcome = 0;
    Eigen::Vector3d posterior_mean;
    double trace_cov = 0.0;
    double quadratic_loss = 0.0;
};

struct EstimationTrajectory {
    Eigen::Vector3d truth;
    std::uint64_t seed = 0;
    PosteriorSummary prior_summary;
    std::vector<StepRecord> steps;  // one record per probe
};

struct CampaignResult {
    std::vector<Eigen::Vector3d> triplets;
    int repetitions = 0;
    int n_probes = 0;
    Eigen::Vector3d nu;  // combination direction for the combination loss
    std::vector<EstimationTrajectory> runs;  // triplet-major order
    // Per-probe aggregates over all runs.
    Eigen::VectorXd mean_quadratic_loss, std_quadratic_loss;
    Eigen::VectorXd mean_combination_loss, std_combination_loss;
};

/// sum_delta p(delta | c) Tr[Sigma(posterior | delta, c)]: the average
/// posterior covariance trace after one more probe under control c, with
/// hypothetical Bayes reweighting and no resampling.
double expected_variance(const ParticleCloud& cloud, const Eigen::Vector3d& control,
                         const TotalPhasePdf& pdf);

/// Evaluates expected_variance at the zero control, the previous winner and
/// n_candidates uniform random controls; returns the minimizer (ties go to
/// the first evaluated).
Eigen::Vector3d choose_control(const ParticleCloud& cloud, const TotalPhasePdf& pdf,
                               ControlStrategy& strategy,
                               const std::optional<Eigen::Vector3d>& previous);

/// steer_targets overrides the working points (avoiding their recomputation
/// across campaign runs); by default they are derived from the device when
/// steering is enabled.
EstimationTrajectory run_estimation(const DeviceModel& device, const Eigen::Vector3d& truth,
                                    int n_probes, const AdaptiveConfig& config, std::uint64_t seed,
                                    const std::optional<std::vector<Eigen::Vector3d>>&
                                        steer_targets = std::nullopt);

/// Truth triplets drawn uniformly from the prior cube inset by pi/10 on
/// each side; runs are independent with per-run seeds derived from the
/// master seed, and are executed in parallel.
CampaignResult run_campaign(const DeviceModel& device, int n_triplets, int repetitions,
                            int n_probes, const AdaptiveConfig& config, std::uint64_t master_seed);

}  // namespace qmetro

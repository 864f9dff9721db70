// Sequential Monte Carlo posterior over the three unknown phases: uniform
// cube prior, Bayes reweighting, Liu-West resampling, moment summaries.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>

namespace qmetro {

struct ParticleCloud {
    Eigen::Matrix<double, Eigen::Dynamic, 3> positions;
    Eigen::VectorXd weights;  // normalized to 1
    std::mt19937_64 rng;

    int size() const { return static_cast<int>(positions.rows()); }
};

struct PosteriorSummary {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
    double trace_cov = 0.0;
    std::optional<double> quadratic_loss;
};

/// Probability of one outcome at a particle position under a control.
using OutcomeLikelihoodFn =
    std::function<double(int outcome, const Eigen::Vector3d& position,
                         const Eigen::Vector3d& control)>;

/// Uniform prior on the cube center +- width/2 per axis, uniform weights.
/// Needs at least 100 particles.
ParticleCloud init_prior(const Eigen::Vector3d& center, double width, int n_particles,
                         std::uint64_t seed);

/// w_i <- w_i * p(outcome | phi_i, control), renormalized. Throws when the
/// total weight underflows (every particle inconsistent with the outcome).
void bayes_update(ParticleCloud& cloud, int outcome, const OutcomeLikelihoodFn& likelihood,
                  const Eigen::Vector3d& control);

/// 1 / sum w_i^2; equals the particle count for uniform weights.
double effective_sample_size(const ParticleCloud& cloud);

/// Liu-West resampling: draw positions from the weighted cloud, shrink
/// toward the mean by a, add Gaussian jitter with covariance (1-a^2) Sigma.
/// Weights reset to uniform; the particle count is preserved.
void resample(ParticleCloud& cloud, double a = 0.98);

/// Weighted mean/covariance; with a truth, also the quadratic loss
/// sum_i (mean_i - truth_i)^2 (plain differences, no wrap-around: the prior
/// support is a pi-cube).
PosteriorSummary summarize(const ParticleCloud& cloud,
                           const std::optional<Eigen::Vector3d>& truth = std::nullopt);

}  // namespace qmetro

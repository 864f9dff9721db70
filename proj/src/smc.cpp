#include "qmetro/smc.hpp"

#include <cmath>
#include <stdexcept>

#include "qmetro/rng.hpp"

namespace qmetro {

ParticleCloud init_prior(const Eigen::Vector3d& center, double width, int n_particles,
                         std::uint64_t seed) {
    if (n_particles < 100) throw std::invalid_argument("init_prior: need at least 100 particles");
    if (!(width > 0.0)) throw std::invalid_argument("init_prior: width must be positive");

    ParticleCloud cloud;
    cloud.rng.seed(seed);
    cloud.positions.resize(n_particles, 3);
    for (int i = 0; i < n_particles; ++i)
        for (int k = 0; k < 3; ++k)
            cloud.positions(i, k) =
                uniform_range(cloud.rng, center(k) - width / 2.0, center(k) + width / 2.0);
    cloud.weights = Eigen::VectorXd::Constant(n_particles, 1.0 / n_particles);
    return cloud;
}

void bayes_update(ParticleCloud& cloud, int outcome, const OutcomeLikelihoodFn& likelihood,
                  const Eigen::Vector3d& control) {
    for (int i = 0; i < cloud.size(); ++i)
        cloud.weights(i) *= likelihood(outcome, cloud.positions.row(i).transpose(), control);
    const double total = cloud.weights.sum();
    if (!(total > 0.0) || !std::isfinite(total))
        throw std::runtime_error(
            "bayes_update: posterior weight underflow, every particle is inconsistent with the "
            "observed outcome");
    cloud.weights /= total;
}

double effective_sample_size(const ParticleCloud& cloud) {
    return 1.0 / cloud.weights.squaredNorm();
}

void resample(ParticleCloud& cloud, double a) {
    const int n = cloud.size();
    const PosteriorSummary stats = summarize(cloud);

    Eigen::Matrix3d jitter_cov = (1.0 - a * a) * stats.covariance;
    jitter_cov += 1e-10 * Eigen::Matrix3d::Identity();  // floor for degenerate clouds
    const Eigen::LLT<Eigen::Matrix3d> llt(jitter_cov);
    const Eigen::Matrix3d root = llt.matrixL();

    // Inverse-CDF draws from the weighted cloud.
    Eigen::VectorXd cdf(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += cloud.weights(i);
        cdf(i) = acc;
    }
    cdf(n - 1) = 1.0;

    Eigen::Matrix<double, Eigen::Dynamic, 3> fresh(n, 3);
    for (int i = 0; i < n; ++i) {
        const double u = uniform_double(cloud.rng);
        const int pick = static_cast<int>(
            std::lower_bound(cdf.data(), cdf.data() + n, u) - cdf.data());
        Eigen::Vector3d noise;
        for (int k = 0; k < 3; ++k) noise(k) = normal_draw(cloud.rng);
        fresh.row(i) = (a * cloud.positions.row(pick).transpose() + (1.0 - a) * stats.mean +
                        root * noise)
                           .transpose();
    }
    cloud.positions = fresh;
    cloud.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
}

PosteriorSummary summarize(const ParticleCloud& cloud, const std::optional<Eigen::Vector3d>& truth) {
    PosteriorSummary out;
    out.mean = cloud.positions.transpose() * cloud.weights;
    const Eigen::Matrix<double, Eigen::Dynamic, 3> centered =
        cloud.positions.rowwise() - out.mean.transpose();
    out.covariance = centered.transpose() * cloud.weights.asDiagonal() * centered;
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    out.trace_cov = out.covariance.trace();
    if (truth) out.quadratic_loss = (out.mean - *truth).squaredNorm();
    return out;
}

}  // namespace qmetro

#include "qmetro/adaptive.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "qmetro/bounds.hpp"
#include "qmetro/fisher.hpp"
#include "qmetro/rng.hpp"

namespace qmetro {

namespace {

constexpr double kPi = std::numbers::pi;

int sample_outcome(const Vector10& p, std::mt19937_64& rng) {
    const double u = uniform_double(rng) * p.sum();
    double acc = 0.0;
    for (int i = 0; i < 10; ++i) {
        acc += p(i);
        if (u < acc) return i;
    }
    return 9;
}

double wrap_two_pi(double x) {
    double y = std::fmod(x, 2.0 * kPi);
    if (y < 0.0) y += 2.0 * kPi;
    return y;
}

}  // namespace

std::vector<Eigen::Vector3d> device_working_points(const DeviceModel& device) {
    const MinCrbResult found = min_crb_search(device, PhotonMode::indistinguishable, 20);
    std::vector<Eigen::Vector3d> points = found.argmins;
    // The likelihood is invariant under a joint pi shift of (phi_A, phi_B),
    // so every minimum has a second image on the 2*pi torus.
    const std::size_t base = points.size();
    for (std::size_t i = 0; i < base; ++i)
        points.push_back(points[i] + Eigen::Vector3d(kPi, kPi, 0.0));
    return points;
}

double expected_variance(const ParticleCloud& cloud, const Eigen::Vector3d& control,
                         const TotalPhasePdf& pdf) {
    const int n = cloud.size();
    Vector10 predictive = Vector10::Zero();
    Eigen::Matrix<double, 10, 3> first = Eigen::Matrix<double, 10, 3>::Zero();
    Eigen::Matrix<double, 10, 3> second = Eigen::Matrix<double, 10, 3>::Zero();

    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d pos = cloud.positions.row(i).transpose();
        const Vector10 p = pdf(pos + control) * cloud.weights(i);
        predictive += p;
        for (int k = 0; k < 3; ++k) {
            first.col(k) += p * pos(k);
            second.col(k) += p * (pos(k) * pos(k));
        }
    }
    if (!(predictive.sum() > 0.0))
        throw std::runtime_error("expected_variance: degenerate predictive distribution");

    // sum_delta q_delta Tr Sigma_delta = sum_delta sum_k (S2 - S1^2/q)
    double value = 0.0;
    for (int delta = 0; delta < 10; ++delta) {
        const double q = predictive(delta);
        if (q <= 0.0) continue;
        for (int k = 0; k < 3; ++k)
            value += second(delta, k) - first(delta, k) * first(delta, k) / q;
    }
    return value;
}

Eigen::Vector3d choose_control(const ParticleCloud& cloud, const TotalPhasePdf& pdf,
                               ControlStrategy& strategy,
                               const std::optional<Eigen::Vector3d>& previous) {
    std::vector<Eigen::Vector3d> candidates;
    candidates.reserve(strategy.n_candidates + strategy.steer_targets.size() + 2);
    candidates.push_back(Eigen::Vector3d::Zero());
    if (previous) candidates.push_back(*previous);
    if (!strategy.steer_targets.empty()) {
        const Eigen::Vector3d mean = summarize(cloud).mean;
        for (const Eigen::Vector3d& target : strategy.steer_targets) {
            Eigen::Vector3d c;
            for (int k = 0; k < 3; ++k) c(k) = wrap_two_pi(target(k) - mean(k));
            candidates.push_back(c);
        }
    }
    for (int i = 0; i < strategy.n_candidates; ++i) {
        Eigen::Vector3d c;
        for (int k = 0; k < 3; ++k) c(k) = uniform_range(strategy.rng, 0.0, strategy.control_span);
        candidates.push_back(c);
    }

    Eigen::Vector3d best = candidates.front();
    double best_value = expected_variance(cloud, best, pdf);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double value = expected_variance(cloud, candidates[i], pdf);
        if (value < best_value) {
            best_value = value;
            best = candidates[i];
        }
    }
    return best;
}

EstimationTrajectory run_estimation(const DeviceModel& device, const Eigen::Vector3d& truth,
                                    int n_probes, const AdaptiveConfig& config, std::uint64_t seed,
                                    const std::optional<std::vector<Eigen::Vector3d>>&
                                        steer_targets) {
    const DeviceLikelihood engine(device);
    const TotalPhasePdf pdf = [&engine](const Eigen::Vector3d& total) {
        return engine.probabilities(total);
    };

    EstimationTrajectory traj;
    traj.truth = truth;
    traj.seed = seed;

    ParticleCloud cloud = init_prior(config.smc.prior_center, config.smc.prior_width,
                                     config.smc.n_particles, derive_seed(seed, 1));
    ControlStrategy strategy;
    strategy.n_candidates = config.n_candidates;
    strategy.control_span = config.control_span;
    if (config.adaptive && config.steer_to_minima)
        strategy.steer_targets = steer_targets ? *steer_targets : device_working_points(device);
    strategy.rng.seed(derive_seed(seed, 2));
    std::mt19937_64 outcome_rng(derive_seed(seed, 3));

    traj.prior_summary = summarize(cloud, truth);
    traj.steps.reserve(n_probes);

    const OutcomeLikelihoodFn outcome_likelihood =
        [&engine](int outcome, const Eigen::Vector3d& position, const Eigen::Vector3d& control) {
            return engine.probabilities(position + control)(outcome);
        };

    std::optional<Eigen::Vector3d> previous;
    for (int m = 0; m < n_probes; ++m) {
        Eigen::Vector3d control = Eigen::Vector3d::Zero();
        if (config.adaptive) control = choose_control(cloud, pdf, strategy, previous);
        previous = control;

        const Vector10 p_true = engine.probabilities(truth + control);
        const int outcome = sample_outcome(p_true, outcome_rng);

        bayes_update(cloud, outcome, outcome_likelihood, control);
        if (effective_sample_size(cloud) < config.smc.resample_ess_fraction * cloud.size())
            resample(cloud, config.smc.liu_west_a);

        const PosteriorSummary summary = summarize(cloud, truth);
        StepRecord rec;
        rec.control = control;
        rec.outcome = outcome;
        rec.posterior_mean = summary.mean;
        rec.trace_cov = summary.trace_cov;
        rec.quadratic_loss = summary.quadratic_loss.value();
        traj.steps.push_back(rec);
    }
    return traj;
}

CampaignResult run_campaign(const DeviceModel& device, int n_triplets, int repetitions,
                            int n_probes, const AdaptiveConfig& config,
                            std::uint64_t master_seed) {
    CampaignResult out;
    out.repetitions = repetitions;
    out.n_probes = n_probes;

    // Combination direction: top QFI eigenvector of the entangled probe.
    const DeviceLikelihood engine(device);
    out.nu = optimal_combination(qfi_pure(engine.probe())).nu;

    // Truth triplets from the prior cube inset by pi/10 against boundary
    // bias.
    std::mt19937_64 triplet_rng(derive_seed(master_seed, 0x7117));
    const double inset = kPi / 10.0;
    for (int t = 0; t < n_triplets; ++t) {
        Eigen::Vector3d truth;
        for (int k = 0; k < 3; ++k) {
            const double lo = config.smc.prior_center(k) - config.smc.prior_width / 2.0 + inset;
            const double hi = config.smc.prior_center(k) + config.smc.prior_width / 2.0 - inset;
            truth(k) = uniform_range(triplet_rng, lo, hi);
        }
        out.triplets.push_back(truth);
    }

    const std::optional<std::vector<Eigen::Vector3d>> steer_targets =
        (config.adaptive && config.steer_to_minima)
            ? std::optional(device_working_points(device))
            : std::nullopt;

    const int n_runs = n_triplets * repetitions;
    out.runs.resize(n_runs);
    std::atomic<int> next{0};
    const int n_threads =
        config.threads > 0 ? config.threads
                           : std::max(1u, std::thread::hardware_concurrency());
    auto worker = [&]() {
        for (int idx = next.fetch_add(1); idx < n_runs; idx = next.fetch_add(1)) {
            const int t = idx / repetitions;
            const int r = idx % repetitions;
            const std::uint64_t seed = derive_seed(master_seed, 0x5eed, t, r);
            out.runs[idx] =
                run_estimation(device, out.triplets[t], n_probes, config, seed, steer_targets);
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    out.mean_quadratic_loss.setZero(n_probes);
    out.std_quadratic_loss.setZero(n_probes);
    out.mean_combination_loss.setZero(n_probes);
    out.std_combination_loss.setZero(n_probes);
    if (n_runs == 0 || n_probes == 0) return out;

    for (int m = 0; m < n_probes; ++m) {
        double sum_q = 0.0, sum_q2 = 0.0, sum_c = 0.0, sum_c2 = 0.0;
        for (const auto& run : out.runs) {
            const StepRecord& rec = run.steps[m];
            const double q = rec.quadratic_loss;
            const double cerr = out.nu.dot(rec.posterior_mean - run.truth);
            const double c = cerr * cerr;
            sum_q += q;
            sum_q2 += q * q;
            sum_c += c;
            sum_c2 += c * c;
        }
        const double inv = 1.0 / n_runs;
        out.mean_quadratic_loss(m) = sum_q * inv;
        out.mean_combination_loss(m) = sum_c * inv;
        out.std_quadratic_loss(m) =
            std::sqrt(std::max(0.0, sum_q2 * inv - out.mean_quadratic_loss(m) *
                                                       out.mean_quadratic_loss(m)));
        out.std_combination_loss(m) =
            std::sqrt(std::max(0.0, sum_c2 * inv - out.mean_combination_loss(m) *
                                                       out.mean_combination_loss(m)));
    }
    return out;
}

}  // namespace qmetro

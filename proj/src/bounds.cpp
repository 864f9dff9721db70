#include "qmetro/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "qmetro/fisher.hpp"
#include "qmetro/optim.hpp"
#include "qmetro/rng.hpp"

namespace qmetro {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_pi(double x) {
    double y = std::fmod(x, kPi);
    if (y < 0.0) y += kPi;
    return y;
}

}  // namespace

DeviceModel with_mode(const DeviceModel& model, PhotonMode mode) {
    DeviceModel adjusted = model;
    if (mode == PhotonMode::distinguishable) adjusted.visibility = 0.0;
    return adjusted;
}

MinCrbResult min_crb_search(const DeviceModel& model, PhotonMode mode, int grid_points_per_axis) {
    if (grid_points_per_axis < 20)
        throw std::invalid_argument("min_crb_search: need at least 20 grid points per axis");

    const DeviceLikelihood engine(with_mode(model, mode));
    auto trace_at = [&](const Eigen::Vector3d& phases) {
        return fi_inv_trace(fi_matrix_analytic(engine, phases));
    };

    // Coarse scan.
    const int g = grid_points_per_axis;
    struct Cell {
        double value;
        Eigen::Vector3d phases;
    };
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(g) * g * g);
    for (int ia = 0; ia < g; ++ia)
        for (int ib = 0; ib < g; ++ib)
            for (int id = 0; id < g; ++id) {
                const Eigen::Vector3d phases(kPi * ia / g, kPi * ib / g, kPi * id / g);
                cells.push_back({trace_at(phases), phases});
            }
    std::partial_sort(cells.begin(), cells.begin() + 10, cells.end(),
                      [](const Cell& a, const Cell& b) { return a.value < b.value; });
    if (!std::isfinite(cells.front().value) || cells.front().value >= kDivergenceThreshold)
        throw std::domain_error("min_crb_search: every grid point is singular");

    // Refine the 10 best cells.
    NelderMeadOptions options;
    options.initial_step = 0.5 * kPi / g;
    options.x_tolerance = 1e-8;
    options.f_tolerance = 1e-11;
    options.max_iterations = 3000;
    std::vector<Cell> refined;
    for (int i = 0; i < 10; ++i) {
        const auto result = nelder_mead(
            [&](const Eigen::VectorXd& x) {
                return trace_at(Eigen::Vector3d(wrap_pi(x(0)), wrap_pi(x(1)), wrap_pi(x(2))));
            },
            cells[i].phases, options);
        refined.push_back(
            {result.value,
             Eigen::Vector3d(wrap_pi(result.x(0)), wrap_pi(result.x(1)), wrap_pi(result.x(2)))});
    }
    std::sort(refined.begin(), refined.end(),
              [](const Cell& a, const Cell& b) { return a.value < b.value; });

    MinCrbResult out;
    out.min_trace = refined.front().value;
    for (const Cell& c : refined) {
        if (c.value > out.min_trace + 1e-3) continue;
        bool duplicate = false;
        for (const auto& seen : out.argmins) {
            double dist = 0.0;
            for (int k = 0; k < 3; ++k) {
                double d = std::abs(wrap_pi(c.phases(k)) - wrap_pi(seen(k)));
                dist = std::max(dist, std::min(d, kPi - d));
            }
            if (dist < 1e-2) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) out.argmins.push_back(c.phases);
    }
    return out;
}

ThresholdDensity threshold_density(const DeviceModel& model, PhotonMode mode, double t,
                                   int n_samples, std::uint64_t seed) {
    if (n_samples < 10000)
        throw std::invalid_argument("threshold_density: need at least 10^4 samples");

    const DeviceLikelihood engine(with_mode(model, mode));
    std::mt19937_64 rng(seed);
    int below = 0, diverged = 0;
    for (int i = 0; i < n_samples; ++i) {
        Eigen::Vector3d phases;
        for (int k = 0; k < 3; ++k) phases(k) = uniform_range(rng, 0.0, kPi);
        const double trace = fi_inv_trace(fi_matrix_analytic(engine, phases));
        if (trace >= kDivergenceThreshold)
            ++diverged;
        else if (trace < t)
            ++below;
    }
    ThresholdDensity out;
    out.n_samples = n_samples;
    out.density = static_cast<double>(below) / n_samples;
    out.divergence_fraction = static_cast<double>(diverged) / n_samples;
    out.std_error = std::sqrt(out.density * (1.0 - out.density) / n_samples);
    return out;
}

double linear_combination_bound(const Eigen::Matrix3d& qfi, const Eigen::Vector3d& nu) {
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(qfi);
    if (!lu.isInvertible()) throw std::domain_error("linear_combination_bound: singular QFI");
    return nu.dot(lu.solve(nu));
}

CombinationBound optimal_combination(const Eigen::Matrix3d& qfi) {
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(0.5 * (qfi + qfi.transpose()));
    const Eigen::Vector3d values = eig.eigenvalues();  // ascending
    const double top = values(2);
    // Ties broken by the lowest eigen index.
    int pick = 2;
    for (int i = 0; i < 3; ++i)
        if (values(i) >= top - 1e-12 * std::max(1.0, std::abs(top))) {
            pick = i;
            break;
        }
    Eigen::Vector3d nu = eig.eigenvectors().col(pick);
    for (int i = 0; i < 3; ++i) {
        if (std::abs(nu(i)) > 1e-12) {
            if (nu(i) < 0.0) nu = -nu;
            break;
        }
    }
    return {nu, 1.0 / values(pick)};
}

double sequential_bound(const Eigen::Vector3d& nu, double total_mean_photons) {
    if (!(total_mean_photons > 0.0))
        throw std::invalid_argument("sequential_bound: need a positive photon budget");

    const double closed_form =
        nu.cwiseAbs().sum() * nu.cwiseAbs().sum() / total_mean_photons;

    // Numeric cross-check: optimize the allocation over the components with
    // nonzero weight (zero-weight phases receive no photons).
    std::vector<double> active;
    for (int i = 0; i < 3; ++i)
        if (std::abs(nu(i)) > 0.0) active.push_back(nu(i) * nu(i));
    double numeric;
    if (active.size() == 1) {
        numeric = active[0] / total_mean_photons;
    } else {
        const int free_dims = static_cast<int>(active.size()) - 1;
        auto objective = [&](const Eigen::VectorXd& x) {
            // softmax parameterization of the allocation simplex
            double z = 1.0;
            for (int i = 0; i < free_dims; ++i) z += std::exp(x(i));
            double value = 0.0;
            for (std::size_t i = 0; i < active.size(); ++i) {
                const double share = (i < static_cast<std::size_t>(free_dims))
                                         ? std::exp(x(static_cast<int>(i))) / z
                                         : 1.0 / z;
                value += active[i] / (total_mean_photons * share);
            }
            return value;
        };
        NelderMeadOptions options;
        options.initial_step = 0.5;
        options.x_tolerance = 1e-10;
        options.f_tolerance = 1e-14;
        options.max_iterations = 5000;
        numeric = nelder_mead(objective, Eigen::VectorXd::Zero(free_dims), options).value;
    }
    if (std::abs(numeric - closed_form) > 1e-6 * std::max(1.0, std::abs(closed_form)))
        throw std::logic_error("sequential_bound: numeric optimum disagrees with the closed form");
    return closed_form;
}

double optimal_single_photon_bound(int d, int n_probes) {
    if (d < 1) throw std::invalid_argument("optimal_single_photon_bound: d must be >= 1");
    if (n_probes < 1) throw std::invalid_argument("optimal_single_photon_bound: n_probes must be >= 1");

    // Probe gamma |ref> + delta sum_i |e_i> on d+1 modes, parameterized by
    // u = delta^2 in (0, 1/d).
    const FockBasis basis = FockBasis::enumerate(d + 1, 1);
    std::vector<int> generators(d);
    for (int i = 0; i < d; ++i) generators[i] = i + 1;

    auto trace_at = [&](double u) {
        PureState probe;
        probe.basis = basis;
        probe.amplitudes.resize(d + 1);
        // Basis order is lexicographically descending: state k has the
        // photon in mode k.
        probe.amplitudes(0) = std::sqrt(std::max(0.0, 1.0 - d * u));
        for (int i = 1; i <= d; ++i) probe.amplitudes(i) = std::sqrt(u);
        const Eigen::MatrixXd qfi = qfi_pure_general(probe, generators);
        return qfi.inverse().trace();
    };

    const double margin = 1e-9;
    const double u_best = golden_section_min(trace_at, margin, 1.0 / d - margin, 1e-12);
    const double numeric = trace_at(u_best) / n_probes;

    const double closed_form = d * (1.0 + std::sqrt(d)) * (1.0 + std::sqrt(d)) / (4.0 * n_probes);
    if (std::abs(numeric - closed_form) > 1e-6 * closed_form)
        throw std::logic_error("optimal_single_photon_bound: optimizer disagrees with closed form");
    return numeric;
}

}  // namespace qmetro

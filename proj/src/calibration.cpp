#include "qmetro/calibration.hpp"

#include <cmath>
#include <stdexcept>

#include "qmetro/likelihood.hpp"
#include "qmetro/optim.hpp"
#include "qmetro/rng.hpp"

namespace qmetro {

namespace {

Vector10 setting_probabilities(const DeviceLikelihood& engine, const ThermalModel& thermal,
                               const Eigen::Vector3d& powers) {
    return engine.probabilities(powers_to_phases(thermal, powers));
}

// Packed parameter vector (all entries of order one):
//   0..2   phi0 / 0.1
//   3..11  alpha / 0.03 (row-major)
//   12..14 alpha2 / 5e-5
//   15..22 logit(reflectivity) / 0.2 (quarter_in then quarter_out)
//   23     logit(visibility) / 0.2
//   24..32 log(eta_k / eta_0) / 0.1 for outcomes 1..9
constexpr int kParamCount = 33;
constexpr double kPhi0Scale = 0.1;
constexpr double kAlphaScale = 0.03;
constexpr double kAlpha2Scale = 5e-5;
constexpr double kLogitScale = 0.2;
constexpr double kLogEtaScale = 0.1;

double logit(double p) { return std::log(p / (1.0 - p)); }
double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd pack(const DeviceModel& m) {
    Eigen::VectorXd x(kParamCount);
    int idx = 0;
    for (int i = 0; i < 3; ++i) x(idx++) = m.thermal.phi0(i) / kPhi0Scale;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) x(idx++) = m.thermal.alpha(i, k) / kAlphaScale;
    for (int i = 0; i < 3; ++i) x(idx++) = m.thermal.alpha2(i) / kAlpha2Scale;
    for (double r : m.quarter_in.reflectivities) x(idx++) = logit(r) / kLogitScale;
    for (double r : m.quarter_out.reflectivities) x(idx++) = logit(r) / kLogitScale;
    x(idx++) = logit(std::clamp(m.visibility, 1e-6, 1.0 - 1e-6)) / kLogitScale;
    for (int k = 1; k < 10; ++k)
        x(idx++) = std::log(m.outcome_efficiencies(k) / m.outcome_efficiencies(0)) / kLogEtaScale;
    return x;
}

DeviceModel unpack(const Eigen::VectorXd& x, const DeviceModel& base) {
    DeviceModel m = base;
    int idx = 0;
    for (int i = 0; i < 3; ++i) m.thermal.phi0(i) = x(idx++) * kPhi0Scale;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) m.thermal.alpha(i, k) = x(idx++) * kAlphaScale;
    for (int i = 0; i < 3; ++i) m.thermal.alpha2(i) = x(idx++) * kAlpha2Scale;
    for (double& r : m.quarter_in.reflectivities) r = expit(x(idx++) * kLogitScale);
    for (double& r : m.quarter_out.reflectivities) r = expit(x(idx++) * kLogitScale);
    m.visibility = expit(x(idx++) * kLogitScale);
    m.outcome_efficiencies(0) = 1.0;
    for (int k = 1; k < 10; ++k) m.outcome_efficiencies(k) = std::exp(x(idx++) * kLogEtaScale);
    return m;
}

std::vector<std::string> parameter_names() {
    std::vector<std::string> names;
    const char* phase[3] = {"A", "B", "D"};
    for (int i = 0; i < 3; ++i) names.push_back(std::string("phi0_") + phase[i]);
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            names.push_back(std::string("alpha_") + phase[i] + std::to_string(k));
    for (int i = 0; i < 3; ++i) names.push_back(std::string("alpha2_") + phase[i]);
    for (int i = 0; i < 4; ++i) names.push_back("refl_in_" + std::to_string(i));
    for (int i = 0; i < 4; ++i) names.push_back("refl_out_" + std::to_string(i));
    names.push_back("visibility");
    for (int k = 1; k < 10; ++k) names.push_back("log_eta_" + std::to_string(k));
    return names;
}

}  // namespace

CharacterizationDataset generate_characterization(const DeviceModel& truth, int power_levels,
                                                  int shots, std::uint64_t seed) {
    if (power_levels < 2)
        throw std::invalid_argument("generate_characterization: need at least 2 power levels");
    if (shots < 1) throw std::invalid_argument("generate_characterization: need shots >= 1");

    const double limit = truth.thermal.power_limit;
    CharacterizationDataset data;
    data.shots = shots;

    auto add_setting = [&](const Eigen::Vector3d& powers) {
        if ((powers.array() > limit).any() || (powers.array() < 0.0).any())
            throw std::domain_error("generate_characterization: setting violates the power limit");
        data.settings_mw.push_back(powers);
    };

    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < power_levels; ++l) {
            Eigen::Vector3d powers = Eigen::Vector3d::Zero();
            powers(k) = limit * l / (power_levels - 1);
            add_setting(powers);
        }
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& pair : pairs)
        for (int l = 0; l < power_levels; ++l) {
            Eigen::Vector3d powers = Eigen::Vector3d::Zero();
            powers(pair[0]) = limit * l / (power_levels - 1);
            powers(pair[1]) = limit * l / (power_levels - 1);
            add_setting(powers);
        }

    const DeviceLikelihood engine(truth);
    std::mt19937_64 rng(seed);
    for (const auto& powers : data.settings_mw) {
        const Vector10 p = setting_probabilities(engine, truth.thermal, powers);
        Vector10 cdf;
        double acc = 0.0;
        for (int i = 0; i < 10; ++i) {
            acc += p(i);
            cdf(i) = acc;
        }
        cdf(9) = 1.0;
        std::array<std::int64_t, 10> counts{};
        for (int s = 0; s < shots; ++s) {
            const double u = uniform_double(rng);
            int outcome = 0;
            while (outcome < 9 && u >= cdf(outcome)) ++outcome;
            ++counts[outcome];
        }
        data.counts.push_back(counts);
    }
    return data;
}

FitResult fit_model(const CharacterizationDataset& data, const DeviceModel& initial,
                    const FitOptions& options) {
    if (data.settings_mw.empty()) throw std::invalid_argument("fit_model: empty dataset");

    auto negative_log_likelihood = [&](const Eigen::VectorXd& x) {
        const DeviceModel m = unpack(x, initial);
        const DeviceLikelihood engine(m);
        double nll = 0.0;
        for (std::size_t s = 0; s < data.settings_mw.size(); ++s) {
            const Vector10 p = setting_probabilities(engine, m.thermal, data.settings_mw[s]);
            for (int i = 0; i < 10; ++i)
                if (data.counts[s][i] > 0)
                    nll -= data.counts[s][i] * std::log(std::max(p(i), 1e-300));
        }
        return nll;
    };

    const Eigen::VectorXd x0 = pack(initial);
    std::mt19937_64 rng(options.seed);

    Eigen::VectorXd best_x = x0;
    double best_value = negative_log_likelihood(x0);
    bool converged = false;

    for (int start = 0; start < options.multi_starts; ++start) {
        Eigen::VectorXd x = x0;
        if (start > 0)
            for (int i = 0; i < kParamCount; ++i)
                x(i) += options.jitter_scale * normal_draw(rng);

        double value = negative_log_likelihood(x);
        for (int pass = 0; pass < options.passes_per_start; ++pass) {
            NelderMeadOptions nm;
            nm.max_iterations = options.max_iterations_per_pass;
            nm.initial_step = pass == 0 ? 0.3 : 0.05;
            nm.x_tolerance = 1e-7;
            nm.f_tolerance = 1e-9;
            const NelderMeadResult result = nelder_mead(negative_log_likelihood, x, nm);
            const double improvement = value - result.value;
            x = result.x;
            value = result.value;
            if (improvement < 1e-7 * std::max(1.0, std::abs(value))) {
                if (value <= best_value) converged = true;
                break;
            }
        }
        if (value < best_value) {
            best_value = value;
            best_x = x;
        }
    }

    FitResult out;
    out.model = unpack(best_x, initial);
    out.objective = best_value;
    out.converged = converged;
    out.parameter_names = parameter_names();

    // Curvature probe along each packed axis; near-flat directions are not
    // identified by the dataset.
    out.curvature.resize(kParamCount);
    const double h = 0.05;
    for (int i = 0; i < kParamCount; ++i) {
        Eigen::VectorXd hi = best_x, lo = best_x;
        hi(i) += h;
        lo(i) -= h;
        out.curvature(i) = (negative_log_likelihood(hi) - 2.0 * best_value +
                            negative_log_likelihood(lo)) /
                           (h * h);
    }
    const double scale = std::max(1.0, out.curvature.maxCoeff());
    for (int i = 0; i < kParamCount; ++i)
        if (out.curvature(i) < options.weak_curvature_threshold * scale)
            out.weak_parameters.push_back(out.parameter_names[i]);
    return out;
}

FitReport fit_report(const DeviceModel& fitted, const CharacterizationDataset& data) {
    FitReport report;
    if (data.settings_mw.empty()) {
        report.residuals.resize(0, 10);
        return report;
    }

    const DeviceLikelihood engine(fitted);
    report.residuals.resize(static_cast<Eigen::Index>(data.settings_mw.size()), 10);
    for (std::size_t s = 0; s < data.settings_mw.size(); ++s) {
        const Vector10 p = setting_probabilities(engine, fitted.thermal, data.settings_mw[s]);
        SettingReport sr;
        sr.setting_mw = data.settings_mw[s];
        for (int i = 0; i < 10; ++i) {
            const double expected = data.shots * p(i);
            const double observed = static_cast<double>(data.counts[s][i]);
            if (expected > 1e-9) {
                const double r = (observed - expected) / std::sqrt(expected);
                report.residuals(static_cast<Eigen::Index>(s), i) = r;
                sr.chi_square += r * r;
                ++sr.dof;
            } else {
                report.residuals(static_cast<Eigen::Index>(s), i) = 0.0;
            }
        }
        sr.dof = std::max(0, sr.dof - 1);  // one constraint: counts sum to shots
        report.total_chi_square += sr.chi_square;
        report.total_dof += sr.dof;
        report.settings.push_back(sr);
    }
    report.reduced_chi_square =
        report.total_dof > 0 ? report.total_chi_square / report.total_dof : 0.0;
    return report;
}

}  // namespace qmetro

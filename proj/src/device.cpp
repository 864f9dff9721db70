#include "qmetro/device.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qmetro/rng.hpp"

namespace qmetro {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::Matrix2cd coupler(double r) {
    if (!(r > 0.0 && r < 1.0))
        throw std::invalid_argument("quarter_unitary: reflectivity must lie strictly inside (0, 1)");
    const double t = std::sqrt(r);
    const double k = std::sqrt(1.0 - r);
    Eigen::Matrix2cd b;
    b << cxd(t, 0.0), cxd(0.0, k), cxd(0.0, k), cxd(t, 0.0);
    return b;
}

Eigen::Matrix4cd coupler_layer(double r_top, double r_bottom) {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m.block<2, 2>(0, 0) = coupler(r_top);
    m.block<2, 2>(2, 2) = coupler(r_bottom);
    return m;
}

double wrap_two_pi(double x) {
    double y = std::fmod(x, kTwoPi);
    if (y < 0.0) y += kTwoPi;
    return y;
}

}  // namespace

ThermalModel ThermalModel::nominal() {
    ThermalModel t;
    t.alpha = Eigen::Matrix3d::Identity() * (kTwoPi / 22.0);
    t.alpha2 = Eigen::Vector3d::Zero();
    t.phi0 = Eigen::Vector3d::Zero();
    t.r1 = Eigen::Vector3d::Constant(0.11);
    t.r2 = Eigen::Vector3d::Constant(1.0e-5);
    t.power_limit = 30.0;
    return t;
}

DeviceModel DeviceModel::ideal() {
    DeviceModel m;
    m.thermal = ThermalModel::nominal();
    return m;
}

DeviceModel DeviceModel::perturbed(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    DeviceModel m;

    auto draw_quarter = [&rng](QuarterParams& q) {
        for (double& r : q.reflectivities) r = uniform_range(rng, 0.45, 0.55);
    };
    draw_quarter(m.quarter_in);
    draw_quarter(m.quarter_out);

    m.visibility = 0.95;
    for (int i = 0; i < 10; ++i) m.outcome_efficiencies(i) = uniform_range(rng, 0.8, 1.0);

    ThermalModel t = ThermalModel::nominal();
    for (int i = 0; i < 3; ++i) {
        const double diag = (kTwoPi / 22.0) * uniform_range(rng, 0.9, 1.1);
        t.alpha(i, i) = diag;
        for (int k = 0; k < 3; ++k)
            if (k != i) t.alpha(i, k) = diag * uniform_range(rng, 0.0, 0.2);
        t.alpha2(i) = uniform_range(rng, 0.5e-4, 2.0e-4);
        t.phi0(i) = uniform_range(rng, -0.2, 0.2);
        t.r1(i) = 0.11 * uniform_range(rng, 0.9, 1.1);
        t.r2(i) = 1.0e-5 * uniform_range(rng, 0.5, 2.0);
    }
    m.thermal = t;
    return m;
}

Eigen::Matrix4cd quarter_unitary(const QuarterParams& q) {
    const auto& r = q.reflectivities;
    const Eigen::Matrix4cd layer_in = coupler_layer(r[0], r[1]);
    const Eigen::Matrix4cd layer_out = coupler_layer(r[2], r[3]);

    Eigen::Matrix4cd swap23 = Eigen::Matrix4cd::Zero();
    swap23(0, 0) = 1.0;
    swap23(1, 2) = 1.0;
    swap23(2, 1) = 1.0;
    swap23(3, 3) = 1.0;

    Eigen::Matrix4cd internal = Eigen::Matrix4cd::Identity();
    internal(0, 0) = std::polar(1.0, q.phase_hi);
    internal(3, 3) = std::polar(1.0, q.phase_lo);

    return layer_out * internal * swap23 * layer_in;
}

Eigen::Matrix4cd phase_layer_unitary(const PhaseLayer& p) {
    Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
    u(0, 0) = std::polar(1.0, p.phi_d);
    u(1, 1) = std::polar(1.0, p.phi_c);
    u(2, 2) = std::polar(1.0, p.phi_b);
    u(3, 3) = std::polar(1.0, p.phi_a);
    return u;
}

Eigen::Matrix4cd device_unitary(const DeviceModel& model, const Eigen::Vector3d& unknown,
                                const Eigen::Vector3d& control) {
    const Eigen::Vector3d total = unknown + control;
    PhaseLayer layer;
    layer.phi_a = total(0);
    layer.phi_b = total(1);
    layer.phi_c = 0.0;  // reference arm
    layer.phi_d = total(2);
    return quarter_unitary(model.quarter_out) * phase_layer_unitary(layer) *
           quarter_unitary(model.quarter_in);
}

Vector10 likelihood(const DeviceModel& model, const Eigen::Vector3d& unknown,
                    const Eigen::Vector3d& control, const ModeOccupation& input) {
    if (input.modes() != 4 || input.photons() != 2)
        throw std::invalid_argument("likelihood: input must be a 2-photon, 4-mode occupation");
    const Eigen::Matrix4cd u = device_unitary(model, unknown, control);
    const Eigen::VectorXd p_ind = probabilities_indistinguishable(u, input);
    const Eigen::VectorXd p_dist = probabilities_distinguishable(u, input);
    Eigen::VectorXd p = mix_visibility(p_ind, p_dist, model.visibility);
    p.array() *= model.outcome_efficiencies.array();
    return p / p.sum();
}

ModeOccupation standard_input() { return ModeOccupation{0, 0, 1, 1}; }

Eigen::Vector3d currents_to_powers(const ThermalModel& thermal,
                                   const Eigen::Vector3d& currents_ma) {
    Eigen::Vector3d powers;
    for (int k = 0; k < 3; ++k) {
        const double i2 = currents_ma(k) * currents_ma(k);
        const double den = 1.0 - thermal.r2(k) * i2;
        if (den <= 0.0)
            throw std::domain_error("currents_to_powers: resistance model breaks down at this current");
        powers(k) = thermal.r1(k) * i2 / den;
        if (powers(k) > thermal.power_limit)
            throw std::domain_error("currents_to_powers: dissipated power exceeds the safety limit");
    }
    return powers;
}

Eigen::Vector3d powers_to_phases(const ThermalModel& thermal, const Eigen::Vector3d& powers_mw) {
    for (int k = 0; k < 3; ++k)
        if (powers_mw(k) < 0.0 || powers_mw(k) > thermal.power_limit)
            throw std::domain_error("powers_to_phases: power outside [0, power_limit]");
    return thermal.alpha * powers_mw + thermal.alpha2.cwiseProduct(powers_mw.cwiseAbs2()) +
           thermal.phi0;
}

Eigen::Vector3d phases_to_powers(const ThermalModel& thermal,
                                 const Eigen::Vector3d& target_deltas) {
    Eigen::Vector3d base;
    for (int i = 0; i < 3; ++i) base(i) = wrap_two_pi(target_deltas(i));

    const Eigen::Matrix3d alpha_inv = thermal.alpha.inverse();

    // Try 2*pi representatives in order of increasing total shift; for each,
    // fixed-point iterate around the linear solve to absorb the quadratic
    // self-term and the cross-talk.
    constexpr int kShiftMax = 2;
    struct Combo {
        int total;
        Eigen::Vector3i k;
    };
    std::vector<Combo> combos;
    for (int ka = 0; ka <= kShiftMax; ++ka)
        for (int kb = 0; kb <= kShiftMax; ++kb)
            for (int kd = 0; kd <= kShiftMax; ++kd)
                combos.push_back({ka + kb + kd, Eigen::Vector3i(ka, kb, kd)});
    std::stable_sort(combos.begin(), combos.end(),
                     [](const Combo& a, const Combo& b) { return a.total < b.total; });

    for (const Combo& combo : combos) {
        const Eigen::Vector3d target = base + kTwoPi * combo.k.cast<double>();
        Eigen::Vector3d omega = Eigen::Vector3d::Zero();
        bool ok = false;
        for (int it = 0; it < 200; ++it) {
            const Eigen::Vector3d next =
                alpha_inv * (target - thermal.alpha2.cwiseProduct(omega.cwiseAbs2()));
            const double step = (next - omega).cwiseAbs().maxCoeff();
            omega = next;
            if (step < 1e-12) {
                ok = true;
                break;
            }
        }
        if (!ok) continue;
        if ((omega.array() < -1e-9).any() || (omega.array() > thermal.power_limit + 1e-9).any())
            continue;
        omega = omega.cwiseMax(0.0).cwiseMin(thermal.power_limit);
        const Eigen::Vector3d reached = powers_to_phases(thermal, omega) - thermal.phi0;
        Eigen::Vector3d residual;
        for (int i = 0; i < 3; ++i) {
            double d = wrap_two_pi(reached(i) - base(i));
            if (d > kPi) d -= kTwoPi;
            residual(i) = d;
        }
        if (residual.cwiseAbs().maxCoeff() < 1e-6) return omega;
    }
    throw std::domain_error("phases_to_powers: no solution within the power budget");
}

// ---------------------------------------------------------------------------
// JSON serialization

std::string device_to_json(const DeviceModel& model) {
    using nlohmann::json;
    auto quarter = [](const QuarterParams& q) {
        return json{{"phase_hi", q.phase_hi},
                    {"phase_lo", q.phase_lo},
                    {"reflectivities", q.reflectivities}};
    };
    json t;
    t["alpha"] = json::array();
    for (int i = 0; i < 3; ++i)
        t["alpha"].push_back({model.thermal.alpha(i, 0), model.thermal.alpha(i, 1),
                              model.thermal.alpha(i, 2)});
    t["alpha2"] = {model.thermal.alpha2(0), model.thermal.alpha2(1), model.thermal.alpha2(2)};
    t["phi0"] = {model.thermal.phi0(0), model.thermal.phi0(1), model.thermal.phi0(2)};
    t["r1"] = {model.thermal.r1(0), model.thermal.r1(1), model.thermal.r1(2)};
    t["r2"] = {model.thermal.r2(0), model.thermal.r2(1), model.thermal.r2(2)};
    t["power_limit"] = model.thermal.power_limit;

    json j;
    j["quarter_in"] = quarter(model.quarter_in);
    j["quarter_out"] = quarter(model.quarter_out);
    j["thermal"] = t;
    j["visibility"] = model.visibility;
    j["outcome_efficiencies"] = json::array();
    for (int i = 0; i < 10; ++i) j["outcome_efficiencies"].push_back(model.outcome_efficiencies(i));
    return j.dump(2);
}

DeviceModel device_from_json(const std::string& text) {
    using nlohmann::json;
    const json j = json::parse(text);

    auto quarter = [](const json& q) {
        QuarterParams out;
        out.phase_hi = q.at("phase_hi").get<double>();
        out.phase_lo = q.at("phase_lo").get<double>();
        const auto refl = q.at("reflectivities");
        if (refl.size() != 4)
            throw std::invalid_argument("device_from_json: quarter needs 4 reflectivities");
        for (int i = 0; i < 4; ++i) out.reflectivities[i] = refl.at(i).get<double>();
        return out;
    };

    DeviceModel m;
    m.quarter_in = quarter(j.at("quarter_in"));
    m.quarter_out = quarter(j.at("quarter_out"));

    const json& t = j.at("thermal");
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) m.thermal.alpha(i, k) = t.at("alpha").at(i).at(k).get<double>();
    for (int i = 0; i < 3; ++i) {
        m.thermal.alpha2(i) = t.at("alpha2").at(i).get<double>();
        m.thermal.phi0(i) = t.at("phi0").at(i).get<double>();
        m.thermal.r1(i) = t.at("r1").at(i).get<double>();
        m.thermal.r2(i) = t.at("r2").at(i).get<double>();
    }
    m.thermal.power_limit = t.at("power_limit").get<double>();

    m.visibility = j.at("visibility").get<double>();
    const auto& eff = j.at("outcome_efficiencies");
    if (eff.size() != 10)
        throw std::invalid_argument("device_from_json: need 10 outcome efficiencies");
    for (int i = 0; i < 10; ++i) m.outcome_efficiencies(i) = eff.at(i).get<double>();
    return m;
}

}  // namespace qmetro

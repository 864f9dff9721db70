#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qmetro/device.hpp"
#include "qmetro/likelihood.hpp"

using namespace qmetro;

namespace {
constexpr double kPi = std::numbers::pi;
const Eigen::Vector3d kZero = Eigen::Vector3d::Zero();
}  // namespace

TEST_CASE("balanced quarter reproduces the published matrix entrywise") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> phase(0.0, 2 * kPi);
    for (int rep = 0; rep < 12; ++rep) {
        const double phi1 = phase(rng), phi2 = phase(rng);
        QuarterParams q;
        q.phase_hi = phi2;
        q.phase_lo = phi1;
        const Eigen::Matrix4cd u = quarter_unitary(q);
        CHECK((u - oracle::ideal_quarter(phi1, phi2)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("quarter is unitary for any reflectivities") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> refl(0.05, 0.95);
    std::uniform_real_distribution<double> phase(0.0, 2 * kPi);
    for (int rep = 0; rep < 10; ++rep) {
        QuarterParams q;
        q.phase_hi = phase(rng);
        q.phase_lo = phase(rng);
        for (double& r : q.reflectivities) r = refl(rng);
        const Eigen::Matrix4cd u = quarter_unitary(q);
        CHECK((u.adjoint() * u - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("detuned couplers change the magnitude pattern") {
    QuarterParams q;
    for (double& r : q.reflectivities) r = 0.45;
    const Eigen::Matrix4cd u = quarter_unitary(q);
    CHECK((u.adjoint() * u - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((u.cwiseAbs() - Eigen::Matrix4d::Constant(0.5)).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("quarter rejects reflectivities outside (0,1)") {
    QuarterParams q;
    q.reflectivities[2] = 1.0;
    CHECK_THROWS_AS(quarter_unitary(q), std::invalid_argument);
    q.reflectivities[2] = 0.0;
    CHECK_THROWS_AS(quarter_unitary(q), std::invalid_argument);
}

TEST_CASE("phase layer unitary") {
    CHECK((phase_layer_unitary({}) - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);

    PhaseLayer pa;
    pa.phi_a = kPi;
    Eigen::Vector4cd expected(1, 1, 1, -1);
    CHECK((phase_layer_unitary(pa).diagonal() - expected).cwiseAbs().maxCoeff() < 1e-14);

    PhaseLayer pd;
    pd.phi_d = kPi / 2;
    expected << cxd(0, 1), 1, 1, 1;
    CHECK((phase_layer_unitary(pd).diagonal() - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("device unitary composition and additivity") {
    const DeviceModel ideal = DeviceModel::ideal();

    const Eigen::Matrix4cd zero_phases = device_unitary(ideal, kZero, kZero);
    const Eigen::Matrix4cd product =
        quarter_unitary(ideal.quarter_out) * quarter_unitary(ideal.quarter_in);
    CHECK((zero_phases - product).cwiseAbs().maxCoeff() < 1e-14);

    const Eigen::Vector3d a(0.4, 1.1, 2.0), c(0.2, 0.9, 0.1);
    CHECK((device_unitary(ideal, a, c) - device_unitary(ideal, a + c, kZero))
              .cwiseAbs()
              .maxCoeff() < 1e-13);
}

TEST_CASE("common shift of all four internal phases is unobservable") {
    const DeviceModel ideal = DeviceModel::ideal();
    const ModeOccupation input = standard_input();
    const double shift = 1.234;

    PhaseLayer base;
    base.phi_a = 0.7;
    base.phi_b = 1.9;
    base.phi_c = 0.0;
    base.phi_d = 2.4;
    PhaseLayer shifted = base;
    shifted.phi_a += shift;
    shifted.phi_b += shift;
    shifted.phi_c += shift;
    shifted.phi_d += shift;

    const Eigen::Matrix4cd u0 = quarter_unitary(ideal.quarter_out) * phase_layer_unitary(base) *
                                quarter_unitary(ideal.quarter_in);
    const Eigen::Matrix4cd u1 = quarter_unitary(ideal.quarter_out) * phase_layer_unitary(shifted) *
                                quarter_unitary(ideal.quarter_in);
    CHECK((probabilities_indistinguishable(u0, input) - probabilities_indistinguishable(u1, input))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("probe state after the input quarter matches the published amplitudes") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> phase(0.0, 2 * kPi);
    for (int rep = 0; rep < 10; ++rep) {
        const double phi1 = phase(rng);
        QuarterParams q;
        q.phase_lo = phi1;
        q.phase_hi = phase(rng);  // no effect on this input
        const PureState probe = evolve(quarter_unitary(q), standard_input());
        CHECK(oracle::distance_up_to_global_phase(probe.amplitudes, oracle::probe_amplitudes(phi1)) <
              1e-10);
    }
}

TEST_CASE("likelihood reduces to the pure photon classes at V=1 and V=0") {
    DeviceModel model = DeviceModel::ideal();
    const Eigen::Vector3d phases(0.3, 1.2, 2.2);
    const ModeOccupation input = standard_input();
    const Eigen::Matrix4cd u = device_unitary(model, phases, kZero);

    model.visibility = 1.0;
    CHECK((likelihood(model, phases, kZero, input) - probabilities_indistinguishable(u, input))
              .cwiseAbs()
              .maxCoeff() < 1e-13);

    model.visibility = 0.0;
    CHECK((likelihood(model, phases, kZero, input) - probabilities_distinguishable(u, input))
              .cwiseAbs()
              .maxCoeff() < 1e-13);
}

TEST_CASE("uniform efficiencies cancel in the renormalization") {
    DeviceModel model = DeviceModel::ideal();
    const Eigen::Vector3d phases(0.9, 0.2, 1.4);
    const Vector10 base = likelihood(model, phases, kZero, standard_input());
    model.outcome_efficiencies = Vector10::Constant(0.37);
    const Vector10 scaled = likelihood(model, phases, kZero, standard_input());
    CHECK((base - scaled).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("input-quarter phases act as a translation of the unknowns") {
    // phi2 is invisible for the |0011> input; phi1 shifts (phi_A, phi_B) by
    // itself. In particular the bound landscape is phi1/phi2 independent.
    DeviceModel model = DeviceModel::ideal();
    const Eigen::Vector3d phases(0.7, 1.3, 2.1);
    const Vector10 base = likelihood(model, phases, kZero, standard_input());

    model.quarter_in.phase_hi = 1.9;  // phi2-like
    CHECK((likelihood(model, phases, kZero, standard_input()) - base).cwiseAbs().maxCoeff() <
          1e-12);

    const double phi1 = 0.9;
    model.quarter_in.phase_lo = phi1;
    const Eigen::Vector3d shifted = phases + Eigen::Vector3d(phi1, phi1, 0.0);
    DeviceModel plain = DeviceModel::ideal();
    CHECK((likelihood(model, phases, kZero, standard_input()) -
           likelihood(plain, shifted, kZero, standard_input()))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("likelihood symmetry: joint pi shift of phi_A and phi_B") {
    const DeviceModel model = DeviceModel::ideal();
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> phase(0.0, 2 * kPi);
    for (int rep = 0; rep < 8; ++rep) {
        const Eigen::Vector3d phases(phase(rng), phase(rng), phase(rng));
        const Eigen::Vector3d shifted = phases + Eigen::Vector3d(kPi, kPi, 0.0);
        CHECK((likelihood(model, phases, kZero, standard_input()) -
               likelihood(model, shifted, kZero, standard_input()))
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
        // and 2*pi periodicity per axis
        for (int k = 0; k < 3; ++k) {
            Eigen::Vector3d wrapped = phases;
            wrapped(k) += 2 * kPi;
            CHECK((likelihood(model, phases, kZero, standard_input()) -
                   likelihood(model, wrapped, kZero, standard_input()))
                      .cwiseAbs()
                      .maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("thermal power law") {
    ThermalModel t = ThermalModel::nominal();
    CHECK(currents_to_powers(t, Eigen::Vector3d::Zero()).cwiseAbs().maxCoeff() < 1e-15);

    t.r1 = Eigen::Vector3d::Constant(0.5);
    t.r2 = Eigen::Vector3d::Zero();
    const Eigen::Vector3d i(2.0, 3.0, 4.0);
    CHECK((currents_to_powers(t, i) - 0.5 * i.cwiseAbs2()).cwiseAbs().maxCoeff() < 1e-12);

    t.r1 = Eigen::Vector3d::Constant(1.0);
    t.r2 = Eigen::Vector3d::Constant(0.01);
    t.power_limit = 50.0;
    const Eigen::Vector3d w = currents_to_powers(t, Eigen::Vector3d::Constant(3.0));
    CHECK(w(0) == doctest::Approx(9.0 / (1.0 - 0.09)).epsilon(1e-12));

    // model breakdown at 1 - r2 i^2 <= 0
    CHECK_THROWS_AS(currents_to_powers(t, Eigen::Vector3d::Constant(10.0)), std::domain_error);
    // safety clamp
    t.r2 = Eigen::Vector3d::Zero();
    t.power_limit = 30.0;
    CHECK_THROWS_AS(currents_to_powers(t, Eigen::Vector3d::Constant(6.0)), std::domain_error);
}

TEST_CASE("power to phase map") {
    ThermalModel t = ThermalModel::nominal();
    t.phi0 = Eigen::Vector3d(0.1, -0.2, 0.3);
    CHECK((powers_to_phases(t, Eigen::Vector3d::Zero()) - t.phi0).cwiseAbs().maxCoeff() < 1e-15);

    // a 2*pi shift costs 22 mW on the driving resistor
    Eigen::Vector3d w = Eigen::Vector3d::Zero();
    w(1) = 22.0;
    const Eigen::Vector3d phi = powers_to_phases(t, w);
    CHECK(phi(1) - t.phi0(1) == doctest::Approx(2 * kPi).epsilon(1e-12));
    CHECK(phi(0) == doctest::Approx(t.phi0(0)).epsilon(1e-12));

    CHECK_THROWS_AS(powers_to_phases(t, Eigen::Vector3d::Constant(31.0)), std::domain_error);
}

TEST_CASE("control inversion round trip") {
    ThermalModel t = ThermalModel::nominal();
    CHECK(phases_to_powers(t, Eigen::Vector3d::Zero()).cwiseAbs().maxCoeff() < 1e-12);

    // diagonal response: closed form
    const Eigen::Vector3d target(0.5, 4.0, 2.2);
    const Eigen::Vector3d w = phases_to_powers(t, target);
    CHECK((w - target * 22.0 / (2 * kPi)).cwiseAbs().maxCoeff() < 1e-9);

    // random cross-talk below 20% of the diagonal, with quadratic terms
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> frac(0.0, 0.2);
    std::uniform_real_distribution<double> phase(0.0, 2 * kPi);
    for (int rep = 0; rep < 20; ++rep) {
        ThermalModel tc = ThermalModel::nominal();
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k)
                if (i != k) tc.alpha(i, k) = tc.alpha(i, i) * frac(rng);
        tc.alpha2 = Eigen::Vector3d::Constant(1e-4);
        tc.phi0 = Eigen::Vector3d(0.05, -0.1, 0.2);
        const Eigen::Vector3d delta(phase(rng), phase(rng), phase(rng));
        const Eigen::Vector3d powers = phases_to_powers(tc, delta);
        CHECK((powers.array() >= 0.0).all());
        CHECK((powers.array() <= tc.power_limit).all());
        Eigen::Vector3d residual = powers_to_phases(tc, powers) - tc.phi0 - delta;
        for (int i = 0; i < 3; ++i)
            residual(i) = std::remainder(residual(i), 2 * kPi);
        CHECK(residual.cwiseAbs().maxCoeff() < 1e-6);
    }

    // unreachable budget: a weak heater cannot produce 2*pi within 30 mW
    ThermalModel weak = ThermalModel::nominal();
    weak.alpha = Eigen::Matrix3d::Identity() * (2 * kPi / 50.0);
    CHECK_THROWS_AS(phases_to_powers(weak, Eigen::Vector3d(4.2, 0.0, 0.0)), std::domain_error);
}

TEST_CASE("device JSON round trip") {
    const DeviceModel m = DeviceModel::perturbed(kDefaultPerturbedSeed);
    const DeviceModel back = device_from_json(device_to_json(m));
    CHECK((back.thermal.alpha - m.thermal.alpha).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((back.outcome_efficiencies - m.outcome_efficiencies).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(back.visibility == doctest::Approx(m.visibility));
    for (int i = 0; i < 4; ++i) {
        CHECK(back.quarter_in.reflectivities[i] == doctest::Approx(m.quarter_in.reflectivities[i]));
        CHECK(back.quarter_out.reflectivities[i] ==
              doctest::Approx(m.quarter_out.reflectivities[i]));
    }
}

TEST_CASE("perturbed device stays within the documented ranges") {
    const DeviceModel m = DeviceModel::perturbed(123);
    for (double r : m.quarter_in.reflectivities) CHECK((r >= 0.45 && r <= 0.55));
    for (double r : m.quarter_out.reflectivities) CHECK((r >= 0.45 && r <= 0.55));
    CHECK(m.visibility == doctest::Approx(0.95));
    for (int i = 0; i < 10; ++i)
        CHECK((m.outcome_efficiencies(i) >= 0.8 && m.outcome_efficiencies(i) <= 1.0));
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            if (i != k) CHECK(m.thermal.alpha(i, k) <= 0.2 * m.thermal.alpha(i, i) + 1e-12);
}

TEST_CASE("compiled evaluator agrees with the direct likelihood") {
    for (const DeviceModel& model :
         {DeviceModel::ideal(), DeviceModel::perturbed(kDefaultPerturbedSeed)}) {
        const DeviceLikelihood engine(model);
        std::mt19937_64 rng(41);
        std::uniform_real_distribution<double> phase(0.0, 2 * kPi);
        for (int rep = 0; rep < 20; ++rep) {
            const Eigen::Vector3d phases(phase(rng), phase(rng), phase(rng));
            const Vector10 direct = likelihood(model, phases, kZero, standard_input());
            CHECK((engine.probabilities(phases) - direct).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

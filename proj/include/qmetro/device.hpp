// Parameterized model of the 4-arm integrated interferometer: two quarter
// splitters around a layer of thermally actuated phases, plus two-photon
// interference visibility and per-outcome detection efficiencies.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>

#include "qmetro/fock.hpp"

namespace qmetro {

using Vector10 = Eigen::Matrix<double, 10, 1>;

/// One quarter: two layers of directional couplers around a waveguide
/// crossing, with an internal phase on each of the outer arms.
///
/// quarter_unitary composes it as
///   (B(r3) (+) B(r4)) . diag(e^{i phase_hi}, 1, 1, e^{i phase_lo})
///                     . SWAP_23 . (B(r1) (+) B(r2))
/// with coupler B(r) = [[sqrt(r), i sqrt(1-r)], [i sqrt(1-r), sqrt(r)]].
/// At r = 1/2 this is the ideal balanced quarter, entrywise.
struct QuarterParams {
    double phase_hi = 0.0;  // internal phase on mode 1 after the crossing
    double phase_lo = 0.0;  // internal phase on mode 4
    std::array<double, 4> reflectivities{0.5, 0.5, 0.5, 0.5};  // r1, r2, r3, r4
};

/// Phases on the four interferometer arms. Mode order is fixed so that modes
/// 1..4 carry phi_d, phi_c, phi_b, phi_a respectively; only the differences
/// to the reference arm C are observable.
struct PhaseLayer {
    double phi_a = 0.0;
    double phi_b = 0.0;
    double phi_c = 0.0;
    double phi_d = 0.0;
};

/// Electro-thermal response of one bank of three resistors, each primarily
/// driving one of the phases (A, B, D) with linear cross-talk onto the
/// others and a quadratic self-term.
struct ThermalModel {
    Eigen::Matrix3d alpha;    // rad/mW; alpha(i,k) = response of phase i to resistor k
    Eigen::Vector3d alpha2;   // rad/mW^2 quadratic self-response
    Eigen::Vector3d phi0;     // rad, zero-power offsets
    Eigen::Vector3d r1;       // mW/mA^2
    Eigen::Vector3d r2;       // 1/mA^2 current dependence of the resistance
    double power_limit = 30.0;  // mW per resistor, safety clamp

    /// Nominal bank: 2*pi phase per 22 mW on the diagonal, no cross-talk,
    /// no quadratic term, 0.11 mW/mA^2 resistances.
    static ThermalModel nominal();
};

struct DeviceModel {
    QuarterParams quarter_in;
    QuarterParams quarter_out;
    ThermalModel thermal;
    double visibility = 1.0;
    Vector10 outcome_efficiencies = Vector10::Ones();

    static DeviceModel ideal();

    /// Synthetic stand-in for a characterized real device: coupler
    /// reflectivities in [0.45, 0.55], visibility 0.95, outcome efficiencies
    /// in [0.8, 1.0], thermal cross-talk below 20% of the diagonal. All
    /// draws come from the given seed.
    static DeviceModel perturbed(std::uint64_t seed);
};

/// Seed of the default synthetic "real device" used by bound reproductions.
inline constexpr std::uint64_t kDefaultPerturbedSeed = 8;

Eigen::Matrix4cd quarter_unitary(const QuarterParams& q);
Eigen::Matrix4cd phase_layer_unitary(const PhaseLayer& p);

/// Full device transformation at a phase setting. unknown and control are
/// (phi_A, phi_B, phi_D) triples entering additively; the reference phase
/// phi_C is pinned to zero.
Eigen::Matrix4cd device_unitary(const DeviceModel& model, const Eigen::Vector3d& unknown,
                                const Eigen::Vector3d& control);

/// 10-outcome distribution for a two-photon input:
/// eta .* [V p_ind + (1-V) p_dist], renormalized (post-selection on detected
/// two-photon events).
Vector10 likelihood(const DeviceModel& model, const Eigen::Vector3d& unknown,
                    const Eigen::Vector3d& control, const ModeOccupation& input);

/// omega_k = R1_k i_k^2 / (1 - R2_k i_k^2). Throws when the denominator is
/// not positive (model breakdown) or a power exceeds the safety limit.
Eigen::Vector3d currents_to_powers(const ThermalModel& thermal,
                                   const Eigen::Vector3d& currents_ma);

/// phi_i = sum_k alpha(i,k) omega_k + alpha2_i omega_i^2 + phi0_i, where the
/// quadratic term uses the power of the resistor primarily driving phase i.
Eigen::Vector3d powers_to_phases(const ThermalModel& thermal, const Eigen::Vector3d& powers_mw);

/// Inverts the cross-talk system: finds powers in [0, power_limit] whose
/// phase shifts equal the targets modulo 2*pi (residual below 1e-6 rad).
/// target_deltas are phases on top of the zero-power offsets phi0. Throws
/// when no 2*pi representative fits the power budget.
Eigen::Vector3d phases_to_powers(const ThermalModel& thermal,
                                 const Eigen::Vector3d& target_deltas);

/// Two-photon input used throughout the estimation protocol.
ModeOccupation standard_input();

// JSON round trip (schema: schemas/device_model.schema.json).
std::string device_to_json(const DeviceModel& model);
DeviceModel device_from_json(const std::string& text);

}  // namespace qmetro

// Reproduction driver: bound tables and scans, adaptive campaigns, and
// synthetic calibration runs, emitting CSV/JSON artifacts plus a manifest
// that reproduces each run bit-identically.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "qmetro/adaptive.hpp"
#include "qmetro/bounds.hpp"
#include "qmetro/calibration.hpp"
#include "qmetro/device.hpp"

namespace qmetro {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DeviceSpec {
    enum class Kind { ideal, perturbed, file } kind = Kind::ideal;
    std::uint64_t seed = kDefaultPerturbedSeed;
    std::string path;
};

struct ModeSpec {
    PhotonMode mode = PhotonMode::indistinguishable;
    std::optional<double> visibility_override;
};

struct BoundsConfig {
    int grid_points = 30;
    int density_samples = 10000;
    std::vector<double> thresholds{2.8};
    int slice_grid = 60;
};

struct CampaignConfig {
    int n_triplets = 12;
    int repetitions = 30;
    int n_probes = 100;
};

struct CalibrationConfig {
    int power_levels = 10;
    int shots = 100000;
    FitOptions fit;
};

struct RunConfig {
    DeviceSpec device;
    ModeSpec mode;
    std::uint64_t seed = 20220901;
    int threads = 0;  // 0: hardware concurrency
    std::filesystem::path out_dir = "out";
    BoundsConfig bounds;
    SmcConfig smc;
    int n_candidates = 30;
    double control_span = 2.0 * std::numbers::pi;
    CampaignConfig campaign;
    CalibrationConfig calibration;
};

/// Parse a config document; throws ConfigError on malformed input.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Materialize the device model a config refers to, with the photon-mode
/// adjustment applied.
DeviceModel resolve_device(const RunConfig& config);

int cmd_bounds(const RunConfig& config);
int cmd_estimate(const RunConfig& config);
int cmd_calibrate(const RunConfig& config);

/// Full command-line entry point (subcommands bounds, estimate, calibrate).
/// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
int cli_main(int argc, const char* const* argv);

}  // namespace qmetro

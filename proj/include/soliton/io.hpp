#pragma once

// Text emission for trajectories, scans and run manifests. All numbers are
// written locale-independently in shortest round-trip form.

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "soliton/integrator.hpp"
#include "soliton/shooting.hpp"

namespace soliton {

inline constexpr std::string_view kToolVersion = "0.3.0";

/// Shortest decimal that parses back to v; "nan", "inf" and "-inf" otherwise.
std::string format_double(double v);

/// format_double, or "nan" when the value is undefined.
std::string format_optional(const std::optional<double>& v);

inline constexpr std::array<std::string_view, 22> kTrajectoryColumns{
    "t",     "f",  "fdot", "h",    "hdot", "u",    "udot", "xi", "W",   "E",            "F",
    "theta", "G",  "Hcal", "Q",    "Lcal", "Fcal", "S",    "trL", "ham_residual", "normal_residual", "sol"};

inline constexpr std::array<std::string_view, 5> kScanColumns{"hbar", "ubar", "min_sol", "argmin_t", "termination"};

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_scan_csv(std::ostream& out, const ScanResult& result);
void write_slice_csv(std::ostream& out, const std::vector<SlicePoint>& slice);

/// Cluster list with centroid, best cell and member count per cluster.
nlohmann::json clusters_json(const std::vector<Cluster>& clusters, double threshold);

/// Static scatter of the sub-threshold cells over the scanned rectangle.
std::string scan_svg(const ScanResult& result, double threshold);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);

nlohmann::json to_json(const IntegratorConfig& config);
/// Reads the keys written by to_json; missing keys keep their defaults.
IntegratorConfig config_from_json(const nlohmann::json& j, IntegratorConfig base);

struct OutputDigest {
    std::string path;
    std::string sha256;
};

struct RunManifest {
    std::string command;
    nlohmann::json options;  // resolved flat options; feeding them back reruns the command
    nlohmann::json preset;
    nlohmann::json config;
    std::vector<std::string> notes;
    double duration_seconds = 0.0;
    std::vector<OutputDigest> outputs;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

/// Writes `data` to `path` and returns its digest entry.
OutputDigest write_output(const std::string& path, const std::string& data);

}  // namespace soliton

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "soliton/geometry.hpp"
#include "soliton/integrator.hpp"

namespace soliton {

/// Inclusive lo:hi:step range of initial values.
struct AxisRange {
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.05;

    /// Number of points lo + i*step <= hi (0 when hi < lo).
    std::size_t count() const;
    double at(std::size_t i) const { return lo + static_cast<double>(i) * step; }
};

/// Parses "lo:hi:step". Throws PreconditionError on malformed text.
AxisRange parse_range(const std::string& text);

struct ScanGrid {
    AxisRange hbar;
    AxisRange ubar;
};

/// Clamps ubar to [-(n+1)/2, (n+1)/2] and hbar to positive values.
/// Returns one message per adjustment.
std::vector<std::string> clamp_grid(ScanGrid& grid, const OrbitPreset& preset);

struct ScanCell {
    double hbar = 0.0;
    double ubar = 0.0;
    double min_sol = 0.0;
    double argmin_t = 0.0;
    std::optional<Termination> termination;  // empty when the shot raised
    std::string error;
};

struct ScanResult {
    OrbitPreset preset;
    IntegratorConfig config;
    ScanGrid grid;
    std::size_t n_hbar = 0;
    std::size_t n_ubar = 0;
    std::vector<ScanCell> cells;  // row-major: index = i * n_ubar + j

    const ScanCell& at(std::size_t i, std::size_t j) const { return cells[i * n_ubar + j]; }
};

/// Evaluates every grid point with `threads` workers (0 = hardware
/// concurrency). Cell order is fixed by (i, j) whatever the schedule.
ScanResult scan(const OrbitPreset& preset, const ScanGrid& grid, const IntegratorConfig& config,
                unsigned threads = 0);

inline constexpr double kDefaultSolThreshold = 0.005;

struct GridIndex {
    std::size_t i;
    std::size_t j;
};

struct Cluster {
    std::vector<GridIndex> members;
    double centroid_hbar = 0.0;
    double centroid_ubar = 0.0;
    double best_hbar = 0.0;
    double best_ubar = 0.0;
    double best_min_sol = 0.0;
};

/// 8-connected components of cells with min_sol < threshold, sorted by best
/// min_sol. Centroids weight each member by (threshold - min_sol).
std::vector<Cluster> find_clusters(const ScanResult& result, double threshold = kDefaultSolThreshold);

struct SlicePoint {
    double hbar;
    double min_sol;
};

/// min-SOL along the Einstein axis ubar = 0.
std::vector<SlicePoint> einstein_slice(const OrbitPreset& preset, const AxisRange& hbar,
                                       const IntegratorConfig& config, unsigned threads = 0);

/// Interior local minima of a slice, ordered by min_sol.
std::vector<SlicePoint> slice_minima(const std::vector<SlicePoint>& slice);

struct RefineOptions {
    double hbar_width = 0.05;   // initial half-width of the golden-section brackets
    double ubar_width = 0.05;
    bool fix_ubar = false;      // search along hbar only
    int max_evaluations = 200;
    int sweeps = 6;
};

struct RefineResult {
    double hbar = 0.0;
    double ubar = 0.0;
    double min_sol = 0.0;
    double seed_min_sol = 0.0;
    int evaluations = 0;
    bool budget_exhausted = false;
};

/// Coordinate-wise golden-section descent of min-SOL from a seed. Never
/// returns a point worse than the seed.
RefineResult refine(const OrbitPreset& preset, double hbar, double ubar, const IntegratorConfig& config,
                    const RefineOptions& options = {});

}  // namespace soliton

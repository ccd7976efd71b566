#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "soliton/dynamics.hpp"
#include "soliton/errors.hpp"
#include "soliton/geometry.hpp"

namespace soliton {

struct IntegratorConfig {
    double step = 0.005;
    double t_max = 50.0;
    double blowup_threshold = 1e8;
    double t0_factor = 10.0;          // series handoff at t0 = t0_factor * step ...
    std::optional<double> t0;         // ... unless given explicitly
    int record_every = 1;
    double target_sol = 0.0;          // stop once sol <= target_sol (0 disables)
    bool extended_precision = false;  // carry series and RK4 in long double

    double start_time() const { return t0 ? *t0 : t0_factor * step; }
    void validate() const;
};

/// Default config for a preset: step 0.005 and t_max = 50 / sqrt(-eps).
IntegratorConfig default_config(const OrbitPreset& preset);

/// Coefficients of the smooth solution at the singular orbit:
///   f = t + sum_k a[k] t^(2k+1),  h = hbar + sum_k b[k] t^(2k),  u = ubar + sum_k c[k] t^(2k)
/// for k = 1..kSeriesOrder (index 0 unused and zero).
inline constexpr int kSeriesOrder = 6;

struct SmoothnessSeries {
    double hbar = 0.0;
    double ubar = 0.0;
    std::array<double, kSeriesOrder + 1> a{};
    std::array<double, kSeriesOrder + 1> b{};
    std::array<double, kSeriesOrder + 1> c{};

    SolitonState evaluate(double t) const;
};

SmoothnessSeries smoothness_series(const OrbitPreset& preset, double hbar, double ubar);

inline constexpr double kSeriesTolerance = 1e-6;

/// State at the handoff time t0, taken from the smoothness series. t0 is
/// halved until |ham_residual| <= kSeriesTolerance.
SolitonState series_start(const OrbitPreset& preset, double hbar, double ubar, const IntegratorConfig& config);

/// One classical Runge-Kutta step for y' = field(t, y). Vec is an indexable
/// container of doubles (std::array or std::vector).
template <typename Vec, typename Field>
Vec rk4_step(Field&& field, double t, const Vec& y, double step) {
    const std::size_t n = y.size();
    auto shifted = [&](const Vec& k, double scale) {
        Vec out = y;
        for (std::size_t i = 0; i < n; ++i) out[i] += scale * k[i];
        return out;
    };
    auto check = [&](const Vec& k) {
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(k[i])) throw BlowUpError("non-finite Runge-Kutta stage");
        return k;
    };
    const Vec k1 = check(field(t, y));
    const Vec k2 = check(field(t + 0.5 * step, shifted(k1, 0.5 * step)));
    const Vec k3 = check(field(t + 0.5 * step, shifted(k2, 0.5 * step)));
    const Vec k4 = check(field(t + step, shifted(k3, step)));
    Vec out = y;
    for (std::size_t i = 0; i < n; ++i) out[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

/// RK4 step of the soliton system.
SolitonState rk4_step(const OrbitPreset& preset, const SolitonState& state, double step);

enum class Termination { ReachedTMax, CollapseFiber, CollapseBase, BlowUp, TargetHit };

std::string_view to_string(Termination t);
Termination termination_from_string(std::string_view s);

/// Squared distance to the smooth closing conditions at the far singular orbit.
double sol_metric(const SolitonState& state, CollapsePattern pattern);

struct TrajectorySample {
    SolitonState state;
    DiagnosticsRecord diag;  // diag.theta holds the unwrapped angle
    double sol = 0.0;
};

struct Trajectory {
    OrbitPreset preset;
    IntegratorConfig config;
    double hbar = 0.0;
    double ubar = 0.0;

    std::vector<TrajectorySample> samples;
    Termination termination = Termination::ReachedTMax;
    double end_time = 0.0;                 // last valid time reached
    std::optional<double> turning_time;    // first zero of xi
    double min_sol = 0.0;
    double argmin_sol_t = 0.0;

    bool einstein = false;                 // E and F vanish at the start
    std::optional<double> winding_to_turning;
    std::optional<double> winding_total;
    bool winding_resolved = true;          // every angle increment stayed below pi/2
};

/// Lightweight result used by scans: no samples are kept.
struct ShotSummary {
    double min_sol = 0.0;
    double argmin_sol_t = 0.0;
    Termination termination = Termination::ReachedTMax;
    double end_time = 0.0;
};

Trajectory integrate(const OrbitPreset& preset, double hbar, double ubar, const IntegratorConfig& config);

ShotSummary shoot(const OrbitPreset& preset, double hbar, double ubar, const IntegratorConfig& config);

enum class WindingUpTo { TurningPoint, End };

/// Accumulated change of the (E, F) angle from the start axis. Empty for
/// Einstein trajectories, or when the turning point was not reached.
std::optional<double> winding_angle(const Trajectory& traj, WindingUpTo upto);

/// Sign changes of u' over recorded samples strictly inside (t0, t_end).
int critical_point_count(const Trajectory& traj, std::optional<double> t_end = std::nullopt);

}  // namespace soliton

#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "soliton/errors.hpp"
#include "soliton/geometry.hpp"

namespace soliton {

/// d/dt of (f, f', h, h', u, u').
using StateDerivative = std::array<double, 6>;

/// Right-hand side of the first-order system in z = (f, f', h, h', u, u'),
/// with the u-equation taken from the conservation law at C = 0.
/// Throws CollapseError for f <= 0 or h <= 0 and BlowUpError for non-finite output.
StateDerivative vector_field(const OrbitPreset& preset, const SolitonState& state);

namespace detail {

// The z-system and its Hamiltonian constraint for any floating type R, with
// z = (f, f', h, h', u, u'). The double overloads below forward here; the
// extended-precision shooting path instantiates R = long double.
template <typename R>
std::array<R, 6> z_field(const OrbitPreset& p, const std::array<R, 6>& z) {
    const R f = z[0], fd = z[1], h = z[2], hd = z[3], ud = z[5];
    if (!(f > R(0))) throw CollapseError(CollapseError::Factor::Fiber, "fiber scale f is not positive");
    if (!(h > R(0))) throw CollapseError(CollapseError::Factor::Base, "base scale h is not positive");

    const R d1 = p.d1, d2 = p.d2;
    const R half_eps = R(0.5) * R(p.epsilon);
    const R lf = fd / f, lh = hd / h;
    const R h2 = h * h;
    const R oneill = R(p.a2) * f * f / (h2 * h2);  // a2 f^2 / h^4

    std::array<R, 6> dz{
        fd,
        -(d1 - 1) * fd * lf - d2 * fd * lh + (d1 - 1) / f + (d2 / d1) * oneill * f + fd * ud + half_eps * f,
        hd,
        -(d2 - 1) * hd * lh - d1 * lf * hd + R(p.c_q) / h - 2 * oneill * h + hd * ud + half_eps * h,
        ud,
        -ud * (d1 * lf + d2 * lh) + ud * ud + R(p.epsilon) * z[4],
    };
    for (const R& v : dz)
        if (!std::isfinite(v)) throw BlowUpError("non-finite vector field");
    return dz;
}

template <typename R>
R z_ham(const OrbitPreset& p, const std::array<R, 6>& z) {
    const R f = z[0], h = z[2];
    if (!(f > R(0))) throw CollapseError(CollapseError::Factor::Fiber, "fiber scale f is not positive");
    if (!(h > R(0))) throw CollapseError(CollapseError::Factor::Base, "base scale h is not positive");
    const R d1 = p.d1, d2 = p.d2;
    const R lf = z[1] / f, lh = z[3] / h;
    const R oneill = R(p.a2) * f * f / (h * h * h * h);
    const R S = d1 * ((d1 - 1) / (f * f) + (d2 / d1) * oneill) + d2 * (R(p.c_q) / (h * h) - 2 * oneill);
    const R xi = -z[5] + d1 * lf + d2 * lh;
    return S + d1 * lf * lf + d2 * lh * lh - xi * xi + R(0.5) * R(p.n() - 1) * R(p.epsilon) -
           R(p.epsilon) * z[4];
}

}  // namespace detail

/// Pointwise phase-space diagnostics. Quantities that involve W = 1/xi are
/// empty at a turning point (xi == 0).
struct DiagnosticsRecord {
    double xi = 0.0;             // -u' + tr L
    std::optional<double> W;     // 1/xi
    double E = 0.0;              // C + eps u with C = 0
    double F = 0.0;              // u'
    std::optional<double> theta; // atan2 of the eps = -1 rescaled (E, F); empty on Einstein data
    std::optional<double> G;     // W^2 tr(L^2)
    std::optional<double> Hcal;  // W tr L
    std::optional<double> Q;     // W^2 E
    std::optional<double> Lcal;  // (tr(L^2) + S)/xi^2 - 1
    double Fcal = 0.0;           // v^(2/n) (S + tr(L0^2))
    double S = 0.0;
    double trL = 0.0;
    double ham_residual = 0.0;
    double normal_residual = 0.0;
};

/// Below this magnitude both E and F count as zero (Einstein trajectory).
inline constexpr double kEinsteinTolerance = 1e-12;

DiagnosticsRecord diagnostics(const OrbitPreset& preset, const SolitonState& state);

/// S + tr(L^2) - xi^2 + (n-1) eps/2 - E; zero on exact solutions.
double ham_residual(const OrbitPreset& preset, const SolitonState& state);

/// -d1 f''/f - d2 h''/h + u'' + eps/2 with second derivatives from vector_field.
double normal_residual(const OrbitPreset& preset, const SolitonState& state);

/// tr(L^2) = d1 (f'/f)^2 + d2 (h'/h)^2.
double trace_L2(const OrbitPreset& preset, const SolitonState& state);

/// Squared norm of the traceless shape operator, tr(L^2) - (tr L)^2 / n.
double traceless_L2(const OrbitPreset& preset, const SolitonState& state);

/// Closed-form rate of the Lyapunov functional,
/// -2 v^(2/n) tr(L0^2) (xi - tr L / n).
double lyapunov_rate(const OrbitPreset& preset, const SolitonState& state);

/// (E, F, W) rescaled by the homothety that brings eps to -1:
/// E / (-eps), F / sqrt(-eps), W sqrt(-eps). The s-parameter is unchanged.
struct NormalizedEF {
    double E;
    double F;
    std::optional<double> W;
};

NormalizedEF normalize_ef(double epsilon, double E, double F, std::optional<double> W);

/// Angle of the eps = -1 rescaled point, with F horizontal and E vertical.
std::optional<double> ef_angle(double epsilon, double E, double F);

}  // namespace soliton

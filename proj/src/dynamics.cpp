#include "soliton/dynamics.hpp"

#include <cmath>

#include "soliton/errors.hpp"

namespace soliton {

StateDerivative vector_field(const OrbitPreset& p, const SolitonState& s) {
    return detail::z_field<double>(p, {s.f, s.fdot, s.h, s.hdot, s.u, s.udot});
}

double trace_L2(const OrbitPreset& p, const SolitonState& s) {
    const double lf = s.fdot / s.f;
    const double lh = s.hdot / s.h;
    return p.d1 * lf * lf + p.d2 * lh * lh;
}

double traceless_L2(const OrbitPreset& p, const SolitonState& s) {
    // Two-summand closed form: d1 d2 (f'/f - h'/h)^2 / n, never negative.
    const double diff = s.fdot / s.f - s.hdot / s.h;
    return p.d1 * p.d2 * diff * diff / p.n();
}

double ham_residual(const OrbitPreset& p, const SolitonState& s) {
    return detail::z_ham<double>(p, {s.f, s.fdot, s.h, s.hdot, s.u, s.udot});
}

double normal_residual(const OrbitPreset& p, const SolitonState& s) {
    const auto dz = vector_field(p, s);
    return -p.d1 * dz[1] / s.f - p.d2 * dz[3] / s.h + dz[5] + 0.5 * p.epsilon;
}

double lyapunov_rate(const OrbitPreset& p, const SolitonState& s) {
    const auto c = scalar_and_volume(p, s);
    const double xi = -s.udot + c.trL;
    const double vol = std::pow(c.v, 2.0 / p.n());
    return -2.0 * vol * traceless_L2(p, s) * (xi - c.trL / p.n());
}

NormalizedEF normalize_ef(double epsilon, double E, double F, std::optional<double> W) {
    const double scale = std::sqrt(-epsilon);
    NormalizedEF out{E / (-epsilon), F / scale, std::nullopt};
    if (W) out.W = *W * scale;
    return out;
}

std::optional<double> ef_angle(double epsilon, double E, double F) {
    if (std::abs(E) < kEinsteinTolerance && std::abs(F) < kEinsteinTolerance) return std::nullopt;
    const auto n = normalize_ef(epsilon, E, F, std::nullopt);
    return std::atan2(n.E, n.F);
}

DiagnosticsRecord diagnostics(const OrbitPreset& p, const SolitonState& s) {
    const auto c = scalar_and_volume(p, s);
    const double trL2 = trace_L2(p, s);

    DiagnosticsRecord d;
    d.S = c.S;
    d.trL = c.trL;
    d.xi = -s.udot + c.trL;
    d.E = p.epsilon * s.u;
    d.F = s.udot;
    d.theta = ef_angle(p.epsilon, d.E, d.F);
    if (d.xi != 0.0) {
        const double W = 1.0 / d.xi;
        d.W = W;
        d.G = W * W * trL2;
        d.Hcal = W * c.trL;
        d.Q = W * W * d.E;
        d.Lcal = (trL2 + c.S) * W * W - 1.0;
    }
    d.Fcal = std::pow(c.v, 2.0 / p.n()) * (c.S + traceless_L2(p, s));
    d.ham_residual = c.S + trL2 - d.xi * d.xi + 0.5 * (p.n() - 1) * p.epsilon - d.E;
    d.normal_residual = normal_residual(p, s);
    return d;
}

}  // namespace soliton

#pragma once

// Orbit-type presets for two-summand principal orbits G/K with
// p = p1 (+) p2, where p1 is the tangent space of the collapsing sphere
// H/K = S^{d1} and p2 that of the base Q = G/H.

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace soliton {

/// Which factor collapses at the far singular orbit.
enum class CollapsePattern {
    SameEnd,      // the fiber S^{d1} collapses at both ends
    OppositeEnd,  // the base factor collapses at the far end
};

std::string_view to_string(CollapsePattern p);
CollapsePattern collapse_pattern_from_string(std::string_view s);

struct OrbitPreset {
    std::string name;
    int d1 = 1;
    int d2 = 1;
    double c_q = 1.0;      // Einstein constant of the base w.r.t. the background metric
    double a2 = 0.0;       // O'Neill tensor norm squared, zero for products
    double epsilon = -1.0; // soliton constant, negative for shrinkers
    CollapsePattern collapse = CollapsePattern::SameEnd;

    int n() const noexcept { return d1 + d2; }

    /// Throws PreconditionError if any field is outside its admissible range.
    void validate() const;

    /// Lower end of the admissible initial potential, -(n+1)/2.
    double ubar_lower_bound() const noexcept { return -0.5 * (n() + 1); }
};

/// The state (f, f', h, h', u, u') of the soliton ODE at arc length t.
struct SolitonState {
    double t = 0.0;
    double f = 0.0;
    double fdot = 0.0;
    double h = 0.0;
    double hdot = 0.0;
    double u = 0.0;
    double udot = 0.0;
};

struct RicciComponents {
    double r1;  // eigenvalue on the fiber summand
    double r2;  // eigenvalue on the base summand
};

/// Ricci endomorphism eigenvalues of the principal orbit metric
/// f^2 B|p1 + h^2 B|p2. Throws CollapseError for f <= 0, h <= 0 or a
/// non-finite result.
RicciComponents ricci_components(const OrbitPreset& preset, double f, double h);

struct OrbitCurvature {
    double S;    // scalar curvature of the principal orbit
    double trL;  // mean curvature d1 f'/f + d2 h'/h
    double v;    // relative volume f^d1 h^d2
};

OrbitCurvature scalar_and_volume(const OrbitPreset& preset, const SolitonState& state);

/// Presets: cp2, s5, s2xs3, s2xs2, s11, hp(n), f(n), cap2.
OrbitPreset preset_catalog(std::string_view name);

/// Names accepted by preset_catalog (parametrised families listed with n = 1).
std::vector<std::string> preset_names();

/// Default soliton constant -n/50 for presets without a reported value.
double default_epsilon(int n);

void to_json(nlohmann::json& j, const OrbitPreset& p);
void from_json(const nlohmann::json& j, OrbitPreset& p);

}  // namespace soliton

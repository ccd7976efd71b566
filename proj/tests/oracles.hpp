#pragma once

// Closed-form solutions written out directly, independent of the warped
// module, for checking the two-summand z-system.

#include <array>
#include <cmath>

#include "soliton/geometry.hpp"

namespace oracles {

// State and second derivatives (f'', h'', u'') at one time.
struct Exact {
    soliton::SolitonState s;
    double fdd, hdd, udd;
};

// Flat R^{d1+1} x (S^{d2}, radius sqrt(-2 lambda2/eps)) with u = -eps t^2/4 - (d1+1)/2.
inline Exact gaussian(const soliton::OrbitPreset& p, double t) {
    const double h = std::sqrt(-2.0 * p.c_q / p.epsilon);
    return {{t, t, 1.0, h, 0.0, -0.25 * p.epsilon * t * t - 0.5 * (p.d1 + 1), -0.5 * p.epsilon * t}, 0.0, 0.0,
            -0.5 * p.epsilon};
}

// Product preset with round factors: g_i = sin(a t) sqrt(lambda_i)/(a sqrt(n-1)), a = sqrt(-eps/(2n)), u = 0.
inline Exact sphere_cone(const soliton::OrbitPreset& p, double t) {
    const int n = p.n();
    const double a = std::sqrt(-p.epsilon / (2.0 * n));
    const double cf = std::sqrt((p.d1 - 1.0) / (n - 1)) / a;
    const double ch = std::sqrt(p.c_q / (n - 1)) / a;
    const double s = std::sin(a * t), c = std::cos(a * t);
    return {{t, cf * s, cf * a * c, ch * s, ch * a * c, 0.0, 0.0}, -cf * a * a * s, -ch * a * a * s, 0.0};
}

// Round sphere of radius R written with f = R sin(t/R), h = R cos(t/R).
inline soliton::SolitonState round_sphere(double R, double t) {
    return {t, R * std::sin(t / R), std::cos(t / R), R * std::cos(t / R), -std::sin(t / R), 0.0, 0.0};
}

}  // namespace oracles

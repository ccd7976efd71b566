#include "soliton/integrator.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace soliton {

void IntegratorConfig::validate() const {
    if (!(step > 0.0)) throw PreconditionError("integrator step must be positive");
    if (t0 && !(*t0 > 0.0)) throw PreconditionError("series handoff time t0 must be positive");
    if (!(t0_factor > 0.0)) throw PreconditionError("t0_factor must be positive");
    if (!(t_max > start_time())) throw PreconditionError("t_max must exceed the series handoff time");
    if (!(blowup_threshold > 0.0)) throw PreconditionError("blowup_threshold must be positive");
    if (record_every < 1) throw PreconditionError("record_every must be >= 1");
}

IntegratorConfig default_config(const OrbitPreset& preset) {
    IntegratorConfig c;
    c.t_max = 50.0 / std::sqrt(-preset.epsilon);
    return c;
}

// ---------------------------------------------------------------------------
// Smoothness series
// ---------------------------------------------------------------------------

namespace {

constexpr int kTerms = 2 * kSeriesOrder + 2;  // powers t^0 .. t^(kTerms-1)

template <typename R>
using Series = std::array<R, kTerms>;

template <typename R>
Series<R> mul(const Series<R>& a, const Series<R>& b) {
    Series<R> c{};
    for (int i = 0; i < kTerms; ++i)
        for (int j = 0; i + j < kTerms; ++j) c[i + j] += a[i] * b[j];
    return c;
}

template <typename R>
Series<R> scaled(const Series<R>& a, R s) {
    Series<R> c = a;
    for (R& x : c) x *= s;
    return c;
}

template <typename R>
Series<R> add(const Series<R>& a, const Series<R>& b) {
    Series<R> c = a;
    for (int i = 0; i < kTerms; ++i) c[i] += b[i];
    return c;
}

template <typename R>
Series<R> constant(R v) {
    Series<R> c{};
    c[0] = v;
    return c;
}

template <typename R>
Series<R> deriv(const Series<R>& a) {
    Series<R> c{};
    for (int i = 0; i + 1 < kTerms; ++i) c[i] = R(i + 1) * a[i + 1];
    return c;
}

template <typename R>
Series<R> inverse(const Series<R>& a) {
    Series<R> c{};
    c[0] = R(1) / a[0];
    for (int k = 1; k < kTerms; ++k) {
        R s = 0;
        for (int i = 1; i <= k; ++i) s += a[i] * c[k - i];
        c[k] = -s / a[0];
    }
    return c;
}

// a / t for a series with vanishing constant term.
template <typename R>
Series<R> div_t(const Series<R>& a) {
    Series<R> c{};
    for (int i = 0; i + 1 < kTerms; ++i) c[i] = a[i + 1];
    return c;
}

// Series coefficients in the working precision R; same layout as SmoothnessSeries.
template <typename R>
struct Coeffs {
    R hbar = 0, ubar = 0;
    std::array<R, kSeriesOrder + 1> a{}, b{}, c{};

    // (f, f', h, h', u, u') at t
    std::array<R, 6> evaluate(R t) const {
        const R t2 = t * t;
        std::array<R, 6> z{t, R(1), hbar, R(0), ubar, R(0)};
        R pw = 1;  // t^(2k-2)
        for (int k = 1; k <= kSeriesOrder; ++k) {
            const R pw_odd = pw * t;
            const R pw_even = pw * t2;
            z[0] += a[k] * pw_even * t;
            z[1] += R(2 * k + 1) * a[k] * pw_even;
            z[2] += b[k] * pw_even;
            z[3] += R(2 * k) * b[k] * pw_odd;
            z[4] += c[k] * pw_even;
            z[5] += R(2 * k) * c[k] * pw_odd;
            pw = pw_even;
        }
        return z;
    }
};

template <typename R>
struct SeriesTriple {
    Series<R> f{}, h{}, u{};
};

template <typename R>
SeriesTriple<R> to_series(const Coeffs<R>& s) {
    SeriesTriple<R> out;
    out.f[1] = 1;
    out.h[0] = s.hbar;
    out.u[0] = s.ubar;
    for (int k = 1; k <= kSeriesOrder; ++k) {
        if (2 * k + 1 < kTerms) out.f[2 * k + 1] = s.a[k];
        out.h[2 * k] = s.b[k];
        out.u[2 * k] = s.c[k];
    }
    return out;
}

// The three equations multiplied through by f or h, with every term a regular
// power series. Returns the coefficients that fix (a_k, b_k, c_k).
template <typename R>
std::array<R, 3> order_residuals(const OrbitPreset& p, const Coeffs<R>& coeffs, int k) {
    const auto [f, h, u] = to_series(coeffs);
    const auto fd = deriv(f), fdd = deriv(fd);
    const auto hd = deriv(h), hdd = deriv(hd);
    const auto ud = deriv(u), udd = deriv(ud);
    const auto hinv = inverse(h);
    const R d1 = p.d1, d2 = p.d2, half_eps = R(0.5) * R(p.epsilon);

    // f f'' = -(d1-1) f'^2 - d2 f f' h'/h + (d1-1) + (d2/d1) a2 f^4/h^4 + f f' u' + eps/2 f^2
    auto rf = mul(f, fdd);
    rf = add(rf, scaled(mul(fd, fd), d1 - 1));
    rf = add(rf, scaled(mul(mul(f, fd), mul(hd, hinv)), d2));
    rf = add(rf, constant(-(d1 - 1)));
    const auto f2 = mul(f, f), hinv2 = mul(hinv, hinv);
    rf = add(rf, scaled(mul(mul(f2, f2), mul(hinv2, hinv2)), -(d2 / d1) * R(p.a2)));
    rf = add(rf, scaled(mul(mul(f, fd), ud), R(-1)));
    rf = add(rf, scaled(f2, -half_eps));

    // h h'' = -(d2-1) h'^2 - d1 f' h h'/f + c_q - 2 a2 f^2/h^2 + h h' u' + eps/2 h^2
    auto rh = mul(h, hdd);
    rh = add(rh, scaled(mul(hd, hd), d2 - 1));
    rh = add(rh, scaled(mul(mul(fd, h), mul(div_t(hd), inverse(div_t(f)))), d1));
    rh = add(rh, constant(-R(p.c_q)));
    rh = add(rh, scaled(mul(f2, hinv2), R(2) * R(p.a2)));
    rh = add(rh, scaled(mul(mul(h, hd), ud), R(-1)));
    rh = add(rh, scaled(mul(h, h), -half_eps));

    // f u'' = -u' (d1 f' + d2 f h'/h) + f u'^2 + eps f u
    auto ru = mul(f, udd);
    ru = add(ru, mul(ud, add(scaled(fd, d1), scaled(mul(f, mul(hd, hinv)), d2))));
    ru = add(ru, scaled(mul(f, mul(ud, ud)), R(-1)));
    ru = add(ru, scaled(mul(f, u), -R(p.epsilon)));

    return {rf[2 * k], rh[2 * k - 2], ru[2 * k - 1]};
}

template <typename R>
R det3(const R (&M)[3][3]) {
    return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
           M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
}

template <typename R>
Coeffs<R> solve_series(const OrbitPreset& preset, double hbar, double ubar) {
    preset.validate();
    if (!(hbar > 0.0)) throw PreconditionError("hbar must be positive");
    if (!std::isfinite(ubar) || ubar < preset.ubar_lower_bound())
        throw PreconditionError("ubar below the admissible bound -(n+1)/2");

    Coeffs<R> s;
    s.hbar = hbar;
    s.ubar = ubar;
    for (int k = 1; k <= kSeriesOrder; ++k) {
        // The order-k residuals are affine in (a_k, b_k, c_k); recover the
        // 3x3 system from unit perturbations and solve it by Cramer's rule.
        const auto r0 = order_residuals(preset, s, k);
        R J[3][3];
        for (int j = 0; j < 3; ++j) {
            Coeffs<R> probe = s;
            (j == 0 ? probe.a : j == 1 ? probe.b : probe.c)[k] = 1;
            const auto rj = order_residuals(preset, probe, k);
            for (int i = 0; i < 3; ++i) J[i][j] = rj[i] - r0[i];
        }
        const R det = det3(J);
        if (det == R(0) || !std::isfinite(det)) throw PreconditionError("degenerate smoothness series");
        R x[3];
        for (int j = 0; j < 3; ++j) {
            R M[3][3];
            for (int r = 0; r < 3; ++r)
                for (int col = 0; col < 3; ++col) M[r][col] = (col == j) ? -r0[r] : J[r][col];
            x[j] = det3(M) / det;
        }
        s.a[k] = x[0];
        s.b[k] = x[1];
        s.c[k] = x[2];
    }
    return s;
}

// First t0 = start_time / 2^m whose series state meets the constraint tolerance.
template <typename R>
std::array<R, 6> series_start_z(const OrbitPreset& preset, const Coeffs<R>& series, const IntegratorConfig& config,
                                R& t_out) {
    R t0 = config.start_time();
    for (int attempt = 0; attempt < 12; ++attempt, t0 *= R(0.5)) {
        const auto z = series.evaluate(t0);
        if (z[0] > R(0) && z[2] > R(0) && std::abs(detail::z_ham<R>(preset, z)) <= R(kSeriesTolerance)) {
            t_out = t0;
            return z;
        }
    }
    throw PreconditionError("smoothness series does not meet the constraint tolerance near t = 0");
}

}  // namespace

SolitonState SmoothnessSeries::evaluate(double t) const {
    Coeffs<double> c{hbar, ubar, a, b, this->c};
    const auto z = c.evaluate(t);
    return {t, z[0], z[1], z[2], z[3], z[4], z[5]};
}

SmoothnessSeries smoothness_series(const OrbitPreset& preset, double hbar, double ubar) {
    const auto c = solve_series<double>(preset, hbar, ubar);
    return {c.hbar, c.ubar, c.a, c.b, c.c};
}

SolitonState series_start(const OrbitPreset& preset, double hbar, double ubar, const IntegratorConfig& config) {
    config.validate();
    double t0 = 0.0;
    const auto z = series_start_z(preset, solve_series<double>(preset, hbar, ubar), config, t0);
    return {t0, z[0], z[1], z[2], z[3], z[4], z[5]};
}

// ---------------------------------------------------------------------------
// Propagation
// ---------------------------------------------------------------------------

namespace {

using Vec6 = std::array<double, 6>;

Vec6 pack(const SolitonState& s) { return {s.f, s.fdot, s.h, s.hdot, s.u, s.udot}; }

SolitonState unpack(double t, const Vec6& z) { return {t, z[0], z[1], z[2], z[3], z[4], z[5]}; }

}  // namespace

SolitonState rk4_step(const OrbitPreset& preset, const SolitonState& state, double step) {
    auto field = [&](double t, const Vec6& z) { return vector_field(preset, unpack(t, z)); };
    return unpack(state.t + step, rk4_step(field, state.t, pack(state), step));
}

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::ReachedTMax: return "reached_tmax";
        case Termination::CollapseFiber: return "collapse_f";
        case Termination::CollapseBase: return "collapse_h";
        case Termination::BlowUp: return "blowup";
        case Termination::TargetHit: return "target_hit";
    }
    return "unknown";
}

Termination termination_from_string(std::string_view s) {
    for (auto t : {Termination::ReachedTMax, Termination::CollapseFiber, Termination::CollapseBase,
                   Termination::BlowUp, Termination::TargetHit})
        if (to_string(t) == s) return t;
    throw LookupError("unknown termination '" + std::string(s) + "'");
}

double sol_metric(const SolitonState& s, CollapsePattern pattern) {
    if (pattern == CollapsePattern::SameEnd) {
        const double e = s.fdot + 1.0;
        return s.f * s.f + e * e + s.hdot * s.hdot + s.udot * s.udot;
    }
    const double e = s.hdot + 1.0;
    return s.fdot * s.fdot + s.h * s.h + e * e + s.udot * s.udot;
}

namespace {

double wrap_angle(double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    x = std::fmod(x + std::numbers::pi, two_pi);
    if (x < 0.0) x += two_pi;
    return x - std::numbers::pi;
}

// Unwrapped tracking of the (E, F) angle with substep refinement.
class AngleTracker {
public:
    AngleTracker(const OrbitPreset& preset, const SolitonState& start) : preset_(preset) {
        const double E = preset.epsilon * start.u;
        // the start sits on the E axis: pi/2 above the origin, 3pi/2 below
        reference_ = E > 0.0 ? 0.5 * std::numbers::pi : 1.5 * std::numbers::pi;
        if (auto a = raw(start)) {
            raw_ = *a;
            unwrapped_ = reference_ + wrap_angle(*a - reference_);
            active_ = true;
        }
    }

    bool active() const { return active_; }
    bool resolved() const { return resolved_; }
    double unwrapped() const { return unwrapped_; }
    double winding() const { return unwrapped_ - reference_; }

    // Advance to `next`, reached from `prev` with one RK step of size `step`.
    void advance(const SolitonState& prev, const SolitonState& next, double step) {
        if (!active_) return;
        const auto a = raw(next);
        if (!a) return;
        const double delta = wrap_angle(*a - raw_);
        if (std::abs(delta) < 0.5 * std::numbers::pi) {
            push(*a, delta);
            return;
        }
        // Re-resolve the step on a finer grid; the trajectory itself is untouched.
        constexpr int kSub = 16;
        SolitonState s = prev;
        try {
            for (int i = 0; i < kSub; ++i) {
                s = rk4_step(preset_, s, step / kSub);
                if (const auto b = raw(s)) {
                    const double d = wrap_angle(*b - raw_);
                    if (std::abs(d) >= 0.5 * std::numbers::pi) resolved_ = false;
                    push(*b, d);
                }
            }
        } catch (const std::exception&) {
            resolved_ = false;
        }
        // land exactly on the main-grid angle
        push(*a, wrap_angle(*a - raw_));
    }

private:
    std::optional<double> raw(const SolitonState& s) const {
        return ef_angle(preset_.epsilon, preset_.epsilon * s.u, s.udot);
    }

    void push(double a, double delta) {
        unwrapped_ += delta;
        raw_ = a;
    }

    const OrbitPreset& preset_;
    double reference_ = 0.0;
    double raw_ = 0.0;
    double unwrapped_ = 0.0;
    bool active_ = false;
    bool resolved_ = true;
};

bool overflowing(const SolitonState& s, double threshold) {
    for (double v : {s.f, s.fdot, s.h, s.hdot, s.u, s.udot})
        if (!std::isfinite(v) || std::abs(v) > threshold) return true;
    return false;
}

Termination collapse_kind(CollapseError::Factor which, const SolitonState& s) {
    if (which == CollapseError::Factor::Fiber) return Termination::CollapseFiber;
    if (which == CollapseError::Factor::Base) return Termination::CollapseBase;
    return s.f <= s.h ? Termination::CollapseFiber : Termination::CollapseBase;
}

template <typename R>
SolitonState to_state(double t, const std::array<R, 6>& z) {
    return {t,
            static_cast<double>(z[0]),
            static_cast<double>(z[1]),
            static_cast<double>(z[2]),
            static_cast<double>(z[3]),
            static_cast<double>(z[4]),
            static_cast<double>(z[5])};
}

// Series start in both working precisions; `wide` is only filled when the
// config asks for extended precision.
struct Start {
    SolitonState state;
    std::array<long double, 6> wide{};
};

Start make_start(const OrbitPreset& preset, double hbar, double ubar, const IntegratorConfig& config) {
    if (!config.extended_precision) return {series_start(preset, hbar, ubar, config), {}};
    config.validate();
    long double t0 = 0.0L;
    const auto z = series_start_z(preset, solve_series<long double>(preset, hbar, ubar), config, t0);
    return {to_state(static_cast<double>(t0), z), z};
}

// Steps the system from the series start in precision R. The observer sees
// every accepted state as observer(prev, next) rounded to double; the return
// value is the termination reason.
template <typename R, typename Observer>
Termination propagate_in(const OrbitPreset& preset, std::array<R, 6> z, double t0, const IntegratorConfig& config,
                         Observer&& observer) {
    auto field = [&](double, const std::array<R, 6>& y) { return detail::z_field<R>(preset, y); };
    SolitonState s = to_state(t0, z);
    for (long i = 1;; ++i) {
        // Recompute t from the index so long runs do not accumulate rounding.
        const double t_next = t0 + static_cast<double>(i) * config.step;
        if (t_next > config.t_max + 1e-9 * config.step) return Termination::ReachedTMax;
        std::array<R, 6> zn;
        try {
            zn = rk4_step(field, s.t, z, config.step);
        } catch (const CollapseError& e) {
            return collapse_kind(e.which(), s);
        } catch (const BlowUpError&) {
            return Termination::BlowUp;
        }
        const SolitonState next = to_state(t_next, zn);
        if (overflowing(next, config.blowup_threshold)) return Termination::BlowUp;
        if (!(zn[0] > R(0))) return Termination::CollapseFiber;
        if (!(zn[2] > R(0))) return Termination::CollapseBase;
        if (!observer(s, next)) return Termination::TargetHit;
        s = next;
        z = zn;
    }
}

template <typename Observer>
Termination propagate(const OrbitPreset& preset, const Start& start, const IntegratorConfig& config,
                      Observer&& observer) {
    if (config.extended_precision) return propagate_in(preset, start.wide, start.state.t, config, observer);
    return propagate_in(preset, pack(start.state), start.state.t, config, observer);
}

}  // namespace

ShotSummary shoot(const OrbitPreset& preset, double hbar, double ubar, const IntegratorConfig& config) {
    const Start launch = make_start(preset, hbar, ubar, config);
    const SolitonState& start = launch.state;
    ShotSummary out;
    out.min_sol = sol_metric(start, preset.collapse);
    out.argmin_sol_t = start.t;
    out.end_time = start.t;
    out.termination = propagate(preset, launch, config, [&](const SolitonState&, const SolitonState& next) {
        out.end_time = next.t;
        const double sol = sol_metric(next, preset.collapse);
        if (sol < out.min_sol) {
            out.min_sol = sol;
            out.argmin_sol_t = next.t;
        }
        return !(config.target_sol > 0.0 && sol <= config.target_sol);
    });
    return out;
}

Trajectory integrate(const OrbitPreset& preset, double hbar, double ubar, const IntegratorConfig& config) {
    const Start launch = make_start(preset, hbar, ubar, config);
    const SolitonState& start = launch.state;

    Trajectory traj;
    traj.preset = preset;
    traj.config = config;
    traj.hbar = hbar;
    traj.ubar = ubar;
    traj.min_sol = sol_metric(start, preset.collapse);
    traj.argmin_sol_t = start.t;
    traj.end_time = start.t;

    AngleTracker angle(preset, start);
    traj.einstein = !angle.active();

    auto record = [&](const SolitonState& s) {
        TrajectorySample sample{s, diagnostics(preset, s), sol_metric(s, preset.collapse)};
        if (angle.active()) sample.diag.theta = angle.unwrapped();
        traj.samples.push_back(sample);
    };
    record(start);

    double xi_prev = -start.udot + scalar_and_volume(preset, start).trL;
    long step_index = 0;
    SolitonState last = start;

    traj.termination = propagate(preset, launch, config, [&](const SolitonState& prev, const SolitonState& next) {
        const double winding_prev = angle.winding();
        angle.advance(prev, next, config.step);

        const double xi = -next.udot + scalar_and_volume(preset, next).trL;
        if (!traj.turning_time && xi_prev > 0.0 && xi <= 0.0) {
            // secant refinement of the simple zero of the decreasing xi
            const double frac = xi_prev / (xi_prev - xi);
            traj.turning_time = prev.t + frac * (next.t - prev.t);
            if (angle.active()) traj.winding_to_turning = winding_prev + frac * (angle.winding() - winding_prev);
        }
        xi_prev = xi;

        const double sol = sol_metric(next, preset.collapse);
        if (sol < traj.min_sol) {
            traj.min_sol = sol;
            traj.argmin_sol_t = next.t;
        }
        last = next;
        traj.end_time = next.t;
        if (++step_index % config.record_every == 0) record(next);
        return !(config.target_sol > 0.0 && sol <= config.target_sol);
    });

    if (traj.samples.back().state.t != last.t) record(last);
    if (angle.active()) traj.winding_total = angle.winding();
    traj.winding_resolved = angle.resolved();
    return traj;
}

std::optional<double> winding_angle(const Trajectory& traj, WindingUpTo upto) {
    if (traj.einstein || !traj.winding_resolved) return std::nullopt;
    return upto == WindingUpTo::TurningPoint ? traj.winding_to_turning : traj.winding_total;
}

int critical_point_count(const Trajectory& traj, std::optional<double> t_end) {
    if (traj.samples.empty()) return 0;
    const double t0 = traj.samples.front().state.t;
    const double end = t_end ? *t_end : traj.samples.back().state.t;
    int count = 0;
    double last_sign = 0.0;
    for (const auto& s : traj.samples) {
        if (s.state.t <= t0 || s.state.t >= end) continue;
        const double v = s.state.udot;
        if (v == 0.0) continue;
        const double sign = v > 0.0 ? 1.0 : -1.0;
        if (last_sign != 0.0 && sign != last_sign) ++count;
        last_sign = sign;
    }
    return count;
}

}  // namespace soliton

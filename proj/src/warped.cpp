#include "soliton/warped.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "soliton/errors.hpp"
#include "soliton/integrator.hpp"

namespace soliton {

int WarpedPreset::n() const {
    int n = 0;
    for (const auto& f : factors) n += f.d;
    return n;
}

void WarpedPreset::validate() const {
    if (factors.empty()) throw PreconditionError("a warped product needs at least one factor");
    if (!(epsilon < 0.0)) throw PreconditionError("epsilon must be negative");
    for (const auto& f : factors) {
        if (f.d < 1) throw PreconditionError("factor dimensions must be >= 1");
        if (!(f.lambda > 0.0) && !(f.d == 1 && f.lambda == 0.0))
            throw PreconditionError("Einstein constants must be positive");
    }
}

WarpedPreset sphere_product(const std::vector<int>& dims, double epsilon) {
    WarpedPreset p;
    p.epsilon = epsilon;
    for (int d : dims) p.factors.push_back({d, static_cast<double>(d - 1)});
    p.validate();
    return p;
}

double phase_G(const PhaseState& s) {
    double g = 0.0;
    for (double x : s.X) g += x * x;
    return g;
}

double phase_H(const WarpedPreset& p, const PhaseState& s) {
    double h = 0.0;
    for (std::size_t i = 0; i < s.X.size(); ++i) h += std::sqrt(double(p.factors[i].d)) * s.X[i];
    return h;
}

double phase_L(const PhaseState& s) {
    double l = phase_G(s) - 1.0;
    for (double y : s.Y) l += y * y;
    return l;
}

double cons2_residual(const WarpedPreset& p, const PhaseState& s, double E) {
    const double W2 = s.W * s.W;
    return phase_L(s) + 0.5 * (p.n() - 1) * p.epsilon * W2 - E * W2;
}

PhaseState warped_rhs(const WarpedPreset& p, const PhaseState& s) {
    if (s.X.size() != p.m() || s.Y.size() != p.m())
        throw PreconditionError("phase state does not match the number of factors");
    const double G = phase_G(s);
    const double eW2 = p.epsilon * s.W * s.W;
    PhaseState out;
    out.W = s.W * (G - 0.5 * eW2);
    out.X.resize(p.m());
    out.Y.resize(p.m());
    for (std::size_t i = 0; i < p.m(); ++i) {
        const double sd = std::sqrt(double(p.factors[i].d));
        out.X[i] = s.X[i] * (G - 1.0) + s.Y[i] * s.Y[i] / sd + 0.5 * eW2 * (sd - s.X[i]);
        out.Y[i] = s.Y[i] * (G - s.X[i] / sd - 0.5 * eW2);
    }
    return out;
}

EFRate ef_rhs(double epsilon, double W, double E, double F) { return {epsilon * W * F, W * E - F}; }

std::array<std::complex<double>, 2> ef_eigenvalues(double epsilon, double W) {
    const std::complex<double> root = std::sqrt(std::complex<double>(1.0 + 4.0 * epsilon * W * W, 0.0));
    return {0.5 * (-1.0 - root), 0.5 * (-1.0 + root)};
}

OracleKind oracle_kind_from_string(std::string_view name) {
    if (name == "gaussian") return OracleKind::SmoothGaussian;
    if (name == "conical") return OracleKind::ConicalGaussian;
    if (name == "cone") return OracleKind::SphericalCone;
    throw LookupError("unknown oracle '" + std::string(name) + "' (expected gaussian, conical or cone)");
}

OracleSample oracle(const WarpedPreset& p, OracleKind kind, double t) {
    p.validate();
    const double eps = p.epsilon;
    const int n = p.n();
    const std::size_t m = p.m();
    OracleSample out;
    MetricJet& j = out.jet;
    j.t = t;
    j.g.assign(m, 0.0);
    j.gdot.assign(m, 0.0);
    j.gddot.assign(m, 0.0);
    if (!(t > 0.0) || !std::isfinite(t)) throw OracleDomainError("oracle time must be positive");

    switch (kind) {
        case OracleKind::SmoothGaussian: {
            const auto& first = p.factors.front();
            if (first.lambda != first.d - 1)
                throw PreconditionError("the smooth Gaussian needs a round first factor, lambda_1 = d_1 - 1");
            j.g[0] = t;
            j.gdot[0] = 1.0;
            for (std::size_t i = 1; i < m; ++i) j.g[i] = std::sqrt(-2.0 * p.factors[i].lambda / eps);
            j.u = -0.25 * eps * t * t - 0.5 * (first.d + 1);
            j.udot = -0.5 * eps * t;
            j.uddot = -0.5 * eps;
            out.xi = 0.5 * eps * t + first.d / t;
            break;
        }
        case OracleKind::ConicalGaussian: {
            if (n < 2) throw PreconditionError("the conical Gaussian needs n >= 2");
            for (std::size_t i = 0; i < m; ++i) {
                const double c = std::sqrt(p.factors[i].lambda / (n - 1));
                j.g[i] = c * t;
                j.gdot[i] = c;
            }
            j.u = -0.25 * eps * t * t - 0.5 * (n + 1);
            j.udot = -0.5 * eps * t;
            j.uddot = -0.5 * eps;
            out.xi = 0.5 * eps * t + n / t;
            break;
        }
        case OracleKind::SphericalCone: {
            if (n < 2) throw PreconditionError("the spherical cone needs n >= 2");
            const double a = std::sqrt(-eps / (2.0 * n));
            if (!(a * t < std::numbers::pi)) throw OracleDomainError("spherical cone is defined for 0 < t < pi/alpha");
            const double sn = std::sin(a * t), cs = std::cos(a * t);
            for (std::size_t i = 0; i < m; ++i) {
                const double c = std::sqrt(p.factors[i].lambda / (n - 1)) / a;
                j.g[i] = c * sn;
                j.gdot[i] = c * a * cs;
                j.gddot[i] = -c * a * a * sn;
            }
            out.xi = a * n * cs / sn;
            break;
        }
    }
    out.E = eps * j.u;
    return out;
}

namespace {

struct JetTraces {
    std::vector<double> l;  // g_i'/g_i
    double trL = 0.0;
    double trL2 = 0.0;
    double S = 0.0;
};

JetTraces traces(const WarpedPreset& p, const MetricJet& j) {
    if (j.g.size() != p.m() || j.gdot.size() != p.m() || j.gddot.size() != p.m())
        throw PreconditionError("metric jet does not match the number of factors");
    JetTraces tr;
    tr.l.resize(p.m());
    for (std::size_t i = 0; i < p.m(); ++i) {
        if (!(j.g[i] > 0.0)) throw CollapseError(CollapseError::Factor::Unknown, "warping function is not positive");
        const double d = p.factors[i].d;
        tr.l[i] = j.gdot[i] / j.g[i];
        tr.trL += d * tr.l[i];
        tr.trL2 += d * tr.l[i] * tr.l[i];
        tr.S += d * p.factors[i].lambda / (j.g[i] * j.g[i]);
    }
    return tr;
}

}  // namespace

std::vector<double> tangential_residuals(const WarpedPreset& p, const MetricJet& j) {
    const auto tr = traces(p, j);
    std::vector<double> r(p.m());
    for (std::size_t i = 0; i < p.m(); ++i) {
        const double d = p.factors[i].d, l = tr.l[i];
        const double others = tr.trL - d * l;
        r[i] = -j.gddot[i] / j.g[i] - (d - 1.0) * l * l - l * others + p.factors[i].lambda / (j.g[i] * j.g[i]) +
               j.udot * l + 0.5 * p.epsilon;
    }
    return r;
}

double jet_normal_residual(const WarpedPreset& p, const MetricJet& j) {
    traces(p, j);
    double r = j.uddot + 0.5 * p.epsilon;
    for (std::size_t i = 0; i < p.m(); ++i) r -= p.factors[i].d * j.gddot[i] / j.g[i];
    return r;
}

double jet_ham_residual(const WarpedPreset& p, const MetricJet& j) {
    const auto tr = traces(p, j);
    const double xi = -j.udot + tr.trL;
    return tr.S + tr.trL2 - xi * xi + 0.5 * (p.n() - 1) * p.epsilon - p.epsilon * j.u;
}

double jet_conservation_residual(const WarpedPreset& p, const MetricJet& j) {
    const auto tr = traces(p, j);
    return j.uddot + j.udot * tr.trL - j.udot * j.udot - p.epsilon * j.u;
}

PhaseState phase_from_jet(const WarpedPreset& p, const MetricJet& j) {
    const auto tr = traces(p, j);
    const double xi = -j.udot + tr.trL;
    if (xi == 0.0) throw PreconditionError("phase variables are undefined at a turning point");
    PhaseState s;
    s.W = 1.0 / xi;
    for (std::size_t i = 0; i < p.m(); ++i) {
        const double d = p.factors[i].d;
        s.X.push_back(std::sqrt(d) * tr.l[i] / xi);
        s.Y.push_back(std::sqrt(d * p.factors[i].lambda) / (j.g[i] * xi));
    }
    return s;
}

PhaseState phase_rate_from_jet(const WarpedPreset& p, const MetricJet& j) {
    const auto tr = traces(p, j);
    const PhaseState s = phase_from_jet(p, j);
    double xidot = -j.uddot;
    std::vector<double> ldot(p.m());
    for (std::size_t i = 0; i < p.m(); ++i) {
        ldot[i] = j.gddot[i] / j.g[i] - tr.l[i] * tr.l[i];
        xidot += p.factors[i].d * ldot[i];
    }
    const double W = s.W;
    PhaseState r;
    r.W = -W * W * W * xidot;  // (1/xi) d/dt (1/xi)
    for (std::size_t i = 0; i < p.m(); ++i) {
        const double sd = std::sqrt(double(p.factors[i].d));
        r.X.push_back(W * sd * (ldot[i] * W - tr.l[i] * xidot * W * W));
        r.Y.push_back(-W * s.Y[i] * (tr.l[i] + xidot * W));
    }
    return r;
}

double warped_fcal(const WarpedPreset& p, const MetricJet& j) {
    const auto tr = traces(p, j);
    double log_v = 0.0;
    for (std::size_t i = 0; i < p.m(); ++i) log_v += p.factors[i].d * std::log(j.g[i]);
    const double n = p.n();
    const double traceless = tr.trL2 - tr.trL * tr.trL / n;
    return std::exp(2.0 * log_v / n) * (tr.S + traceless);
}

double lyapunov_bound(const WarpedPreset& p) {
    p.validate();
    const double n = p.n();
    double log_prod = 0.0;
    for (const auto& f : p.factors) log_prod += f.d / n * std::log(f.lambda);
    return n * std::exp(log_prod);
}

Linearization p_plus_linearization(int n) {
    if (n < 2) throw PreconditionError("the P+ linearization needs n >= 2");
    const double nn = n;
    const double r = std::sqrt(nn - 1.0);
    Linearization lin;
    lin.matrix = {{{(1.0 - nn) / nn, 2.0 * r / nn}, {-r / nn, 0.0}}};
    const double trace = lin.matrix[0][0] + lin.matrix[1][1];
    const double det = lin.matrix[0][0] * lin.matrix[1][1] - lin.matrix[0][1] * lin.matrix[1][0];
    lin.discriminant = (nn - 1.0) * (nn - 9.0) / (nn * nn);
    const std::complex<double> root = std::sqrt(std::complex<double>(trace * trace - 4.0 * det, 0.0));
    lin.eigenvalues = {0.5 * (trace - root), 0.5 * (trace + root)};
    lin.is_focus = lin.discriminant < 0.0;
    return lin;
}

PhaseState p_point(const WarpedPreset& p, int sign) {
    const double n = p.n();
    PhaseState s;
    for (const auto& f : p.factors) {
        const double sd = std::sqrt(double(f.d));
        s.X.push_back(sd / n);
        s.Y.push_back((sign < 0 ? -1.0 : 1.0) * sd * std::sqrt(n - 1.0) / n);
    }
    return s;
}

std::vector<PhaseState> integrate_warped(const WarpedPreset& p, const PhaseState& start, double ds, int steps) {
    p.validate();
    if (!(ds > 0.0) || steps < 0) throw PreconditionError("integrate_warped needs ds > 0 and steps >= 0");
    const std::size_t m = p.m();
    auto pack = [m](const PhaseState& s) {
        std::vector<double> v(2 * m + 1);
        v[0] = s.W;
        for (std::size_t i = 0; i < m; ++i) v[1 + i] = s.X[i], v[1 + m + i] = s.Y[i];
        return v;
    };
    auto unpack = [m](const std::vector<double>& v) {
        PhaseState s;
        s.W = v[0];
        s.X.assign(v.begin() + 1, v.begin() + 1 + m);
        s.Y.assign(v.begin() + 1 + m, v.end());
        return s;
    };
    auto field = [&](double, const std::vector<double>& v) { return pack(warped_rhs(p, unpack(v))); };

    std::vector<PhaseState> out{start};
    std::vector<double> y = pack(start);
    for (int k = 0; k < steps; ++k) {
        y = rk4_step(field, k * ds, y, ds);
        out.push_back(unpack(y));
    }
    return out;
}

}  // namespace soliton

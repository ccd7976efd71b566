#pragma once

// Multiply warped products dt^2 + sum_i g_i(t)^2 g_{N_i} over Einstein
// manifolds (N_i, g_{N_i}) with Ric = lambda_i g, in two coordinate systems:
// the metric jet in t, and the phase variables (W, X_i, Y_i) in s.

#include <array>
#include <complex>
#include <cstddef>
#include <string_view>
#include <vector>

namespace soliton {

struct WarpedFactor {
    int d = 1;            // dimension of N_i
    double lambda = 0.0;  // Einstein constant of N_i
};

struct WarpedPreset {
    std::vector<WarpedFactor> factors;
    double epsilon = -1.0;

    int n() const;
    std::size_t m() const { return factors.size(); }
    /// Throws PreconditionError unless m >= 1, every d_i >= 1, epsilon < 0 and
    /// lambda_i > 0 (lambda_i = 0 is allowed for circle factors, d_i = 1).
    void validate() const;
};

/// Factors d_i = dims[i] with the round-sphere constant lambda_i = d_i - 1.
WarpedPreset sphere_product(const std::vector<int>& dims, double epsilon);

/// W = 1/xi, X_i = sqrt(d_i) g_i'/(g_i xi), Y_i = sqrt(d_i lambda_i)/(g_i xi).
struct PhaseState {
    double W = 0.0;
    std::vector<double> X;
    std::vector<double> Y;
};

/// d/ds of the phase variables, ds = xi dt:
///   X_i' = X_i (G - 1) + Y_i^2/sqrt(d_i) + (eps/2)(sqrt(d_i) - X_i) W^2
///   Y_i' = Y_i (G - X_i/sqrt(d_i) - eps W^2/2)
///   W'   = W (G - eps W^2/2),  G = sum X_j^2.
PhaseState warped_rhs(const WarpedPreset& preset, const PhaseState& state);

/// G = sum X_i^2.
double phase_G(const PhaseState& state);

/// Hcal = sum sqrt(d_i) X_i.
double phase_H(const WarpedPreset& preset, const PhaseState& state);

/// Lcal = sum X_i^2 + sum Y_i^2 - 1.
double phase_L(const PhaseState& state);

/// Lcal + (n-1) eps W^2 / 2 - E W^2; zero on soliton trajectories.
double cons2_residual(const WarpedPreset& preset, const PhaseState& state, double E);

struct EFRate {
    double dE;
    double dF;
};

/// Companion planar system E' = eps W F, F' = W E - F.
EFRate ef_rhs(double epsilon, double W, double E, double F);

/// Eigenvalues (-1 -/+ sqrt(1 + 4 eps W^2))/2 of the companion system.
std::array<std::complex<double>, 2> ef_eigenvalues(double epsilon, double W);

/// Metric, potential and their first two t-derivatives at one time.
struct MetricJet {
    double t = 0.0;
    std::vector<double> g, gdot, gddot;
    double u = 0.0, udot = 0.0, uddot = 0.0;
};

enum class OracleKind { SmoothGaussian, ConicalGaussian, SphericalCone };

struct OracleSample {
    MetricJet jet;
    double xi = 0.0;  // closed-form generalized mean curvature
    double E = 0.0;   // closed-form eps u (conservation constant fixed to 0)
};

/// Closed-form shrinkers:
///  - SmoothGaussian: g_1 = t, g_i = sqrt(-2 lambda_i/eps) for i >= 2,
///    u = -eps t^2/4 - (d_1 + 1)/2; requires lambda_1 = d_1 - 1.
///  - ConicalGaussian: g_i = t sqrt(lambda_i/(n-1)), u = -eps t^2/4 - (n+1)/2.
///  - SphericalCone: g_i = sin(a t) sqrt(lambda_i) / (a sqrt(n-1)), u = 0, a = sqrt(-eps/(2n)).
/// Throws OracleDomainError for t <= 0, or t >= pi/a on the cone.
OracleSample oracle(const WarpedPreset& preset, OracleKind kind, double t);

OracleKind oracle_kind_from_string(std::string_view name);  // gaussian | conical | cone

/// Tangential soliton equation on each N_i, with l_i = g_i'/g_i:
///   -g_i''/g_i - (d_i - 1) l_i^2 - l_i sum_{j != i} d_j l_j + lambda_i/g_i^2 + u' l_i + eps/2.
std::vector<double> tangential_residuals(const WarpedPreset& preset, const MetricJet& jet);

/// -sum d_i g_i''/g_i + u'' + eps/2.
double jet_normal_residual(const WarpedPreset& preset, const MetricJet& jet);

/// S + tr(L^2) - xi^2 + (n-1) eps/2 - eps u.
double jet_ham_residual(const WarpedPreset& preset, const MetricJet& jet);

/// u'' + u' tr L - u'^2 - eps u (the conservation law with C = 0).
double jet_conservation_residual(const WarpedPreset& preset, const MetricJet& jet);

/// Phase coordinates of a jet. Throws PreconditionError at a turning point.
PhaseState phase_from_jet(const WarpedPreset& preset, const MetricJet& jet);

/// Exact d/ds of phase_from_jet, from the second derivatives in the jet.
PhaseState phase_rate_from_jet(const WarpedPreset& preset, const MetricJet& jet);

/// Lyapunov functional v^(2/n) (S + tr(L0^2)) with v = prod g_i^{d_i}.
double warped_fcal(const WarpedPreset& preset, const MetricJet& jet);

/// n prod lambda_i^(d_i/n), the lower bound of the Lyapunov functional.
double lyapunov_bound(const WarpedPreset& preset);

struct Linearization {
    std::array<std::array<double, 2>, 2> matrix;
    std::array<std::complex<double>, 2> eigenvalues;
    double discriminant;  // (n-1)(n-9)/n^2
    bool is_focus;
};

/// Linearization at P+ within the invariant subvariety of the phase system:
/// [[(1-n)/n, 2 sqrt(n-1)/n], [-sqrt(n-1)/n, 0]]. Requires n >= 2.
Linearization p_plus_linearization(int n);

/// P+ (sign = +1) or P- (sign = -1): X_i = sqrt(d_i)/n, Y_i = sign sqrt(d_i (n-1))/n, W = 0.
PhaseState p_point(const WarpedPreset& preset, int sign);

/// Fixed-step RK4 of warped_rhs in s; returns steps + 1 states starting with `start`.
std::vector<PhaseState> integrate_warped(const WarpedPreset& preset, const PhaseState& start, double ds, int steps);

}  // namespace soliton

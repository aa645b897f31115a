#pragma once

// Closed-form asymptotics of the gap opened at a strip crossing: the 2x2
// effective matrices, their branch extrema, the gap-edge coefficients and the
// wall corrections of order eps^{1/2}.

#include "gapopen/crossings.hpp"
#include "gapopen/errors.hpp"
#include "gapopen/model.hpp"
#include "gapopen/numerics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

namespace gapopen {

/// M0 (the perturbation restricted to the two crossing strip modes) and the
/// diagonal slope matrix M1 = diag(s, d) at quasimomentum tau1.
struct EffectiveMatrices {
    CMatrix m0 = CMatrix::Zero(2, 2);
    double s = 0.0; // tau1 + 2 pi n* / a1
    double d = 0.0; // tau1 + 2 pi m* / a1
    int n_star = 0;
    int m_star = 0;
    double tau1 = 0.0;
    double a1 = 1.0;
};

/// Strip mode sqrt(2/(a1 a2)) e^{2 pi i n x1 / a1} sin(pi p x2 / a2).
struct StripMode {
    int n;
    int p;
};

namespace detail {

/// Matrix elements of L(tau1) between strip modes, by the periodic trapezoid
/// rule on `nodes` x `nodes` points. On the cell the x1 part of a strip mode
/// is e^{2 pi i n x1/a1}, so (i d/dx1 - tau1) acts as multiplication by
/// -(tau1 + 2 pi n / a1).
inline CMatrix strip_perturbation_matrix(const OperatorConfig& cfg, const std::array<StripMode, 2>& modes,
                                         double tau1, int nodes) {
    const auto& lat = cfg.lattice;
    const double norm = 2.0 / lat.cell_area();
    const double h1 = lat.a1 / nodes, h2 = lat.a2 / nodes;
    CMatrix out = CMatrix::Zero(2, 2);
    std::array<double, 2> P{};
    for (int i = 0; i < 2; ++i) P[i] = tau1 + 2.0 * pi * modes[i].n / lat.a1;

    const bool has11 = !cfg.coeffs.a11.is_zero();
    const bool has1 = !cfg.coeffs.a1.is_zero();
    const bool has0 = !cfg.coeffs.a0.is_zero();
    if (!has11 && !has1 && !has0) return out;

    // entries (0,0), (0,1), (1,1); (1,0) follows by symmetry
    std::array<cplx, 3> acc{};
    const std::array<std::pair<int, int>, 3> idx{{{0, 0}, {0, 1}, {1, 1}}};
    for (int i2 = 0; i2 < nodes; ++i2) {
        const double x2 = i2 * h2;
        std::array<double, 2> sn{std::sin(pi * modes[0].p * x2 / lat.a2), std::sin(pi * modes[1].p * x2 / lat.a2)};
        for (int i1 = 0; i1 < nodes; ++i1) {
            const double x1 = i1 * h1;
            const double f11 = has11 ? cfg.coeffs.a11(x1, x2, lat) : 0.0;
            const double f1 = has1 ? cfg.coeffs.a1(x1, x2, lat) : 0.0;
            const double f0 = has0 ? cfg.coeffs.a0(x1, x2, lat) : 0.0;
            if (f11 == 0.0 && f1 == 0.0 && f0 == 0.0) continue;
            for (int e = 0; e < 3; ++e) {
                const auto [a, b] = idx[e];
                const double w = -P[a] * P[b] * f11 - (P[a] + P[b]) * f1 + f0;
                const double phase = 2.0 * pi * (modes[b].n - modes[a].n) * x1 / lat.a1;
                acc[e] += w * sn[a] * sn[b] * cplx(std::cos(phase), std::sin(phase));
            }
        }
    }
    for (int e = 0; e < 3; ++e) {
        const auto [a, b] = idx[e];
        out(a, b) = acc[e] * (norm * h1 * h2);
    }
    out(0, 0) = out(0, 0).real();
    out(1, 1) = out(1, 1).real();
    out(1, 0) = std::conj(out(0, 1));
    return out;
}

} // namespace detail

/// Effective matrices at tau1 for a crossing; n* = n, m* = m for tau1 >= 0
/// and their negatives otherwise. The quadrature is repeated at twice the
/// resolution and a ResolutionError is raised if the two disagree.
inline EffectiveMatrices assemble_M0(const OperatorConfig& cfg, const Crossing& c, double tau1,
                                     int nodes = 512, double tol = 1e-10) {
    EffectiveMatrices out;
    out.tau1 = tau1;
    out.a1 = cfg.lattice.a1;
    out.n_star = tau1 >= 0.0 ? c.n : -c.n;
    out.m_star = tau1 >= 0.0 ? c.m : -c.m;
    out.s = tau1 + 2.0 * pi * out.n_star / cfg.lattice.a1;
    out.d = tau1 + 2.0 * pi * out.m_star / cfg.lattice.a1;
    const std::array<StripMode, 2> modes{{{out.n_star, 1}, {out.m_star, 2}}};
    const CMatrix coarse = detail::strip_perturbation_matrix(cfg, modes, tau1, nodes);
    const CMatrix fine = detail::strip_perturbation_matrix(cfg, modes, tau1, 2 * nodes);
    const double defect = (fine - coarse).cwiseAbs().maxCoeff();
    if (defect > tol * std::max(1.0, fine.cwiseAbs().maxCoeff())) {
        std::ostringstream os;
        os << "M0 quadrature at " << nodes << " vs " << 2 * nodes << " nodes differs by " << defect;
        throw ResolutionError(os.str());
    }
    out.m0 = fine;
    return out;
}

/// M(t) = M0 - 2 t M1.
inline CMatrix effective_matrix(const EffectiveMatrices& mats, double t) {
    CMatrix m = mats.m0;
    m(0, 0) -= 2.0 * t * mats.s;
    m(1, 1) -= 2.0 * t * mats.d;
    return m;
}

struct BranchValues {
    double lambda_minus;
    double lambda_plus;
};

/// Eigenvalues of M(t), ascending, from the closed 2x2 formula.
inline BranchValues branch_values(const EffectiveMatrices& mats, double t) {
    const CMatrix m = effective_matrix(mats, t);
    const double mid = 0.5 * (m(0, 0).real() + m(1, 1).real());
    const double half = 0.5 * (m(0, 0).real() - m(1, 1).real());
    const double r = std::hypot(half, std::abs(m(0, 1)));
    return {mid - r, mid + r};
}

/// The k-constants of the closed-form branch extrema. k1 is -(s + d); the
/// variant with a single tau1 is kept in `k1_printed` for comparison.
struct BranchConstants {
    double k1, k2, k3, k4;
    double k1_printed;
};

inline BranchConstants branch_constants(const EffectiveMatrices& mats) {
    BranchConstants k{};
    k.k1 = -(mats.s + mats.d);
    k.k1_printed = -2.0 * pi * (mats.n_star + mats.m_star) / mats.a1 - mats.tau1;
    k.k2 = 0.5 * (mats.m0(0, 0).real() + mats.m0(1, 1).real());
    k.k3 = mats.s - mats.d;
    k.k4 = 0.5 * (mats.m0(1, 1).real() - mats.m0(0, 0).real());
    return k;
}

struct BranchExtrema {
    double t_plus = 0.0;     // argmin of lambda_plus
    double beta_plus = 0.0;  // min of lambda_plus
    double t_minus = 0.0;    // argmax of lambda_minus
    double beta_minus = 0.0; // max of lambda_minus
    // the two routes, kept for diagnostics
    double t_plus_numeric = 0.0, beta_plus_numeric = 0.0;
    double t_minus_numeric = 0.0, beta_minus_numeric = 0.0;
    BranchConstants k{};
};

namespace detail {

/// d lambda / dt of an eigenvalue of M(t) via the eigenvector (first-order
/// perturbation): v^* (-2 M1) v.
inline double branch_derivative(const EffectiveMatrices& mats, double t, bool plus) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(effective_matrix(mats, t));
    const CVector v = es.eigenvectors().col(plus ? 1 : 0);
    return -2.0 * (mats.s * std::norm(v(0)) + mats.d * std::norm(v(1)));
}

/// Scan + Brent, then bisection on the eigenvector derivative to push the
/// abscissa to machine precision.
inline std::pair<double, double> numeric_extremum(const EffectiveMatrices& mats, bool plus, double T) {
    auto f = [&](double t) {
        const auto b = branch_values(mats, t);
        return plus ? b.lambda_plus : -b.lambda_minus;
    };
    auto coarse = minimize_scalar(f, -T, T, 1e-12);
    // f is convex: its derivative changes sign once around the minimiser.
    auto df = [&](double t) {
        const double g = branch_derivative(mats, t, plus);
        return plus ? g : -g;
    };
    double step = std::max(1e-6, 1e-4 * std::abs(coarse.t_star));
    double lo = coarse.t_star - step, hi = coarse.t_star + step;
    int guard = 0;
    while (df(lo) > 0.0 && guard++ < 200) lo -= (step *= 2.0);
    guard = 0;
    while (df(hi) < 0.0 && guard++ < 200) hi += (step *= 2.0);
    if (df(lo) <= 0.0 && df(hi) >= 0.0) {
        for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo)); ++it) {
            const double mid = 0.5 * (lo + hi);
            (df(mid) < 0.0 ? lo : hi) = mid;
        }
        const double t = 0.5 * (lo + hi);
        return {t, plus ? f(t) : -f(t)};
    }
    return {coarse.t_star, plus ? coarse.f_star : -coarse.f_star};
}

} // namespace detail

/// Extrema of the two branches of M(t) over t, computed both by direct
/// minimisation and by the closed forms; they must agree to `agree_tol`.
inline BranchExtrema branch_extrema(const EffectiveMatrices& mats, double agree_tol = 1e-8) {
    BranchExtrema out;
    out.k = branch_constants(mats);
    const auto& k = out.k;
    const double disc = k.k3 * k.k3 - k.k1 * k.k1;
    if (!(disc > 0.0)) {
        std::ostringstream os;
        os << "k3^2 - k1^2 = " << disc << " <= 0: slopes (" << mats.s << ", " << mats.d
           << ") have the same sign, no interior extremum";
        throw SlopeConditionViolated(os.str());
    }
    const double g = std::abs(mats.m0(0, 1));
    const double root = std::sqrt(disc);
    const double ak3 = std::abs(k.k3);
    out.beta_plus = g / ak3 * root - k.k1 * k.k4 / k.k3 + k.k2;
    out.beta_minus = -g / ak3 * root - k.k1 * k.k4 / k.k3 + k.k2;
    out.t_plus = -k.k1 * g / (ak3 * root) - k.k4 / k.k3;
    out.t_minus = k.k1 * g / (ak3 * root) - k.k4 / k.k3;

    const double slope_scale = std::min(2.0 * std::sqrt(std::abs(mats.s * mats.d)), ak3);
    const double T = 10.0 * (mats.m0.norm() + 1.0) / slope_scale;
    std::tie(out.t_plus_numeric, out.beta_plus_numeric) = detail::numeric_extremum(mats, true, T);
    std::tie(out.t_minus_numeric, out.beta_minus_numeric) = detail::numeric_extremum(mats, false, T);

    const double vscale = std::max(1.0, mats.m0.norm());
    auto check = [&](const char* what, double closed, double numeric, double scale) {
        if (std::abs(closed - numeric) > agree_tol * scale) {
            std::ostringstream os;
            os.precision(17);
            os << what << ": closed form " << closed << " vs numeric " << numeric;
            throw ClosedFormMismatch(os.str());
        }
    };
    check("beta_plus", out.beta_plus, out.beta_plus_numeric, vscale);
    check("beta_minus", out.beta_minus, out.beta_minus_numeric, vscale);
    check("t_plus", out.t_plus, out.t_plus_numeric, std::max(1.0, std::abs(out.t_plus)));
    check("t_minus", out.t_minus, out.t_minus_numeric, std::max(1.0, std::abs(out.t_minus)));
    return out;
}

// ---------------------------------------------------------------------------
// Wall corrections

/// eps^{1/2} coefficient of the p-th eigenvalue of the 1D wall operator:
/// -(2 pi^2 p^2 / (a2^3 mass)) |1 - (-1)^p e^{-i tau2 a2}|^2.
inline double lambda_half_1d(int p, double tau2, double a2, double mass) {
    const double sign = (p % 2 == 0) ? 1.0 : -1.0;
    const cplx z = 1.0 - sign * std::exp(cplx(0.0, -tau2 * a2));
    return -2.0 * pi * pi * p * p * std::norm(z) / (a2 * a2 * a2 * mass);
}

/// Same expression with the parity taken from an independent integer
/// (the (-1)^m variant); used only to show that it does not fit the solver.
inline double lambda_half_1d_alt_parity(int p, int parity, double tau2, double a2, double mass) {
    const double sign = (parity % 2 == 0) ? 1.0 : -1.0;
    const cplx z = 1.0 - sign * std::exp(cplx(0.0, -tau2 * a2));
    return -2.0 * pi * pi * p * p * std::norm(z) / (a2 * a2 * a2 * mass);
}

/// Two-mode wall correction in the closed form
/// -(8 pi^2 / (a2^3 mass)) (|c1|^2 cos^2(tau2 a2) + |c2|^2 sin^2(tau2 a2)).
inline double lambda_half_pm(const std::array<cplx, 2>& c, double tau2, double a2, double mass) {
    const double k = 8.0 * pi * pi / (a2 * a2 * a2 * mass);
    const double cs = std::cos(tau2 * a2), sn = std::sin(tau2 * a2);
    return -k * (std::norm(c[0]) * cs * cs + std::norm(c[1]) * sn * sn);
}

/// Two-mode wall correction assembled from the 1D coefficients of the p = 1
/// and p = 2 strip modes: |c1|^2 lambda_half_1d(1) + |c2|^2 lambda_half_1d(2).
inline double lambda_half_pm_strip(const std::array<cplx, 2>& c, double tau2, double a2, double mass) {
    return std::norm(c[0]) * lambda_half_1d(1, tau2, a2, mass) +
           std::norm(c[1]) * lambda_half_1d(2, tau2, a2, mass);
}

/// Which closed form supplies the eps^{1/2} gap-edge terms.
enum class WallCorrection {
    printed,          // lambda_{l/r} = -K min/max(|e1|^2, |e2|^2), tau2 in {0, +-pi/a2} or {+-pi/(2 a2)}
    strip_consistent, // extrema of lambda_half_pm_strip over tau2
};

inline std::string to_string(WallCorrection w) {
    return w == WallCorrection::printed ? "printed" : "strip_consistent";
}

// ---------------------------------------------------------------------------
// Gap coefficients and prediction

/// Sign relating t to the quasimomentum offset: tau1 = tau1_{l/r} + sign eps^alpha t.
enum class TSign { plus = 1, minus = -1 };

struct EdgeTau2 {
    std::vector<double> candidates; // empty when indeterminate
    bool indeterminate = false;
};

struct GapCoefficients {
    Crossing crossing;
    EffectiveMatrices at_plus, at_minus;
    BranchExtrema extrema_plus, extrema_minus;
    double beta_minus_at_plus = 0.0, beta_minus_at_minus = 0.0;
    double beta_plus_at_plus = 0.0, beta_plus_at_minus = 0.0;
    double beta_l = 0.0, beta_r = 0.0;
    double tau1_l = 0.0, tau1_r = 0.0;
    bool tie_l = false, tie_r = false; // +tau0 chosen by the tie rule
    double t_l = 0.0, t_r = 0.0;
    std::array<cplx, 2> e_l{}, e_r{};
    double wall_mass = 0.0;
    double a2 = 1.0;
    double lambda_l = 0.0, lambda_r = 0.0; // printed convention
    bool degenerate_l = false, degenerate_r = false;
    EdgeTau2 tau2_l, tau2_r;               // printed convention
    double lambda_l_strip = 0.0, lambda_r_strip = 0.0;
    EdgeTau2 tau2_l_strip, tau2_r_strip;
    ConditionReport conditions;

    double lambda_left(WallCorrection w) const { return w == WallCorrection::printed ? lambda_l : lambda_l_strip; }
    double lambda_right(WallCorrection w) const { return w == WallCorrection::printed ? lambda_r : lambda_r_strip; }
    const EdgeTau2& tau2_left(WallCorrection w) const { return w == WallCorrection::printed ? tau2_l : tau2_l_strip; }
    const EdgeTau2& tau2_right(WallCorrection w) const { return w == WallCorrection::printed ? tau2_r : tau2_r_strip; }
};

namespace detail {

/// Unit eigenvector for the lower (or upper) eigenvalue of a 2x2 Hermitian
/// matrix, first nonzero component real positive.
inline std::array<cplx, 2> unit_eigenvector(const CMatrix& m, bool upper) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    CVector v = es.eigenvectors().col(upper ? 1 : 0);
    v.normalize();
    const int lead = std::abs(v(0)) > 1e-14 ? 0 : 1;
    const cplx ph = std::abs(v(lead)) > 0 ? std::conj(v(lead)) / std::abs(v(lead)) : cplx(1.0);
    v *= ph;
    v(lead) = v(lead).real();
    return {v(0), v(1)};
}

inline EdgeTau2 printed_tau2(bool first_dominates, bool degenerate, double a2) {
    if (degenerate) return {{}, true};
    if (first_dominates) return {{0.0, pi / a2, -pi / a2}, false};
    return {{pi / (2.0 * a2), -pi / (2.0 * a2)}, false};
}

inline EdgeTau2 endpoint_tau2(bool at_zero, bool degenerate, double a2) {
    if (degenerate) return {{}, true};
    if (at_zero) return {{0.0}, false};
    return {{pi / a2, -pi / a2}, false};
}

} // namespace detail

/// All closed-form gap-edge coefficients for a crossing. Throws
/// ConditionsViolated unless M12 != 0 at +-tau0, the slopes have opposite
/// signs and beta_l < beta_r.
inline GapCoefficients gap_coefficients(const OperatorConfig& cfg, const Crossing& labelled, int nodes = 512) {
    const Crossing c = normalized(labelled);
    GapCoefficients g;
    g.crossing = c;
    g.a2 = cfg.lattice.a2;
    g.at_plus = assemble_M0(cfg, c, c.tau0, nodes);
    g.at_minus = assemble_M0(cfg, c, -c.tau0, nodes);
    g.conditions = check_conditions(c, cfg.lattice, g.at_plus.m0, g.at_minus.m0, 0.0, 0.0);
    if (!g.conditions.m12_nonzero_at_plus || !g.conditions.m12_nonzero_at_minus ||
        !g.conditions.slopes_opposite) {
        g.conditions.beta_order = false;
        throw ConditionsViolated(g.conditions.describe());
    }
    g.extrema_plus = branch_extrema(g.at_plus);
    g.extrema_minus = branch_extrema(g.at_minus);
    g.beta_minus_at_plus = g.extrema_plus.beta_minus;
    g.beta_minus_at_minus = g.extrema_minus.beta_minus;
    g.beta_plus_at_plus = g.extrema_plus.beta_plus;
    g.beta_plus_at_minus = g.extrema_minus.beta_plus;

    constexpr double tie = 1e-10;
    const bool left_tie = std::abs(g.beta_minus_at_plus - g.beta_minus_at_minus) <= tie;
    const bool right_tie = std::abs(g.beta_plus_at_plus - g.beta_plus_at_minus) <= tie;
    const bool left_plus = left_tie || g.beta_minus_at_plus > g.beta_minus_at_minus;
    const bool right_plus = right_tie || g.beta_plus_at_plus < g.beta_plus_at_minus;
    g.tie_l = left_tie;
    g.tie_r = right_tie;
    g.beta_l = left_plus ? g.beta_minus_at_plus : g.beta_minus_at_minus;
    g.beta_r = right_plus ? g.beta_plus_at_plus : g.beta_plus_at_minus;
    g.tau1_l = left_plus ? c.tau0 : -c.tau0;
    g.tau1_r = right_plus ? c.tau0 : -c.tau0;
    g.t_l = left_plus ? g.extrema_plus.t_minus : g.extrema_minus.t_minus;
    g.t_r = right_plus ? g.extrema_plus.t_plus : g.extrema_minus.t_plus;

    g.conditions = check_conditions(c, cfg.lattice, g.at_plus.m0, g.at_minus.m0, g.beta_l, g.beta_r);
    if (!g.conditions.admissible()) throw ConditionsViolated(g.conditions.describe());

    const auto& mats_l = left_plus ? g.at_plus : g.at_minus;
    const auto& mats_r = right_plus ? g.at_plus : g.at_minus;
    g.e_l = detail::unit_eigenvector(effective_matrix(mats_l, g.t_l), false);
    g.e_r = detail::unit_eigenvector(effective_matrix(mats_r, g.t_r), true);

    g.wall_mass = wall_moments(cfg.wall).mass;
    const double a2 = cfg.lattice.a2;
    const double K = 8.0 * pi * pi / (a2 * a2 * a2 * g.wall_mass);
    const double l1 = std::norm(g.e_l[0]), l2 = std::norm(g.e_l[1]);
    const double r1 = std::norm(g.e_r[0]), r2 = std::norm(g.e_r[1]);
    g.lambda_l = -K * std::min(l1, l2);
    g.lambda_r = -K * std::max(r1, r2);
    g.degenerate_l = std::abs(std::abs(g.e_l[0]) - std::abs(g.e_l[1])) < 1e-8;
    g.degenerate_r = std::abs(std::abs(g.e_r[0]) - std::abs(g.e_r[1])) < 1e-8;
    // right edge: first mode dominates -> {0, +-pi/a2}; left edge: reversed
    g.tau2_r = detail::printed_tau2(std::abs(g.e_r[0]) > std::abs(g.e_r[1]), g.degenerate_r, a2);
    g.tau2_l = detail::printed_tau2(std::abs(g.e_l[0]) < std::abs(g.e_l[1]), g.degenerate_l, a2);

    // lambda_half_pm_strip = -K (|c1|^2 cos^2(tau2 a2 / 2) + 4 |c2|^2 sin^2(tau2 a2 / 2)),
    // affine in cos(tau2 a2): extrema at tau2 = 0 or +-pi/a2.
    g.lambda_l_strip = -K * std::min(l1, 4.0 * l2);
    g.lambda_r_strip = -K * std::max(r1, 4.0 * r2);
    const bool strip_deg_l = std::abs(l1 - 4.0 * l2) < 1e-8;
    const bool strip_deg_r = std::abs(r1 - 4.0 * r2) < 1e-8;
    g.tau2_l_strip = detail::endpoint_tau2(l1 < 4.0 * l2, strip_deg_l, a2);
    g.tau2_r_strip = detail::endpoint_tau2(r1 > 4.0 * r2, strip_deg_r, a2);
    return g;
}

struct GapPrediction {
    double eps = 0.0;
    double E0 = 0.0;
    double eta_l = 0.0, eta_r = 0.0;
    QuasiMomentum extremum_l, extremum_r; // tau2 is the first candidate, NaN if indeterminate
    EdgeTau2 tau2_candidates_l, tau2_candidates_r;
    double remainder_order = 0.0;
    WallCorrection wall = WallCorrection::printed;
};

inline GapPrediction predict_gap(const GapCoefficients& g, double E0, double alpha, double eps,
                                 WallCorrection wall = WallCorrection::printed, TSign sign = TSign::plus) {
    if (!(g.beta_l < g.beta_r)) {
        std::ostringstream os;
        os << "beta_l = " << g.beta_l << " >= beta_r = " << g.beta_r;
        throw NoGapPredicted(os.str());
    }
    GapPrediction p;
    p.eps = eps;
    p.E0 = E0;
    p.wall = wall;
    const double ea = std::pow(eps, alpha), eh = std::sqrt(eps);
    p.eta_l = E0 + ea * g.beta_l + eh * g.lambda_left(wall);
    p.eta_r = E0 + ea * g.beta_r + eh * g.lambda_right(wall);
    const double sg = static_cast<double>(static_cast<int>(sign));
    p.tau2_candidates_l = g.tau2_left(wall);
    p.tau2_candidates_r = g.tau2_right(wall);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    p.extremum_l = {g.tau1_l + sg * ea * g.t_l,
                    p.tau2_candidates_l.candidates.empty() ? nan : p.tau2_candidates_l.candidates.front()};
    p.extremum_r = {g.tau1_r + sg * ea * g.t_r,
                    p.tau2_candidates_r.candidates.empty() ? nan : p.tau2_candidates_r.candidates.front()};
    p.remainder_order = 2.0 * alpha;
    return p;
}

} // namespace gapopen

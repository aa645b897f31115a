#pragma once

// Fourier-Galerkin solver for the transverse wall operator
//   A_eps(tau2) = -d^2/dx2^2 + eps^{-3/2} V_eps(x2)
// on (0, a2) with quasiperiodic conditions, in the basis
// e^{i (tau2 + 2 pi q / a2) x2}, |q| <= Q.

#include "gapopen/model.hpp"
#include "gapopen/numerics.hpp"
#include "gapopen/parallel.hpp"
#include "gapopen/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace gapopen {

/// Smallest cutoff that resolves the wall at eps.
inline int recommended_wall_cutoff(const OperatorConfig& cfg, double eps) {
    return std::max(8, static_cast<int>(std::ceil(4.0 * cfg.lattice.a2 / (eps * cfg.wall.a3))));
}

/// Default cutoff: ceil(6 a2 / (eps a3)), capped at 4000.
inline int default_wall_cutoff(const OperatorConfig& cfg, double eps) {
    return std::min(4000, static_cast<int>(std::ceil(6.0 * cfg.lattice.a2 / (eps * cfg.wall.a3))));
}

struct WallMatrix {
    HermitianMatrix matrix;
    bool below_recommended_cutoff = false;
};

/// Galerkin matrix: (tau2 + 2 pi q / a2)^2 on the diagonal plus
/// eps^{-3/2} Vhat_eps(q - q').
inline WallMatrix assemble_A(const OperatorConfig& cfg, double tau2, double eps, int Q) {
    const double a2 = cfg.lattice.a2;
    const auto vhat = wall_fourier_table(cfg.wall, eps, a2, 2 * Q);
    const double scale = std::pow(eps, -1.5);
    const int dim = 2 * Q + 1;
    CMatrix h(dim, dim);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            const int k = r - c;
            const cplx v = k >= 0 ? vhat[k] : std::conj(vhat[-k]);
            h(r, c) = scale * v;
        }
        const double kq = tau2 + 2.0 * pi * (r - Q) / a2;
        h(r, r) += kq * kq;
    }
    return {HermitianMatrix(std::move(h)), Q < recommended_wall_cutoff(cfg, eps)};
}

struct Spectrum1D {
    double tau2 = 0.0;
    double eps = 0.0;
    int Q = 0;
    RVector values;
    bool below_recommended_cutoff = false;
};

inline Spectrum1D bands_1d(const OperatorConfig& cfg, double tau2, double eps, int Q) {
    auto a = assemble_A(cfg, tau2, eps, Q);
    Spectrum1D s{tau2, eps, Q, eigh(a.matrix).values, a.below_recommended_cutoff};
    return s;
}

/// Lowest eigenpairs of A_eps(tau2); eigenvectors are coefficient vectors over
/// q = -Q..Q (column p-1 holds mode p).
struct WallModes {
    double tau2 = 0.0;
    RVector values;
    CMatrix vectors;
};

inline WallModes wall_modes(const OperatorConfig& cfg, double tau2, double eps, int Q, int count) {
    auto a = assemble_A(cfg, tau2, eps, Q);
    auto res = eigh_lowest(a.matrix, count);
    return {tau2, std::move(res.values), std::move(*res.vectors)};
}

// ---------------------------------------------------------------------------
// Convergence towards the Dirichlet strip

struct ModeConvergence {
    int p = 1;
    double dirichlet_value = 0.0;        // pi^2 p^2 / a2^2
    std::vector<double> eps;             // schedule
    std::vector<double> lambda;          // lambda_eps^(p)
    std::vector<double> error;           // |lambda - dirichlet|
    std::vector<double> scaled;          // (lambda - dirichlet) / eps^{1/2}
    std::optional<OrderFit> order;       // empty when an error was exactly 0
    double extrapolated_coefficient = 0; // intercept of scaled vs eps^{1/2}
    double predicted_coefficient = 0;    // lambda_half_1d
    double alternative_coefficient = 0;  // same with the opposite parity sign
};

struct ConvergenceReport1D {
    double tau2 = 0.0;
    std::vector<int> cutoffs;
    std::vector<ModeConvergence> modes;
};

/// Eigenvalues over the epsilon schedule for p = 1..p_max, fitted order of the
/// distance to pi^2 p^2 / a2^2 and comparison of the eps^{1/2} coefficient
/// with lambda_half_1d. `cutoff` of 0 selects the default per eps.
inline ConvergenceReport1D convergence_1d(const OperatorConfig& cfg, double tau2, int p_max, int cutoff = 0,
                                          unsigned workers = 1) {
    if (cfg.epsilons.size() < 4) throw InsufficientData("convergence_1d needs at least 4 eps values");
    if (p_max < 1 || p_max > 3) throw std::invalid_argument("p_max must be in 1..3");
    const auto& eps = cfg.epsilons;
    std::vector<Spectrum1D> spectra(eps.size());
    parallel_for(eps.size(), workers, [&](std::size_t i) {
        const int Q = cutoff > 0 ? cutoff : default_wall_cutoff(cfg, eps[i]);
        spectra[i] = bands_1d(cfg, tau2, eps[i], Q);
    });
    const double a2 = cfg.lattice.a2;
    const double mass = wall_moments(cfg.wall).mass;
    ConvergenceReport1D rep;
    rep.tau2 = tau2;
    for (const auto& s : spectra) rep.cutoffs.push_back(s.Q);
    for (int p = 1; p <= p_max; ++p) {
        ModeConvergence mc;
        mc.p = p;
        mc.dirichlet_value = pi * pi * p * p / (a2 * a2);
        std::vector<ErrorSample> samples;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            const double lam = spectra[i].values(p - 1);
            mc.eps.push_back(eps[i]);
            mc.lambda.push_back(lam);
            mc.error.push_back(std::abs(lam - mc.dirichlet_value));
            mc.scaled.push_back((lam - mc.dirichlet_value) / std::sqrt(eps[i]));
            samples.push_back({eps[i], mc.error.back()});
        }
        try {
            mc.order = fit_order(samples);
        } catch (const DegenerateFit&) {
            mc.order.reset();
        }
        // least squares of scaled = c + b sqrt(eps)
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(eps.size());
        for (std::size_t i = 0; i < eps.size(); ++i) {
            const double x = std::sqrt(eps[i]);
            sx += x;
            sy += mc.scaled[i];
            sxx += x * x;
            sxy += x * mc.scaled[i];
        }
        const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        mc.extrapolated_coefficient = (sy - b * sx) / n;
        mc.predicted_coefficient = lambda_half_1d(p, tau2, a2, mass);
        mc.alternative_coefficient = lambda_half_1d_alt_parity(p, p + 1, tau2, a2, mass);
        rep.modes.push_back(std::move(mc));
    }
    return rep;
}

} // namespace gapopen

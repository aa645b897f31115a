#pragma once

// Crossings of the p = 1 and p = 2 Dirichlet-strip dispersion curves,
// the admissibility conditions for gap opening at a crossing, and the inverse
// problem of choosing a1 for a prescribed crossing.

#include "gapopen/errors.hpp"
#include "gapopen/model.hpp"
#include "gapopen/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <tuple>
#include <vector>

namespace gapopen {

struct Crossing {
    int n = 0;         // x1 harmonic of the p = 1 branch
    int m = 0;         // x1 harmonic of the p = 2 branch
    double tau0 = 0.0; // in [0, pi / a1]
    double E0 = 0.0;
    bool boundary = false; // tau0 == 0 or tau0 == pi / a1

    /// tau1 + 2 pi n / a1 and tau1 + 2 pi m / a1 at tau1 = tau0.
    double slope_n(const LatticeParams& lat) const { return tau0 + 2.0 * pi * n / lat.a1; }
    double slope_m(const LatticeParams& lat) const { return tau0 + 2.0 * pi * m / lat.a1; }
};

/// Dirichlet-strip eigenvalue E0^{(n,p)}(tau1).
inline double strip_energy(const LatticeParams& lat, int n, int p, double tau1) {
    const double k = tau1 + 2.0 * pi * n / lat.a1;
    return k * k + pi * pi * p * p / (lat.a2 * lat.a2);
}

/// Relative residual of the crossing identity; should be ~1e-16.
inline double crossing_residual(const LatticeParams& lat, const Crossing& c) {
    const double e1 = strip_energy(lat, c.n, 1, c.tau0);
    const double e2 = strip_energy(lat, c.m, 2, c.tau0);
    return std::max(std::abs(e1 - c.E0), std::abs(e2 - c.E0)) / std::abs(c.E0);
}

inline bool in_energy_window(const LatticeParams& lat, double E0) {
    const double unit = pi * pi / (lat.a2 * lat.a2);
    return E0 > unit && E0 < 9.0 * unit;
}

/// Canonical representative with tau0 >= 0.
inline Crossing normalized(Crossing c) {
    if (c.tau0 < 0.0) {
        c.tau0 = -c.tau0;
        c.n = -c.n;
        c.m = -c.m;
    }
    return c;
}

/// All crossings with |n|, |m| <= n_max, sorted by energy. For n != m the
/// crossing condition is linear in tau0 and is solved exactly.
inline std::vector<Crossing> enumerate_crossings(const LatticeParams& lat, int n_max) {
    if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
    const double u = 2.0 * pi / lat.a1;
    const double rhs = 3.0 * pi * pi / (lat.a2 * lat.a2);
    const double zone = pi / lat.a1;
    const double snap = 1e-12 * zone;
    std::vector<Crossing> found;
    for (int n = -n_max; n <= n_max; ++n) {
        for (int m = -n_max; m <= n_max; ++m) {
            if (n == m) continue;
            // u (n - m) (2 tau + u (n + m)) = 3 pi^2 / a2^2
            double tau = 0.5 * (rhs / (u * (n - m)) - u * (n + m));
            if (std::abs(tau) > zone + snap) continue;
            if (std::abs(std::abs(tau) - zone) <= snap) tau = std::copysign(zone, tau);
            if (std::abs(tau) <= snap) tau = 0.0;
            Crossing c{n, m, tau, 0.0, false};
            c = normalized(c);
            c.E0 = strip_energy(lat, c.n, 1, c.tau0);
            if (!in_energy_window(lat, c.E0)) continue;
            c.boundary = c.tau0 == 0.0 || c.tau0 == zone;
            found.push_back(c);
        }
    }

    // At the zone edges the same physical crossing has a second label:
    // tau0 = 0 pairs (n, m) with (-n, -m); tau0 = pi/a1 pairs (n, m) with
    // (-n-1, -m-1). Keep the label with the larger (n, m).
    auto mirror = [&](const Crossing& c) -> std::optional<std::pair<int, int>> {
        if (c.tau0 == 0.0) return std::pair{-c.n, -c.m};
        if (c.tau0 == zone) return std::pair{-c.n - 1, -c.m - 1};
        return std::nullopt;
    };
    std::vector<Crossing> out;
    for (const auto& c : found) {
        bool drop = false;
        for (const auto& o : out)
            if (o.n == c.n && o.m == c.m && o.tau0 == c.tau0) drop = true;
        if (auto mr = mirror(c); mr && std::pair{c.n, c.m} < *mr) {
            for (const auto& o : found)
                if (o.tau0 == c.tau0 && o.n == mr->first && o.m == mr->second) drop = true;
        }
        if (!drop) out.push_back(c);
    }
    std::stable_sort(out.begin(), out.end(), [](const Crossing& a, const Crossing& b) {
        return std::tie(a.E0, a.n, a.m) < std::tie(b.E0, b.n, b.m);
    });
    return out;
}

/// Period a1 for which (n, m, tau0) is a crossing at energy E0 with the given
/// a2. Solves u^2 (n^2 - m^2) + 2 tau0 u (n - m) - 3 pi^2 / a2^2 = 0 for
/// u = 2 pi / a1 and keeps the root consistent with E0, the zone and the window.
inline double design_a1(double E0_target, double tau0_target, int n, int m, double a2) {
    if (n == m) throw NoAdmissibleRoot("n and m must differ");
    if (tau0_target < 0.0) throw NoAdmissibleRoot("tau0 must be non-negative");
    LatticeParams probe{1.0, a2};
    if (!in_energy_window(probe, E0_target)) {
        std::ostringstream os;
        os << "E0 = " << E0_target << " outside (pi^2/a2^2, 9 pi^2/a2^2)";
        throw NoAdmissibleRoot(os.str());
    }
    const double qa = static_cast<double>(n) * n - static_cast<double>(m) * m;
    const double qb = 2.0 * tau0_target * (n - m);
    const double qc = -3.0 * pi * pi / (a2 * a2);
    std::vector<double> roots;
    if (qa == 0.0) {
        if (qb != 0.0) roots.push_back(-qc / qb);
    } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            // numerically stable pair
            const double q = -0.5 * (qb + std::copysign(sq, qb == 0.0 ? 1.0 : qb));
            roots.push_back(q / qa);
            if (q != 0.0) roots.push_back(qc / q);
        }
    }
    std::optional<double> best;
    double best_err = 0.0;
    for (double u : roots) {
        if (!(u > 0.0)) continue;
        const double a1 = 2.0 * pi / u;
        LatticeParams lat{a1, a2};
        if (tau0_target > pi / a1 * (1.0 + 1e-12)) continue;
        const double e = strip_energy(lat, n, 1, tau0_target);
        const double err = std::abs(e - E0_target) / E0_target;
        if (err > 1e-10) continue;
        if (!best || err < best_err) {
            best = a1;
            best_err = err;
        }
    }
    if (!best) throw NoAdmissibleRoot("no positive root reproduces E0 inside the zone");
    return *best;
}

struct ConditionReport {
    bool m12_nonzero_at_plus = false;
    double m12_abs_plus = 0.0;
    bool m12_nonzero_at_minus = false;
    double m12_abs_minus = 0.0;
    bool slopes_opposite = false;
    double slope_product = 0.0;
    bool beta_order = false;
    double beta_l = 0.0, beta_r = 0.0;

    bool admissible() const {
        return m12_nonzero_at_plus && m12_nonzero_at_minus && slopes_opposite && beta_order;
    }

    std::string describe() const {
        std::ostringstream os;
        os << "|M12(+tau0)| = " << m12_abs_plus << (m12_nonzero_at_plus ? " ok" : " FAIL")
           << "; |M12(-tau0)| = " << m12_abs_minus << (m12_nonzero_at_minus ? " ok" : " FAIL")
           << "; slope product = " << slope_product << (slopes_opposite ? " ok" : " FAIL")
           << "; beta_l = " << beta_l << ", beta_r = " << beta_r << (beta_order ? " ok" : " FAIL");
        return os.str();
    }
};

inline bool m12_nonzero(const CMatrix& m0, double& abs_m12) {
    abs_m12 = std::abs(m0(0, 1));
    return abs_m12 > 1e-10 * m0.norm();
}

/// The admissibility inequalities for gap opening at a crossing.
inline ConditionReport check_conditions(const Crossing& c, const LatticeParams& lat, const CMatrix& m0_plus,
                                        const CMatrix& m0_minus, double beta_l, double beta_r) {
    ConditionReport r;
    r.m12_nonzero_at_plus = m12_nonzero(m0_plus, r.m12_abs_plus);
    r.m12_nonzero_at_minus = m12_nonzero(m0_minus, r.m12_abs_minus);
    r.slope_product = c.slope_n(lat) * c.slope_m(lat);
    r.slopes_opposite = r.slope_product < 0.0;
    r.beta_l = beta_l;
    r.beta_r = beta_r;
    r.beta_order = beta_l < beta_r;
    return r;
}

} // namespace gapopen

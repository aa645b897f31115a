#include "gapopen/bloch1d.hpp"

#include <gtest/gtest.h>

using namespace gapopen;

namespace {

OperatorConfig trapezoid_config() {
    OperatorConfig cfg;
    cfg.lattice = {1.0, 1.0};
    cfg.wall = WallProfile::trapezoid(0.25, 1.0, 1.0);
    cfg.alpha = 0.4;
    cfg.epsilons = {0.1, 0.07, 0.05, 0.035, 0.025};
    return cfg;
}

// Half trace of the monodromy matrix of u'' = (s V(x/eps) - E) u over one
// period, by RK4 on a fine uniform grid aligned with the kinks.
double half_trace(const OperatorConfig& cfg, double eps, double E, int steps) {
    const double s = std::pow(eps, -1.5), a2 = cfg.lattice.a2;
    auto rhs = [&](double x, const std::array<double, 4>& y) {
        const double q = s * cfg.wall(x / eps) - E;
        return std::array<double, 4>{y[1], q * y[0], y[3], q * y[2]};
    };
    std::array<double, 4> y{1.0, 0.0, 0.0, 1.0};
    const double h = a2 / steps;
    double x = -a2 / 2;
    for (int i = 0; i < steps; ++i) {
        auto k1 = rhs(x, y);
        std::array<double, 4> t;
        for (int j = 0; j < 4; ++j) t[j] = y[j] + 0.5 * h * k1[j];
        auto k2 = rhs(x + 0.5 * h, t);
        for (int j = 0; j < 4; ++j) t[j] = y[j] + 0.5 * h * k2[j];
        auto k3 = rhs(x + 0.5 * h, t);
        for (int j = 0; j < 4; ++j) t[j] = y[j] + h * k3[j];
        auto k4 = rhs(x + h, t);
        for (int j = 0; j < 4; ++j) y[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
        x += h;
    }
    return 0.5 * (y[0] + y[3]);
}

// Bloch eigenvalue near `guess`: root of half_trace(E) - cos(tau2 a2).
double shooting_eigenvalue(const OperatorConfig& cfg, double eps, double tau2, double guess, double width) {
    const double target = std::cos(tau2 * cfg.lattice.a2);
    auto f = [&](double E) { return half_trace(cfg, eps, E, 40000) - target; };
    double lo = guess - width, hi = guess + width;
    double flo = f(lo);
    EXPECT_LT(flo * f(hi), 0.0) << "bracket";
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi), fm = f(mid);
        if (flo * fm <= 0.0) hi = mid;
        else lo = mid, flo = fm;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST(AssembleA, EntriesFromDefinition) {
    const auto cfg = trapezoid_config();
    const double eps = 0.1, tau2 = 0.7;
    const int Q = 12;
    const auto a = assemble_A(cfg, tau2, eps, Q);
    EXPECT_TRUE(a.below_recommended_cutoff);
    const CMatrix& h = a.matrix.entries();
    const double s = std::pow(eps, -1.5);
    for (int r = 0; r <= 2 * Q; r += 5)
        for (int c = 0; c <= 2 * Q; c += 3) {
            const int k = r - c;
            const double v = (1.0 / cfg.lattice.a2) * quad_periodic([&](double x) {
                return cfg.wall(x / eps) * std::cos(2.0 * pi * k * x);
            }, -0.5, 0.5, 200000);
            double expect = s * v;
            if (r == c) expect += std::pow(tau2 + 2.0 * pi * (r - Q), 2);
            EXPECT_NEAR(h(r, c).real(), expect, 1e-6 * std::max(1.0, std::abs(expect)));
        }
}

TEST(Bands1D, MatchesShootingOracle) {
    const auto cfg = trapezoid_config();
    for (double eps : {0.2, 0.1}) {
        for (double tau2 : {0.0, pi / 2}) {
            const auto s = bands_1d(cfg, tau2, eps, default_wall_cutoff(cfg, eps) * 4);
            for (int p = 0; p < 2; ++p) {
                const double ref = shooting_eigenvalue(cfg, eps, tau2, s.values(p), 0.05);
                EXPECT_NEAR(s.values(p), ref, 2e-4 * std::abs(ref)) << "eps " << eps << " p " << p + 1;
            }
        }
    }
}

TEST(Bands1D, StructuralProperties) {
    const auto cfg = trapezoid_config();
    const double eps = 0.07;
    const int Q = default_wall_cutoff(cfg, eps);
    const auto plus = bands_1d(cfg, 0.9, eps, Q);
    const auto minus = bands_1d(cfg, -0.9, eps, Q);
    for (int i = 0; i < 10; ++i) {
        EXPECT_GE(plus.values(i), 0.0);
        EXPECT_NEAR(plus.values(i), minus.values(i), 1e-9 * std::max(1.0, plus.values(i)));
    }
    // Rayleigh-Ritz: enlarging the basis can only lower each eigenvalue
    const auto small = bands_1d(cfg, 0.9, eps, Q / 2);
    for (int i = 0; i < 5; ++i) EXPECT_LE(plus.values(i), small.values(i) + 1e-9);
    // periodicity in tau2 with index shift: same spectrum up to truncation edges
    const auto shifted = bands_1d(cfg, 0.9 + 2.0 * pi, eps, Q);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(shifted.values(i), plus.values(i), 1e-3);
}

TEST(WallModes, EigenpairsAreConsistent) {
    const auto cfg = trapezoid_config();
    const auto a = assemble_A(cfg, 0.4, 0.1, 80);
    const auto m = wall_modes(cfg, 0.4, 0.1, 80, 4);
    ASSERT_EQ(m.values.size(), 4);
    for (int p = 0; p < 4; ++p) {
        const CVector v = m.vectors.col(p);
        EXPECT_LE((a.matrix.entries() * v - m.values(p) * v).norm(), 1e-9 * a.matrix.entries().norm());
    }
}

TEST(Convergence1D, ApproachesDirichletFromBelow) {
    const auto cfg = trapezoid_config();
    const auto rep = convergence_1d(cfg, 0.0, 2, 0, 2);
    ASSERT_EQ(rep.modes.size(), 2u);
    const auto& m1 = rep.modes[0];
    // the error decreases along the schedule
    for (std::size_t i = 1; i < m1.error.size(); ++i) EXPECT_LT(m1.error[i], m1.error[i - 1]);
    EXPECT_NEAR(m1.predicted_coefficient, -8.0 * pi * pi / 0.75, 1e-10);
    auto few = cfg;
    few.epsilons = {0.1, 0.05, 0.025};
    EXPECT_THROW(convergence_1d(few, 0.0, 1), InsufficientData);
}

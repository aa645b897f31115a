#pragma once

// Brillouin-zone scan of the two bands that meet at a crossing, gap-edge
// detection with local refinement, and comparison with the predicted edges.

#include "gapopen/bloch2d.hpp"
#include "gapopen/crossings.hpp"
#include "gapopen/numerics.hpp"
#include "gapopen/parallel.hpp"
#include "gapopen/predictor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace gapopen {

/// Lower and upper band of the crossing pair at one quasimomentum.
using BandPairFn = std::function<std::pair<double, double>(const QuasiMomentum&)>;

struct BandSurface {
    double eps = 0.0;
    int G1 = 0, G2 = 0;            // cells per axis; the grid has (G1+1) x (G2+1) points
    LatticeParams lattice;
    int k_lower = 0;               // global index of the lower band
    EnergyWindow window;
    std::vector<QuasiMomentum> grid; // row-major in tau1, then tau2
    std::vector<double> lower_band, upper_band;

    double cell1() const { return 2.0 * lattice.zone1() / G1; }
    double cell2() const { return 2.0 * lattice.zone2() / G2; }
};

/// Global index of the lower crossing band: the number of strip levels at
/// tau0 strictly below E0.
inline int crossing_band_index(const LatticeParams& lat, const Crossing& c) {
    const double tol = 1e-9 * c.E0;
    int below = 0;
    for (int count = 8;; count *= 2) {
        const auto levels = reference_bands(lat, c.tau0, count);
        below = 0;
        for (const auto& l : levels)
            if (l.E < c.E0 - tol) ++below;
        if (below < count - 2) break;
    }
    return below;
}

/// Default half-width coefficient of the scan window.
inline double default_window_c2(const GapCoefficients& g) {
    return 4.0 * std::max(std::abs(g.beta_l), std::abs(g.beta_r)) + 1.0;
}

inline std::vector<QuasiMomentum> zone_grid(const LatticeParams& lat, int G1, int G2) {
    std::vector<QuasiMomentum> grid;
    grid.reserve(static_cast<std::size_t>(G1 + 1) * (G2 + 1));
    for (int i = 0; i <= G1; ++i)
        for (int j = 0; j <= G2; ++j)
            grid.push_back({-lat.zone1() + 2.0 * lat.zone1() * i / G1, -lat.zone2() + 2.0 * lat.zone2() * j / G2});
    return grid;
}

/// Evaluates the crossing pair on the closed zone grid. More than two
/// eigenvalues inside the window at a grid point is an identification failure.
inline BandSurface scan(const Bloch2DSolver& solver, const LatticeParams& lat, const Crossing& c, double C2,
                        double alpha, int G1, int G2, unsigned workers = 1) {
    if (G1 < 16 || G2 < 16) throw std::invalid_argument("grid density must be at least 16 x 16");
    BandSurface s;
    s.eps = solver.eps();
    s.G1 = G1;
    s.G2 = G2;
    s.lattice = lat;
    s.k_lower = crossing_band_index(lat, c);
    const double half = C2 * std::pow(s.eps, alpha);
    s.window = {c.E0 - half, c.E0 + half};
    s.grid = zone_grid(lat, G1, G2);
    const std::size_t n = s.grid.size();
    s.lower_band.resize(n);
    s.upper_band.resize(n);
    std::vector<int> inside(n);
    parallel_for(n, workers, [&](std::size_t i) {
        const RVector all = solver.spectrum(s.grid[i]);
        if (all.size() < s.k_lower + 2) throw BandIdentificationError("discretisation has too few eigenvalues");
        s.lower_band[i] = all(s.k_lower);
        s.upper_band[i] = all(s.k_lower + 1);
        int cnt = 0;
        for (Eigen::Index k = 0; k < all.size(); ++k)
            if (all(k) >= s.window.lo && all(k) <= s.window.hi) ++cnt;
        inside[i] = cnt;
    });
    for (std::size_t i = 0; i < n; ++i)
        if (inside[i] > 2) {
            std::ostringstream os;
            os.precision(17);
            os << inside[i] << " bands inside [" << s.window.lo << ", " << s.window.hi << "] at tau = ("
               << s.grid[i].tau1 << ", " << s.grid[i].tau2 << "), eps = " << s.eps;
            throw BandIdentificationError(os.str());
        }
    return s;
}

inline BandPairFn band_pair(const Bloch2DSolver& solver, int k_lower) {
    return [&solver, k_lower](const QuasiMomentum& tau) {
        const RVector all = solver.spectrum(tau);
        return std::pair{all(k_lower), all(k_lower + 1)};
    };
}

struct GapMeasurement {
    double eps = 0.0;
    bool gap_found = false;
    double edge_l = 0.0, edge_r = 0.0;
    QuasiMomentum argmax_l, argmin_r;
    double coarse_edge_l = 0.0, coarse_edge_r = 0.0;
    std::array<double, 2> refinement_radius{}; // final pattern-search step (tau1, tau2)
    double width() const { return edge_r - edge_l; }
};

namespace detail {

/// First index attaining the extremum; on equal values the lexicographically
/// smallest (tau1, tau2) wins.
inline std::size_t arg_extremum(const std::vector<QuasiMomentum>& grid, const std::vector<double>& v, bool max) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const bool better = max ? v[i] > v[best] : v[i] < v[best];
        const bool tie = v[i] == v[best] &&
                         std::tie(grid[i].tau1, grid[i].tau2) < std::tie(grid[best].tau1, grid[best].tau2);
        if (better || tie) best = i;
    }
    return best;
}

/// Compass search on one band: 8 neighbours at the current step, move while
/// improving, halve the step, `levels` times.
inline std::pair<QuasiMomentum, double> pattern_search(const std::function<double(const QuasiMomentum&)>& f,
                                                       QuasiMomentum start, double value, double h1, double h2,
                                                       int levels, const LatticeParams& lat) {
    static constexpr std::array<std::array<int, 2>, 8> dirs{
        {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};
    QuasiMomentum x = start;
    double fx = value;
    for (int level = 0; level < levels; ++level) {
        for (int moves = 0; moves < 64; ++moves) {
            QuasiMomentum best = x;
            double fb = fx;
            for (const auto& d : dirs) {
                QuasiMomentum y{fold_into_zone(x.tau1 + d[0] * h1, lat.a1), fold_into_zone(x.tau2 + d[1] * h2, lat.a2)};
                const double fy = f(y);
                if (fy > fb) {
                    fb = fy;
                    best = y;
                }
            }
            if (!(fb > fx)) break;
            x = best;
            fx = fb;
        }
        if (level + 1 < levels) {
            h1 *= 0.5;
            h2 *= 0.5;
        }
    }
    return {x, fx};
}

} // namespace detail

/// Coarse extrema from the surface; with `refine` (non-null) a pattern search
/// starting two cells wide and halving 6 times, using fresh eigensolves.
inline GapMeasurement detect_gap(const BandSurface& s, const BandPairFn* refine = nullptr,
                                 unsigned workers = 1) {
    GapMeasurement m;
    m.eps = s.eps;
    const std::size_t il = detail::arg_extremum(s.grid, s.lower_band, true);
    const std::size_t ir = detail::arg_extremum(s.grid, s.upper_band, false);
    m.edge_l = m.coarse_edge_l = s.lower_band[il];
    m.edge_r = m.coarse_edge_r = s.upper_band[ir];
    m.argmax_l = s.grid[il];
    m.argmin_r = s.grid[ir];
    if (refine) {
        constexpr int levels = 6;
        const double h1 = 2.0 * s.cell1(), h2 = 2.0 * s.cell2();
        std::array<std::pair<QuasiMomentum, double>, 2> out;
        parallel_for(2, workers, [&](std::size_t which) {
            if (which == 0) {
                auto f = [&](const QuasiMomentum& t) { return (*refine)(t).first; };
                out[0] = detail::pattern_search(f, m.argmax_l, m.edge_l, h1, h2, levels, s.lattice);
            } else {
                auto f = [&](const QuasiMomentum& t) { return -(*refine)(t).second; };
                out[1] = detail::pattern_search(f, m.argmin_r, -m.edge_r, h1, h2, levels, s.lattice);
            }
        });
        m.argmax_l = out[0].first;
        m.edge_l = out[0].second;
        m.argmin_r = out[1].first;
        m.edge_r = -out[1].second;
        m.refinement_radius = {h1 / (1 << (levels - 1)), h2 / (1 << (levels - 1))};
    }
    m.gap_found = m.edge_l < m.edge_r - 1e-10;
    return m;
}

// ---------------------------------------------------------------------------
// Comparison with the prediction

/// A fitted order, or "exact" when the residuals vanish.
struct FittedOrder {
    std::optional<OrderFit> fit; // empty means exact
    bool exact() const { return !fit.has_value(); }
    double slope() const { return fit ? fit->slope : std::numeric_limits<double>::infinity(); }
    std::string describe() const;
};

inline std::string FittedOrder::describe() const {
    if (!fit) return "exact";
    std::ostringstream os;
    os << fit->slope << " (r2 " << fit->r2 << ")";
    return os.str();
}

inline FittedOrder fitted_order(const std::vector<double>& eps, const std::vector<double>& residual) {
    std::vector<ErrorSample> samples;
    bool all_zero = true;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        samples.push_back({eps[i], residual[i]});
        all_zero = all_zero && residual[i] <= 1e-13;
    }
    if (all_zero) return {};
    try {
        return {fit_order(samples)};
    } catch (const DegenerateFit&) {
        return {};
    }
}

struct EdgeComparison {
    std::vector<double> predicted;
    std::vector<double> measured;
    std::vector<double> residual;
    FittedOrder order;
    // location along tau1 for both orientations of the t-axis
    std::array<std::vector<double>, 2> tau1_residual; // [0]: +t, [1]: -t
    std::array<FittedOrder, 2> tau1_order;
    TSign recorded_sign = TSign::plus;
    std::vector<double> tau2_distance; // NaN when the candidate set is indeterminate
    bool tau2_indeterminate = false;

    const std::vector<double>& recorded_tau1_residual() const {
        return tau1_residual[recorded_sign == TSign::plus ? 0 : 1];
    }
    const FittedOrder& recorded_tau1_order() const { return tau1_order[recorded_sign == TSign::plus ? 0 : 1]; }
};

struct ValidationReport {
    std::vector<double> eps;
    double E0 = 0.0, alpha = 0.0;
    WallCorrection wall = WallCorrection::printed;
    EdgeComparison left, right;
    std::vector<double> grid_cell2; // tau2 grid spacing per eps, 0 when unknown

    std::string describe() const;
};

namespace detail {

inline double distance_to_set(double x, const std::vector<double>& set) {
    double d = std::numeric_limits<double>::infinity();
    for (double c : set) d = std::min(d, std::abs(x - c));
    return d;
}

/// Band functions are even under tau -> -tau, so an extremum at tau is also
/// one at -tau; the image closer to the predicted tau1 is used.
inline QuasiMomentum closest_image(const QuasiMomentum& measured, double tau1_pred) {
    const QuasiMomentum mirrored{-measured.tau1, -measured.tau2};
    return std::abs(mirrored.tau1 - tau1_pred) < std::abs(measured.tau1 - tau1_pred) ? mirrored : measured;
}

inline EdgeComparison compare_edge(const std::vector<GapMeasurement>& ms, const GapCoefficients& g, double E0,
                                   double alpha, WallCorrection wall, bool left) {
    EdgeComparison ec;
    std::vector<double> eps;
    for (const auto& m : ms) {
        const double ea = std::pow(m.eps, alpha), eh = std::sqrt(m.eps);
        const double beta = left ? g.beta_l : g.beta_r;
        const double lam = left ? g.lambda_left(wall) : g.lambda_right(wall);
        const double pred = E0 + ea * beta + eh * lam;
        const double meas = left ? m.edge_l : m.edge_r;
        eps.push_back(m.eps);
        ec.predicted.push_back(pred);
        ec.measured.push_back(meas);
        ec.residual.push_back(std::abs(meas - pred));

        const double tau1 = left ? g.tau1_l : g.tau1_r;
        const double t = left ? g.t_l : g.t_r;
        const QuasiMomentum arg = left ? m.argmax_l : m.argmin_r;
        for (int k = 0; k < 2; ++k) {
            const double pred1 = tau1 + (k == 0 ? 1.0 : -1.0) * ea * t;
            const QuasiMomentum img = closest_image(arg, pred1);
            ec.tau1_residual[k].push_back(std::abs(img.tau1 - pred1));
        }
        const EdgeTau2& cand = left ? g.tau2_left(wall) : g.tau2_right(wall);
        ec.tau2_indeterminate = cand.indeterminate;
        if (cand.indeterminate) {
            ec.tau2_distance.push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
            // the candidate sets are symmetric, so either image gives the same distance
            ec.tau2_distance.push_back(distance_to_set(arg.tau2, cand.candidates));
        }
    }
    ec.order = fitted_order(eps, ec.residual);
    for (int k = 0; k < 2; ++k) ec.tau1_order[k] = fitted_order(eps, ec.tau1_residual[k]);
    // the better fit: larger order, then smaller residual at the smallest eps
    const auto key = [&](int k) { return std::pair{ec.tau1_order[k].slope(), -ec.tau1_residual[k].back()}; };
    ec.recorded_sign = key(1) > key(0) ? TSign::minus : TSign::plus;
    return ec;
}

} // namespace detail

/// Residuals of the measured edges and arg-extrema against the prediction.
/// Measurements are used in the given order (decreasing eps expected).
inline ValidationReport compare(const std::vector<GapMeasurement>& measurements, const GapCoefficients& g,
                                double E0, double alpha, WallCorrection wall = WallCorrection::printed) {
    std::vector<GapMeasurement> ms;
    for (const auto& m : measurements)
        if (m.gap_found) ms.push_back(m);
    if (ms.size() < 4) {
        std::ostringstream os;
        os << "comparison needs at least 4 eps values with a gap, got " << ms.size();
        throw InsufficientData(os.str());
    }
    ValidationReport r;
    r.E0 = E0;
    r.alpha = alpha;
    r.wall = wall;
    for (const auto& m : ms) r.eps.push_back(m.eps);
    r.left = detail::compare_edge(ms, g, E0, alpha, wall, true);
    r.right = detail::compare_edge(ms, g, E0, alpha, wall, false);
    return r;
}

inline std::string ValidationReport::describe() const {
    std::ostringstream os;
    os.precision(10);
    os << "E0 = " << E0 << ", alpha = " << alpha << ", wall correction: " << to_string(wall) << "\n";
    auto edge = [&](const char* name, const EdgeComparison& e) {
        os << name << " edge\n";
        os << "  residual order: " << e.order.describe() << " (theory >= " << 2 * alpha << ")\n";
        os << "  tau1 location order (+t): " << e.tau1_order[0].describe() << "\n";
        os << "  tau1 location order (-t): " << e.tau1_order[1].describe() << "\n";
        os << "  recorded t orientation: " << (e.recorded_sign == TSign::plus ? "+t" : "-t") << "\n";
        os << "  tau2 candidate set: " << (e.tau2_indeterminate ? "indeterminate" : "determinate") << "\n";
        for (std::size_t i = 0; i < eps.size(); ++i)
            os << "  eps " << eps[i] << ": measured " << e.measured[i] << ", predicted " << e.predicted[i]
               << ", residual " << e.residual[i] << ", tau2 distance " << e.tau2_distance[i] << "\n";
    };
    edge("left", left);
    edge("right", right);
    return os.str();
}

} // namespace gapopen

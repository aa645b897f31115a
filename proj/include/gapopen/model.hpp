#pragma once

// Physical configuration: lattice, narrow wall profile, perturbation
// coefficient fields and the epsilon schedule, plus the Fourier data the
// Galerkin solvers consume.

#include "gapopen/errors.hpp"
#include "gapopen/numerics.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

namespace gapopen {

struct LatticeParams {
    double a1 = 1.0;
    double a2 = 1.0;

    double zone1() const { return pi / a1; }
    double zone2() const { return pi / a2; }
    double cell_area() const { return a1 * a2; }
};

struct QuasiMomentum {
    double tau1 = 0.0;
    double tau2 = 0.0;

    friend bool operator==(const QuasiMomentum&, const QuasiMomentum&) = default;
};

/// Folds a value into [-pi/a, pi/a]; the right endpoint maps to itself.
inline double fold_into_zone(double tau, double a) {
    const double period = 2.0 * pi / a;
    const double half = pi / a;
    if (tau >= -half && tau <= half) return tau;
    double r = std::fmod(tau + half, period);
    if (r < 0) r += period;
    return r - half;
}

inline QuasiMomentum normalize(const QuasiMomentum& tau, const LatticeParams& lat) {
    return {fold_into_zone(tau.tau1, lat.a1), fold_into_zone(tau.tau2, lat.a2)};
}

// ---------------------------------------------------------------------------
// Wall profile

enum class WallShapeKind { trapezoid, raised_cosine, rectangle, table };

inline std::string to_string(WallShapeKind k) {
    switch (k) {
    case WallShapeKind::trapezoid: return "trapezoid";
    case WallShapeKind::raised_cosine: return "raised_cosine";
    case WallShapeKind::rectangle: return "rectangle";
    case WallShapeKind::table: return "table";
    }
    return "unknown";
}

/// Linear piece of a profile on [x0, x1].
struct WallSegment {
    double x0, x1, v0, v1;
};

/// One-dimensional wall V(xi), supported in [-2 a3, 2 a3].
class WallProfile {
public:
    double a3 = 0.25;
    double c0 = 1.0;

    /// Plateau `height` on [-a3, a3], linear ramps down to zero at +-2 a3.
    static WallProfile trapezoid(double a3, double c0, double height) {
        WallProfile w(a3, c0, WallShapeKind::trapezoid);
        w.height_ = height;
        return w;
    }

    /// peak * (1 + cos(pi xi / (2 a3))) / 2 on [-2 a3, 2 a3].
    static WallProfile raised_cosine(double a3, double c0, double peak) {
        WallProfile w(a3, c0, WallShapeKind::raised_cosine);
        w.height_ = peak;
        return w;
    }

    /// Constant `height` on [-a3, a3], zero elsewhere. Discontinuous, so it
    /// never passes validation; kept for exercising the continuity check.
    static WallProfile rectangle(double a3, double c0, double height) {
        WallProfile w(a3, c0, WallShapeKind::rectangle);
        w.height_ = height;
        return w;
    }

    /// Uniform samples on [-2 a3, 2 a3] (endpoints included), linearly
    /// interpolated.
    static WallProfile table(double a3, double c0, std::vector<double> samples) {
        if (samples.size() < 2) throw WallViolation("table: need at least two samples");
        WallProfile w(a3, c0, WallShapeKind::table);
        w.samples_ = std::move(samples);
        return w;
    }

    WallShapeKind kind() const noexcept { return kind_; }
    double height() const noexcept { return height_; }
    const std::vector<double>& samples() const noexcept { return samples_; }
    double support_half_width() const noexcept { return 2.0 * a3; }

    double operator()(double xi) const {
        const double L = 2.0 * a3;
        const double ax = std::abs(xi);
        switch (kind_) {
        case WallShapeKind::trapezoid:
            if (ax <= a3) return height_;
            if (ax <= L) return height_ * (L - ax) / a3;
            return 0.0;
        case WallShapeKind::raised_cosine:
            if (ax <= L) return 0.5 * height_ * (1.0 + std::cos(pi * xi / L));
            return 0.0;
        case WallShapeKind::rectangle:
            return ax <= a3 ? height_ : 0.0;
        case WallShapeKind::table: {
            if (ax > L) return 0.0;
            const auto n = samples_.size();
            const double h = 2.0 * L / static_cast<double>(n - 1);
            const double s = (xi + L) / h;
            auto i = static_cast<std::size_t>(std::floor(s));
            if (i >= n - 1) return samples_.back();
            const double f = s - static_cast<double>(i);
            return samples_[i] * (1.0 - f) + samples_[i + 1] * f;
        }
        }
        return 0.0;
    }

    /// Exact linear pieces for piecewise-linear shapes; empty for smooth ones.
    std::vector<WallSegment> segments() const {
        const double L = 2.0 * a3;
        switch (kind_) {
        case WallShapeKind::trapezoid:
            return {{-L, -a3, 0.0, height_}, {-a3, a3, height_, height_}, {a3, L, height_, 0.0}};
        case WallShapeKind::rectangle:
            return {{-a3, a3, height_, height_}};
        case WallShapeKind::table: {
            std::vector<WallSegment> out;
            const auto n = samples_.size();
            const double h = 2.0 * L / static_cast<double>(n - 1);
            for (std::size_t i = 0; i + 1 < n; ++i)
                out.push_back({-L + i * h, -L + (i + 1) * h, samples_[i], samples_[i + 1]});
            return out;
        }
        case WallShapeKind::raised_cosine:
            return {};
        }
        return {};
    }

private:
    WallProfile(double a3_, double c0_, WallShapeKind k) : a3(a3_), c0(c0_), kind_(k) {}

    WallShapeKind kind_ = WallShapeKind::trapezoid;
    double height_ = 0.0;
    std::vector<double> samples_;
};

// ---------------------------------------------------------------------------
// Coefficient fields

/// C-infinity bump equal to 1 at `center`, vanishing outside (center-w, center+w).
inline double smooth_bump(double x, double center, double half_width) {
    const double r = (x - center) / half_width;
    if (std::abs(r) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

enum class FieldTermKind { bump_cos, constant, table };

/// One additive term of a coefficient field.
///
/// bump_cos:  amplitude * B(x1; c1, w1) * B(x2; c2, w2)
///            * cos(2 pi (k1 x1 / a1 + k2 x2 / a2) + phase)
/// constant:  amplitude everywhere (only useful for tests; fails the margin check)
/// table:     amplitude * bilinear interpolation of an n2 x n1 periodic grid
///            (row-major, x2 slow), node (i1, i2) at (i1 a1 / n1, i2 a2 / n2)
struct FieldTerm {
    FieldTermKind kind = FieldTermKind::bump_cos;
    double amplitude = 1.0;
    double center1 = 0.5, half_width1 = 0.4;
    double center2 = 0.5, half_width2 = 0.4;
    int k1 = 0, k2 = 0;
    double phase = 0.0;
    int n1 = 0, n2 = 0;
    std::vector<double> grid;
};

class CoefficientField {
public:
    std::vector<FieldTerm> terms;

    bool is_zero() const {
        for (const auto& t : terms)
            if (t.amplitude != 0.0) return false;
        return true;
    }

    /// Value at a point of the plane; the field is extended periodically.
    double operator()(double x1, double x2, const LatticeParams& lat) const {
        if (terms.empty()) return 0.0;
        const double y1 = wrap(x1, lat.a1), y2 = wrap(x2, lat.a2);
        double acc = 0.0;
        for (const auto& t : terms) acc += eval_term(t, y1, y2, lat);
        return acc;
    }

private:
    static double wrap(double x, double a) {
        if (x >= 0.0 && x < a) return x;
        double r = std::fmod(x, a);
        if (r < 0) r += a;
        return r;
    }

    static double eval_term(const FieldTerm& t, double x1, double x2, const LatticeParams& lat) {
        switch (t.kind) {
        case FieldTermKind::constant:
            return t.amplitude;
        case FieldTermKind::bump_cos: {
            const double b = smooth_bump(x1, t.center1, t.half_width1) *
                             smooth_bump(x2, t.center2, t.half_width2);
            if (b == 0.0) return 0.0;
            return t.amplitude * b *
                   std::cos(2.0 * pi * (t.k1 * x1 / lat.a1 + t.k2 * x2 / lat.a2) + t.phase);
        }
        case FieldTermKind::table: {
            const double s1 = x1 / lat.a1 * t.n1, s2 = x2 / lat.a2 * t.n2;
            const int i1 = static_cast<int>(std::floor(s1)) % t.n1;
            const int i2 = static_cast<int>(std::floor(s2)) % t.n2;
            const double f1 = s1 - std::floor(s1), f2 = s2 - std::floor(s2);
            const int j1 = (i1 + 1) % t.n1, j2 = (i2 + 1) % t.n2;
            auto g = [&](int a, int b) { return t.grid[static_cast<std::size_t>(b) * t.n1 + a]; };
            return t.amplitude * ((1 - f1) * (1 - f2) * g(i1, i2) + f1 * (1 - f2) * g(j1, i2) +
                                  (1 - f1) * f2 * g(i1, j2) + f1 * f2 * g(j1, j2));
        }
        }
        return 0.0;
    }
};

enum class FieldId { A11 = 0, A1 = 1, A0 = 2 };

inline std::string to_string(FieldId f) {
    switch (f) {
    case FieldId::A11: return "A11";
    case FieldId::A1: return "A1";
    case FieldId::A0: return "A0";
    }
    return "?";
}

struct CoefficientFields {
    CoefficientField a11, a1, a0;
    double margin = 0.1;

    const CoefficientField& get(FieldId id) const {
        switch (id) {
        case FieldId::A11: return a11;
        case FieldId::A1: return a1;
        case FieldId::A0: return a0;
        }
        return a0;
    }

    bool all_zero() const { return a11.is_zero() && a1.is_zero() && a0.is_zero(); }
};

/// Grid sizes actually used by validate_config.
struct ValidationMetadata {
    int wall_grid = 0;
    int coefficient_grid = 0;
    double max_periodicity_violation = 0.0;
    double max_margin_violation = 0.0;
};

struct OperatorConfig {
    LatticeParams lattice;
    WallProfile wall = WallProfile::trapezoid(0.25, 1.0, 1.0);
    CoefficientFields coeffs;
    double alpha = 0.4;
    std::vector<double> epsilons;
    /// Nodes per period per axis for the coefficient-field quadrature.
    int coefficient_resolution = 4096;
    ValidationMetadata validation;
};

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline constexpr double kSignTolerance = 1e-12;

inline void validate_wall(const WallProfile& w, int grid, ValidationMetadata& meta) {
    if (!(w.a3 > 0.0)) throw WallViolation("a3 must be positive");
    if (!(w.c0 > 0.0)) throw WallViolation("c0 must be positive");
    const double L = 2.0 * w.a3;
    meta.wall_grid = grid;

    // Support: zero beyond +-2 a3 (sampled on (2 a3, 3 a3]).
    for (int i = 1; i <= grid / 4; ++i) {
        const double xi = L + w.a3 * i / (grid / 4);
        if (w(xi) != 0.0 || w(-xi) != 0.0)
            throw WallViolation("support: profile nonzero outside [-2 a3, 2 a3]");
    }

    double max_jump_coarse = 0.0, max_jump_fine = 0.0, scale = 0.0;
    auto sample_jumps = [&](int n, double& max_jump) {
        double prev = w(-L);
        for (int i = 1; i <= n; ++i) {
            const double v = w(-L + 2.0 * L * i / n);
            max_jump = std::max(max_jump, std::abs(v - prev));
            prev = v;
        }
    };

    for (int i = 0; i <= grid; ++i) {
        const double xi = -L + 2.0 * L * i / grid;
        const double v = w(xi);
        scale = std::max(scale, std::abs(v));
        if (!std::isfinite(v)) throw WallViolation("continuity: non-finite sample");
        if (v < -kSignTolerance) {
            std::ostringstream os;
            os << "positivity: V(" << xi << ") = " << v << " < 0";
            throw WallViolation(os.str());
        }
        if (std::abs(xi) <= w.a3 && v < w.c0 - kSignTolerance) {
            std::ostringstream os;
            os << "plateau: V(" << xi << ") = " << v << " < c0 = " << w.c0;
            throw WallViolation(os.str());
        }
    }
    // A continuous profile's largest neighbour difference shrinks as the grid
    // is refined; a jump keeps it fixed.
    sample_jumps(grid, max_jump_coarse);
    sample_jumps(4 * grid, max_jump_fine);
    if (max_jump_fine > 1e-9 * std::max(scale, 1.0) && max_jump_fine > 0.5 * max_jump_coarse) {
        std::ostringstream os;
        os << "continuity: jump of size " << max_jump_fine << " persists under refinement";
        throw WallViolation(os.str());
    }
}

inline void validate_field(const CoefficientField& f, FieldId id, const LatticeParams& lat,
                           double margin, int grid, ValidationMetadata& meta) {
    for (const auto& t : f.terms) {
        if (t.kind == FieldTermKind::table &&
            (t.n1 < 2 || t.n2 < 2 || t.grid.size() != static_cast<std::size_t>(t.n1) * t.n2))
            throw CoefficientViolation(to_string(id) + ": table grid has wrong size");
        if (t.kind == FieldTermKind::bump_cos && (!(t.half_width1 > 0) || !(t.half_width2 > 0)))
            throw CoefficientViolation(to_string(id) + ": bump half-widths must be positive");
    }
    double periodic = 0.0;
    for (int i = 0; i <= grid; ++i) {
        const double s = static_cast<double>(i) / grid;
        periodic = std::max(periodic, std::abs(f(0.0, s * lat.a2, lat) - f(lat.a1, s * lat.a2, lat)));
        periodic = std::max(periodic, std::abs(f(s * lat.a1, 0.0, lat) - f(s * lat.a1, lat.a2, lat)));
    }
    meta.max_periodicity_violation = std::max(meta.max_periodicity_violation, periodic);
    if (periodic > kSignTolerance) {
        std::ostringstream os;
        os << to_string(id) << " periodicity: max edge mismatch " << periodic;
        throw CoefficientViolation(os.str());
    }

    // Boundary strip of width `margin`, sampled on a grid x grid lattice of
    // points spread across the strip plus its exact edges.
    double worst = 0.0;
    const int strip = std::max(8, grid / 16);
    for (int i = 0; i <= grid; ++i) {
        const double s1 = lat.a1 * i / grid, s2 = lat.a2 * i / grid;
        for (int j = 0; j <= strip; ++j) {
            const double d1 = margin * j / strip;
            const double d2 = margin * j / strip;
            worst = std::max({worst, std::abs(f(d1, s2, lat)), std::abs(f(lat.a1 - d1, s2, lat)),
                              std::abs(f(s1, d2, lat)), std::abs(f(s1, lat.a2 - d2, lat))});
        }
    }
    meta.max_margin_violation = std::max(meta.max_margin_violation, worst);
    if (worst > kSignTolerance) {
        std::ostringstream os;
        os << to_string(id) << " margin: max |field| = " << worst << " within " << margin
           << " of the cell boundary";
        throw CoefficientViolation(os.str());
    }
}

} // namespace detail

/// Checks every structural hypothesis on the configuration and returns it with
/// the validation grid sizes recorded.
inline OperatorConfig validate_config(OperatorConfig cfg, int wall_grid = 4096, int field_grid = 1024) {
    if (!(cfg.lattice.a1 > 0.0) || !(cfg.lattice.a2 > 0.0))
        throw LatticeError("periods a1 and a2 must be positive");
    cfg.validation = {};
    detail::validate_wall(cfg.wall, std::max(wall_grid, 1024), cfg.validation);

    if (!(cfg.coeffs.margin > 0.0)) throw CoefficientViolation("margin must be positive");
    if (2.0 * cfg.coeffs.margin >= std::min(cfg.lattice.a1, cfg.lattice.a2))
        throw CoefficientViolation("margin must be smaller than half of each period");
    cfg.validation.coefficient_grid = std::max(field_grid, 1024);
    for (FieldId id : {FieldId::A11, FieldId::A1, FieldId::A0})
        detail::validate_field(cfg.coeffs.get(id), id, cfg.lattice, cfg.coeffs.margin,
                               cfg.validation.coefficient_grid, cfg.validation);

    if (!(cfg.alpha > 1.0 / 3.0 && cfg.alpha < 0.5)) {
        std::ostringstream os;
        os << "alpha = " << cfg.alpha << " is not in (1/3, 1/2)";
        throw AlphaOutOfRange(os.str());
    }
    if (cfg.epsilons.empty()) throw EpsilonScheduleError("epsilon schedule is empty");
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
        const double e = cfg.epsilons[i];
        if (!(e > 0.0 && e < 1.0)) throw EpsilonScheduleError("epsilon values must lie in (0, 1)");
        if (i > 0 && !(e < cfg.epsilons[i - 1]))
            throw EpsilonScheduleError("epsilon schedule must be strictly decreasing");
        if (!(2.0 * cfg.wall.a3 * e < cfg.lattice.a2 / 2.0)) {
            std::ostringstream os;
            os << "eps = " << e << ": 2 a3 eps must be below a2 / 2 (walls overlap)";
            throw EpsilonScheduleError(os.str());
        }
    }
    if (cfg.coefficient_resolution < 16) throw CoefficientViolation("coefficient resolution too small");
    return cfg;
}

// ---------------------------------------------------------------------------
// Wall moments and Fourier data

namespace detail {

/// (sin z - z cos z) / z^2, with its Taylor series near 0.
inline double odd_moment_kernel(double z) {
    if (std::abs(z) < 1e-3) {
        const double z2 = z * z;
        return z / 3.0 - z * z2 / 30.0 + z * z2 * z2 / 840.0;
    }
    return (std::sin(z) - z * std::cos(z)) / (z * z);
}

inline double sinc(double z) {
    if (std::abs(z) < 1e-4) return 1.0 - z * z / 6.0;
    return std::sin(z) / z;
}

/// int_{x0}^{x1} (linear) e^{-i w x} dx, evaluated about the segment centre.
inline cplx linear_segment_transform(const WallSegment& s, double w) {
    const double u = 0.5 * (s.x1 - s.x0);
    const double c = 0.5 * (s.x0 + s.x1);
    const double fc = 0.5 * (s.v0 + s.v1);
    const double slope = u > 0 ? (s.v1 - s.v0) / (2.0 * u) : 0.0;
    const double z = w * u;
    const cplx even = fc * 2.0 * u * sinc(z);
    const cplx odd = cplx(0.0, -2.0) * slope * u * u * odd_moment_kernel(z);
    return std::exp(cplx(0.0, -w * c)) * (even + odd);
}

/// int V(xi) g(xi) over [-2 a3, 2 a3] for smooth profiles, composite
/// 20-point Gauss-Legendre with `panels` panels.
template <class G>
auto smooth_profile_integral(const WallProfile& wall, G&& g, int panels) {
    using boost::math::quadrature::gauss;
    const double L = wall.support_half_width();
    const double h = 2.0 * L / panels;
    using R = std::decay_t<decltype(g(0.0))>;
    R acc{};
    for (int p = 0; p < panels; ++p) {
        const double a = -L + p * h;
        acc += gauss<double, 20>::integrate([&](double x) { return wall(x) * g(x); }, a, a + h);
    }
    return acc;
}

} // namespace detail

struct WallMoments {
    double mass = 0.0;         // int V
    double first_moment = 0.0; // int xi V
};

inline WallMoments wall_moments(const WallProfile& wall) {
    const auto segs = wall.segments();
    if (!segs.empty()) {
        WallMoments m;
        for (const auto& s : segs) {
            const double h = s.x1 - s.x0;
            m.mass += 0.5 * h * (s.v0 + s.v1);
            // exact int of x * (linear) over the segment
            m.first_moment += h * (s.v0 * (2 * s.x0 + s.x1) + s.v1 * (s.x0 + 2 * s.x1)) / 6.0;
        }
        return m;
    }
    return {detail::smooth_profile_integral(wall, [](double) { return 1.0; }, 16),
            detail::smooth_profile_integral(wall, [](double x) { return x; }, 16)};
}

/// Fourier transform of the profile, int V(xi) e^{-i w xi} d xi.
inline cplx wall_transform(const WallProfile& wall, double w) {
    const auto segs = wall.segments();
    if (!segs.empty()) {
        cplx acc = 0.0;
        for (const auto& s : segs) acc += detail::linear_segment_transform(s, w);
        return acc;
    }
    const double L = wall.support_half_width();
    const int panels = 8 + static_cast<int>(std::ceil(std::abs(w) * 2.0 * L / 2.0));
    return detail::smooth_profile_integral(
        wall, [w](double x) { return std::exp(cplx(0.0, -w * x)); }, panels);
}

inline void check_no_overlap(const WallProfile& wall, double eps, double a2) {
    if (!(2.0 * wall.a3 * eps < a2 / 2.0)) {
        std::ostringstream os;
        os << "walls of adjacent periods overlap at eps = " << eps;
        throw OverlapError(os.str());
    }
}

/// k-th Fourier coefficient of the periodised wall V_eps over one period,
/// (1/a2) int_0^a2 V_eps(x2) e^{-2 pi i k x2 / a2} dx2
///   = (eps / a2) int V(xi) e^{-2 pi i k eps xi / a2} d xi.
inline cplx wall_fourier(const WallProfile& wall, double eps, double a2, int k) {
    check_no_overlap(wall, eps, a2);
    return eps / a2 * wall_transform(wall, 2.0 * pi * k * eps / a2);
}

/// Coefficients for k = 0..kmax; negative indices follow by conjugation.
inline std::vector<cplx> wall_fourier_table(const WallProfile& wall, double eps, double a2, int kmax) {
    check_no_overlap(wall, eps, a2);
    std::vector<cplx> out(static_cast<std::size_t>(kmax) + 1);
    for (int k = 0; k <= kmax; ++k) out[k] = eps / a2 * wall_transform(wall, 2.0 * pi * k * eps / a2);
    return out;
}

// ---------------------------------------------------------------------------
// Coefficient-field spectra

/// Fourier coefficients (1/|cell|) int field e^{-2 pi i (j x1/a1 + q x2/a2)}
/// on the box |j| <= J, |q| <= K; zero outside. The box is the smallest one
/// outside of which every computed coefficient is below `tail_tol` * max.
class CoefficientSpectrum {
public:
    CoefficientSpectrum() = default;
    CoefficientSpectrum(int J, int K, std::vector<cplx> data)
        : J_(J), K_(K), data_(std::move(data)) {}

    int max_j() const noexcept { return J_; }
    int max_q() const noexcept { return K_; }
    bool empty() const noexcept { return data_.empty(); }

    cplx operator()(int j, int q) const {
        if (data_.empty() || std::abs(j) > J_ || std::abs(q) > K_) return 0.0;
        return data_[static_cast<std::size_t>(q + K_) * (2 * J_ + 1) + (j + J_)];
    }

    /// Self-estimate recorded at construction (difference between two resolutions).
    double resolution_defect = 0.0;
    int resolution = 0;

private:
    int J_ = 0, K_ = 0;
    std::vector<cplx> data_;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Raw DFT/quadrature coefficients on an n1 x n2 periodic grid. Returns
/// (n1/2+1) x n2 complex values, index [i2 * (n1/2+1) + j].
inline std::vector<cplx> field_dft(const std::vector<double>& samples, int n1, int n2) {
    const int nc = n1 / 2 + 1;
    std::vector<double> in(samples);
    std::vector<cplx> out(static_cast<std::size_t>(nc) * n2);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_2d(n2, n1, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                    FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    const double norm = 1.0 / (static_cast<double>(n1) * n2);
    for (auto& v : out) v *= norm;
    return out;
}

inline cplx dft_lookup(const std::vector<cplx>& dft, int n1, int n2, int j, int q) {
    const int nc = n1 / 2 + 1;
    if (j < 0) return std::conj(dft_lookup(dft, n1, n2, -j, -q));
    const int row = ((q % n2) + n2) % n2;
    return dft[static_cast<std::size_t>(row) * nc + j];
}

} // namespace detail

/// Builds the spectrum of a field by the tensor periodic trapezoid rule at
/// `resolution` nodes per axis (a DFT), and checks it against the same rule at
/// half the resolution.
inline CoefficientSpectrum coefficient_spectrum(const CoefficientField& field, const LatticeParams& lat,
                                                int resolution = 4096, double tol = 1e-10,
                                                double tail_tol = 1e-15) {
    if (field.is_zero()) return CoefficientSpectrum(0, 0, {cplx(0.0)});
    const int n = resolution - resolution % 2;
    std::vector<double> samples(static_cast<std::size_t>(n) * n);
    for (int i2 = 0; i2 < n; ++i2)
        for (int i1 = 0; i1 < n; ++i1)
            samples[static_cast<std::size_t>(i2) * n + i1] =
                field(lat.a1 * i1 / n, lat.a2 * i2 / n, lat);
    const auto fine = detail::field_dft(samples, n, n);

    const int h = n / 2;
    std::vector<double> coarse_samples(static_cast<std::size_t>(h) * h);
    for (int i2 = 0; i2 < h; ++i2)
        for (int i1 = 0; i1 < h; ++i1)
            coarse_samples[static_cast<std::size_t>(i2) * h + i1] =
                samples[static_cast<std::size_t>(2 * i2) * n + 2 * i1];
    const auto coarse = detail::field_dft(coarse_samples, h, h);

    const int lim = n / 2 - 1;
    double peak = 0.0;
    for (int q = -lim; q <= lim; ++q)
        for (int j = 0; j <= lim; ++j) peak = std::max(peak, std::abs(detail::dft_lookup(fine, n, n, j, q)));
    int J = 0, K = 0;
    for (int q = -lim; q <= lim; ++q)
        for (int j = 0; j <= lim; ++j)
            if (std::abs(detail::dft_lookup(fine, n, n, j, q)) > tail_tol * peak) {
                J = std::max(J, j);
                K = std::max(K, std::abs(q));
            }

    double defect = 0.0;
    const int clim = h / 2 - 1;
    for (int q = -std::min(K, clim); q <= std::min(K, clim); ++q)
        for (int j = 0; j <= std::min(J, clim); ++j)
            defect = std::max(defect, std::abs(detail::dft_lookup(fine, n, n, j, q) -
                                               detail::dft_lookup(coarse, h, h, j, q)));
    if (defect > tol * std::max(1.0, peak)) {
        std::ostringstream os;
        os << "coefficient quadrature at " << n << " vs " << h << " nodes differs by " << defect;
        throw ResolutionError(os.str());
    }

    std::vector<cplx> data(static_cast<std::size_t>(2 * J + 1) * (2 * K + 1));
    for (int q = -K; q <= K; ++q)
        for (int j = -J; j <= J; ++j)
            data[static_cast<std::size_t>(q + K) * (2 * J + 1) + (j + J)] =
                detail::dft_lookup(fine, n, n, j, q);
    CoefficientSpectrum s(J, K, std::move(data));
    s.resolution_defect = defect;
    s.resolution = n;
    return s;
}

/// Spectra of the three coefficient fields. Filled once, then read-only and
/// safe to share between threads.
struct CoefficientSpectra {
    std::array<CoefficientSpectrum, 3> fields;

    const CoefficientSpectrum& get(FieldId id) const { return fields[static_cast<int>(id)]; }

    static CoefficientSpectra build(const CoefficientFields& coeffs, const LatticeParams& lat,
                                    int resolution = 4096) {
        CoefficientSpectra s;
        for (FieldId id : {FieldId::A11, FieldId::A1, FieldId::A0})
            s.fields[static_cast<int>(id)] = coefficient_spectrum(coeffs.get(id), lat, resolution);
        return s;
    }
};

inline cplx coeff_fourier(const CoefficientSpectra& spectra, FieldId field, int j, int q) {
    return spectra.get(field)(j, q);
}

} // namespace gapopen

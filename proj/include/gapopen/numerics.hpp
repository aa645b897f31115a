#pragma once

// Dense Hermitian eigensolver, periodic quadrature, scalar minimisation and
// log-log order fitting. Everything here is pure and safe to call from many
// threads at once.

#include "gapopen/errors.hpp"

#include <complex>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace gapopen {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;

/// Dense complex matrix whose Hermitian symmetry is checked on construction:
/// max |H_ij - conj(H_ji)| <= rel_tol * max |H_ij|.
class HermitianMatrix {
public:
    HermitianMatrix() = default;

    explicit HermitianMatrix(CMatrix entries, double rel_tol = 1e-12)
        : m_(std::move(entries)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0)
            throw HermiticityError("matrix must be square and non-empty");
        const double scale = m_.cwiseAbs().maxCoeff();
        const double defect = hermiticity_defect(m_);
        if (defect > rel_tol * std::max(scale, std::numeric_limits<double>::min())) {
            std::ostringstream os;
            os << "max |H - H^*| = " << defect << " exceeds " << rel_tol << " * " << scale;
            throw HermiticityError(os.str());
        }
    }

    static double hermiticity_defect(const CMatrix& m) {
        return (m - m.adjoint()).cwiseAbs().maxCoeff();
    }

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const CMatrix& entries() const noexcept { return m_; }
    cplx operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

    bool is_real() const { return m_.imag().cwiseAbs().maxCoeff() == 0.0; }

private:
    CMatrix m_;
};

struct EigenResult {
    RVector values;                 // ascending
    std::optional<CMatrix> vectors; // orthonormal columns, matching values
};

namespace detail {

// Eigen's tridiagonal QL returns ascending values; ties keep the solver's
// order, which is deterministic for a given input.
template <class Solver>
void check_solver(const Solver& solver) {
    if (solver.info() != Eigen::Success)
        throw ConvergenceFailure("self-adjoint eigensolver did not converge");
}

} // namespace detail

/// Full spectrum of a Hermitian matrix, ascending. Real-valued input is routed
/// through the real symmetric solver.
inline EigenResult eigh(const HermitianMatrix& h, bool want_vectors = false) {
    const int options = want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
    EigenResult out;
    if (h.is_real()) {
        Eigen::SelfAdjointEigenSolver<RMatrix> solver(h.entries().real(), options);
        detail::check_solver(solver);
        out.values = solver.eigenvalues();
        if (want_vectors) out.vectors = solver.eigenvectors().cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.entries(), options);
        detail::check_solver(solver);
        out.values = solver.eigenvalues();
        if (want_vectors) out.vectors = solver.eigenvectors();
    }
    return out;
}

/// Lowest `count` eigenpairs through LAPACK's MRRR driver (?syevr / ?heevr),
/// which skips the unwanted eigenvectors.
inline EigenResult eigh_lowest(const HermitianMatrix& h, int count) {
    const lapack_int n = static_cast<lapack_int>(h.dim());
    const lapack_int k = std::clamp<lapack_int>(count, 1, n);
    EigenResult out;
    RVector w(n);
    lapack_int found = 0;
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
    lapack_int info = 0;
    if (h.is_real()) {
        RMatrix a = h.entries().real();
        RMatrix z(n, k);
        info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n, 0.0, 0.0, 1, k, 0.0, &found,
                              w.data(), z.data(), n, support.data());
        out.vectors = z.cast<cplx>();
    } else {
        CMatrix a = h.entries();
        CMatrix z(n, k);
        info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, reinterpret_cast<lapack_complex_double*>(a.data()),
                              n, 0.0, 0.0, 1, k, 0.0, &found, w.data(),
                              reinterpret_cast<lapack_complex_double*>(z.data()), n, support.data());
        out.vectors = std::move(z);
    }
    if (info != 0 || found != k) throw ConvergenceFailure("partial Hermitian eigensolver failed (info " +
                                                          std::to_string(info) + ")");
    out.values = w.head(k);
    return out;
}

/// Real symmetric overload used by the 1D wall solver.
inline std::pair<RVector, RMatrix> eigh_real(const RMatrix& h) {
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(h, Eigen::ComputeEigenvectors);
    detail::check_solver(solver);
    return {solver.eigenvalues(), solver.eigenvectors()};
}

struct Rect {
    double x0 = 0.0, x1 = 1.0; // first axis
    double y0 = 0.0, y1 = 1.0; // second axis
};

/// Periodic trapezoid rule on [lo, hi) with n nodes. Spectrally accurate for
/// smooth periodic integrands.
template <class F>
auto quad_periodic(F&& f, double lo, double hi, int n) {
    using R = std::decay_t<decltype(f(lo))>;
    if (n < 2) throw std::invalid_argument("quad_periodic needs at least 2 nodes");
    const double h = (hi - lo) / n;
    R acc{};
    for (int i = 0; i < n; ++i) acc += f(lo + i * h);
    return acc * h;
}

/// Tensor-product periodic trapezoid rule over a rectangle.
template <class F>
auto quad_periodic(F&& f, const Rect& cell, int n1, int n2) {
    using R = std::decay_t<decltype(f(cell.x0, cell.y0))>;
    if (n1 < 2 || n2 < 2) throw std::invalid_argument("quad_periodic needs at least 2 nodes per axis");
    const double h1 = (cell.x1 - cell.x0) / n1;
    const double h2 = (cell.y1 - cell.y0) / n2;
    R acc{};
    for (int j = 0; j < n2; ++j) {
        const double y = cell.y0 + j * h2;
        R row{};
        for (int i = 0; i < n1; ++i) row += f(cell.x0 + i * h1, y);
        acc += row;
    }
    return acc * (h1 * h2);
}

struct MinimizeResult {
    double t_star;
    double f_star;
};

/// Minimises f on [lo, hi]: a 64-point scan picks the best cell, then Brent's
/// method refines inside the neighbouring cells.
template <class F>
MinimizeResult minimize_scalar(F&& f, double lo, double hi, double tol = 1e-10) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw BracketError("bracket must satisfy lo < hi and be finite");
    constexpr int scan_points = 64;
    const double step = (hi - lo) / (scan_points - 1);
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < scan_points; ++i) {
        const double v = f(lo + i * step);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    const double a = lo + std::max(best - 1, 0) * step;
    const double b = lo + std::min(best + 1, scan_points - 1) * step;

    // Brent's bits parameter controls the relative precision of the abscissa.
    const double width = std::max(std::abs(a), std::abs(b));
    int bits = std::numeric_limits<double>::digits / 2;
    if (width > 0.0 && tol > 0.0)
        bits = std::clamp(static_cast<int>(std::ceil(-std::log2(tol / width))) + 1, 8,
                          std::numeric_limits<double>::digits - 1);
    std::uintmax_t max_iter = 500;
    auto [t, v] = boost::math::tools::brent_find_minima(f, a, b, bits, max_iter);
    if (!(v <= best_val)) return {lo + best * step, best_val};
    return {t, v};
}

struct OrderFit {
    double slope;
    double r2;
};

struct ErrorSample {
    double eps;
    double err;
};

/// Least-squares slope of log(err) against log(eps) after discarding the
/// `drop_head` largest-eps samples. Throws DegenerateFit when an error is
/// exactly zero (the caller interprets that as infinite order).
inline OrderFit fit_order(std::span<const ErrorSample> samples, int drop_head = 0) {
    std::vector<ErrorSample> s(samples.begin(), samples.end());
    std::stable_sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.eps > b.eps; });
    if (drop_head > 0) s.erase(s.begin(), s.begin() + std::min<std::size_t>(drop_head, s.size()));
    if (s.size() < 3) throw InsufficientData("fit_order needs at least 3 samples after dropping");
    for (const auto& p : s) {
        if (!(p.eps > 0.0)) throw std::invalid_argument("fit_order: eps must be positive");
        if (!(p.err > 0.0)) throw DegenerateFit("non-positive error sample (exact agreement)");
    }
    const double n = static_cast<double>(s.size());
    double mx = 0, my = 0;
    for (const auto& p : s) {
        mx += std::log(p.eps);
        my += std::log(p.err);
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& p : s) {
        const double dx = std::log(p.eps) - mx, dy = std::log(p.err) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw DegenerateFit("all eps values coincide");
    const double slope = sxy / sxx;
    const double r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return {slope, r2};
}

} // namespace gapopen

#pragma once

// Fiber operator H_eps(tau) = -Laplace + eps^alpha L + eps^{-3/2} V_eps on the
// periodicity cell with quasiperiodic conditions.
//
// Two Galerkin discretisations share one plane-wave basis
// e^{i (tau1 + 2 pi n / a1) x1} e^{i (tau2 + 2 pi q / a2) x2}:
//  - PlaneWaveSolver uses it directly, |n| <= N, |q| <= Q;
//  - ModeSolver restricts it to products of x1 plane waves with the lowest
//    eigenmodes of the 1D wall operator (a Rayleigh-Ritz subspace of the same
//    matrix), which keeps the dimension small when eps is small.

#include "gapopen/bloch1d.hpp"
#include "gapopen/model.hpp"
#include "gapopen/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

namespace gapopen {

struct EnergyWindow {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

struct BandSample {
    QuasiMomentum tau;
    double eps = 0.0;
    int N = 0, Q = 0;
    EnergyWindow window;
    std::vector<int> indices; // global (0-based) band indices
    std::vector<double> values;
};

/// L-term entry between plane waves (n', q') <- (n, q); p_n = tau1 + 2 pi n / a1.
/// Obtained from <phi', L phi> with L = d1 A11 d1 + i (A1 d1 + d1 A1) + A0
/// after one integration by parts.
inline cplx perturbation_entry(const CoefficientSpectra& spec, int dn, int dq, double p_row, double p_col) {
    return -p_row * p_col * spec.get(FieldId::A11)(dn, dq) -
           (p_row + p_col) * spec.get(FieldId::A1)(dn, dq) + spec.get(FieldId::A0)(dn, dq);
}

/// Dense plane-wave matrix; basis index (n + N) (2Q + 1) + (q + Q).
inline HermitianMatrix assemble_H(const OperatorConfig& cfg, const CoefficientSpectra& spec,
                                  const QuasiMomentum& tau, double eps, int N, int Q) {
    const auto& lat = cfg.lattice;
    const int nq = 2 * Q + 1;
    const int dim = (2 * N + 1) * nq;
    const auto vhat = wall_fourier_table(cfg.wall, eps, lat.a2, 2 * Q);
    const double wall_scale = std::pow(eps, -1.5);
    const double pert_scale = std::pow(eps, cfg.alpha);
    const bool has_pert = !cfg.coeffs.all_zero();
    CMatrix h = CMatrix::Zero(dim, dim);
    for (int nr = -N; nr <= N; ++nr) {
        const double pr = tau.tau1 + 2.0 * pi * nr / lat.a1;
        for (int qr = -Q; qr <= Q; ++qr) {
            const int r = (nr + N) * nq + (qr + Q);
            const double kq = tau.tau2 + 2.0 * pi * qr / lat.a2;
            h(r, r) += pr * pr + kq * kq;
            for (int qc = -Q; qc <= Q; ++qc) {
                const int k = qr - qc;
                const cplx v = k >= 0 ? vhat[k] : std::conj(vhat[-k]);
                h(r, (nr + N) * nq + (qc + Q)) += wall_scale * v;
            }
            if (!has_pert) continue;
            for (int nc = -N; nc <= N; ++nc) {
                const double pc = tau.tau1 + 2.0 * pi * nc / lat.a1;
                for (int qc = -Q; qc <= Q; ++qc) {
                    const cplx e = perturbation_entry(spec, nr - nc, qr - qc, pr, pc);
                    if (e != 0.0) h(r, (nc + N) * nq + (qc + Q)) += pert_scale * e;
                }
            }
        }
    }
    return HermitianMatrix(std::move(h), 1e-11);
}

/// Lowest `count` Dirichlet-strip levels at tau1 with their (n, p) labels,
/// ascending, ties in (n, p) lexicographic order.
struct StripLevel {
    int n;
    int p;
    double E;
};

inline std::vector<StripLevel> reference_bands(const LatticeParams& lat, double tau1, int count) {
    if (count < 1) throw std::invalid_argument("count must be positive");
    // every level below the count-th has |tau1 + 2 pi n / a1| and pi p / a2
    // bounded by the sqrt of that level; grow the box until stable.
    std::vector<StripLevel> out;
    for (int box = 4;; box *= 2) {
        out.clear();
        for (int n = -box; n <= box; ++n)
            for (int p = 1; p <= box; ++p) out.push_back({n, p, strip_energy(lat, n, p, tau1)});
        std::sort(out.begin(), out.end(), [](const StripLevel& a, const StripLevel& b) {
            return std::tie(a.E, a.n, a.p) < std::tie(b.E, b.n, b.p);
        });
        if (static_cast<int>(out.size()) < count) continue;
        const double top = out[count - 1].E;
        const double reach_n = 2.0 * pi * (box - 1) / lat.a1 - std::abs(tau1);
        const double reach_p = pi * box / lat.a2;
        if (reach_n * reach_n > top && reach_p * reach_p > top) break;
    }
    out.resize(count);
    return out;
}

// ---------------------------------------------------------------------------

/// Common interface of the 2D discretisations: full ascending spectrum at tau.
class Bloch2DSolver {
public:
    virtual ~Bloch2DSolver() = default;
    virtual RVector spectrum(const QuasiMomentum& tau) const = 0;
    virtual double eps() const = 0;
    virtual int cutoff_n() const = 0;
    virtual int cutoff_q() const = 0;

    BandSample bands(const QuasiMomentum& tau, const EnergyWindow& window) const {
        if (!(window.lo < window.hi)) throw std::invalid_argument("empty energy window");
        const RVector all = spectrum(tau);
        BandSample s{tau, eps(), cutoff_n(), cutoff_q(), window, {}, {}};
        for (Eigen::Index k = 0; k < all.size(); ++k)
            if (all(k) >= window.lo && all(k) <= window.hi) {
                s.indices.push_back(static_cast<int>(k));
                s.values.push_back(all(k));
            }
        return s;
    }
};

class PlaneWaveSolver final : public Bloch2DSolver {
public:
    PlaneWaveSolver(const OperatorConfig& cfg, std::shared_ptr<const CoefficientSpectra> spec, double eps,
                    int N, int Q)
        : cfg_(cfg), spec_(std::move(spec)), eps_(eps), N_(N), Q_(Q) {}

    HermitianMatrix matrix(const QuasiMomentum& tau) const { return assemble_H(cfg_, *spec_, tau, eps_, N_, Q_); }
    RVector spectrum(const QuasiMomentum& tau) const override { return eigh(matrix(tau)).values; }
    double eps() const override { return eps_; }
    int cutoff_n() const override { return N_; }
    int cutoff_q() const override { return Q_; }

private:
    OperatorConfig cfg_;
    std::shared_ptr<const CoefficientSpectra> spec_;
    double eps_;
    int N_, Q_;
};

/// Reduced Galerkin solver on span{ e^{i p_n x1} Phi_p(x2; tau2) }, |n| <= N,
/// p = 1..P, with Phi_p the 1D wall modes at cutoff Q. With zero coefficient
/// fields it reproduces the separable spectrum exactly.
class ModeSolver final : public Bloch2DSolver {
public:
    /// `energy_cutoff` fixes N and P: every product state with energy below it
    /// at tau = 0 is kept.
    ModeSolver(const OperatorConfig& cfg, std::shared_ptr<const CoefficientSpectra> spec, double eps, int Q,
               double energy_cutoff)
        : cfg_(cfg), spec_(std::move(spec)), eps_(eps), Q_(Q) {
        const int dim = 2 * Q_ + 1;
        for (int count = 8;; count = std::min(2 * count, dim)) {
            const auto m0 = wall_modes(cfg_, 0.0, eps_, Q_, count);
            P_ = 1;
            while (P_ < m0.values.size() && m0.values(P_) <= energy_cutoff) ++P_;
            if (P_ < count || count == dim) break;
        }
        N_ = static_cast<int>(std::ceil(std::sqrt(energy_cutoff) * cfg_.lattice.a1 / (2.0 * pi))) + 1;
    }

    /// Explicit truncation: |n| <= N and the lowest P wall modes.
    ModeSolver(const OperatorConfig& cfg, std::shared_ptr<const CoefficientSpectra> spec, double eps, int Q, int N,
               int P)
        : cfg_(cfg), spec_(std::move(spec)), eps_(eps), Q_(Q), N_(N), P_(std::clamp(P, 1, 2 * Q + 1)) {}

    int modes() const noexcept { return static_cast<int>(P_); }
    double eps() const override { return eps_; }
    int cutoff_n() const override { return N_; }
    int cutoff_q() const override { return Q_; }

    RVector spectrum(const QuasiMomentum& tau) const override {
        return eigh(HermitianMatrix(matrix(tau), 1e-11)).values;
    }

    CMatrix matrix(const QuasiMomentum& tau) const {
        const auto blocks = projected(tau.tau2);
        const auto& lat = cfg_.lattice;
        const int P = P_;
        const int dim = (2 * N_ + 1) * P;
        const double pert_scale = std::pow(eps_, cfg_.alpha);
        CMatrix h = CMatrix::Zero(dim, dim);
        for (int nr = -N_; nr <= N_; ++nr) {
            const double pr = tau.tau1 + 2.0 * pi * nr / lat.a1;
            for (int p = 0; p < P; ++p) h((nr + N_) * P + p, (nr + N_) * P + p) = pr * pr + blocks->values(p);
            if (blocks->empty) continue;
            for (int nc = -N_; nc <= N_; ++nc) {
                const int dn = nr - nc;
                if (std::abs(dn) > blocks->max_dn) continue;
                const double pc = tau.tau1 + 2.0 * pi * nc / lat.a1;
                const int slot = dn + blocks->max_dn;
                CMatrix blk = blocks->g0[slot];
                if (blocks->has11) blk -= (pr * pc) * blocks->g11[slot];
                if (blocks->has1) blk -= (pr + pc) * blocks->g1[slot];
                h.block((nr + N_) * P, (nc + N_) * P, P, P) += pert_scale * blk;
            }
        }
        return h;
    }

private:
    struct Projected {
        RVector values;
        bool empty = true;
        bool has11 = false, has1 = false;
        int max_dn = 0;
        std::vector<CMatrix> g11, g1, g0; // index dn + max_dn
    };

    /// Phi^* T_dn Phi for each field, with T_dn[q', q] = Ahat(dn, q' - q).
    std::shared_ptr<const Projected> projected(double tau2) const {
        if (tau2 == 0.0) tau2 = 0.0; // one key for -0.0 and +0.0
        const std::uint64_t key = bits(tau2);
        std::shared_ptr<const Projected> mirror;
        {
            std::lock_guard lock(mutex_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
            if (auto it = cache_.find(bits(-tau2)); it != cache_.end()) mirror = it->second;
        }
        if (mirror) {
            // real fields: the blocks at -tau2 are the entrywise conjugates of
            // the blocks at tau2 with dn reversed
            auto out = std::make_shared<Projected>(*mirror);
            for (auto* g : {&out->g11, &out->g1, &out->g0}) {
                std::reverse(g->begin(), g->end());
                for (auto& m : *g) m = m.conjugate().eval();
            }
            std::lock_guard lock(mutex_);
            return cache_.emplace(key, std::move(out)).first->second;
        }
        auto out = std::make_shared<Projected>();
        const auto modes = wall_modes(cfg_, tau2, eps_, Q_, P_);
        out->values = modes.values;
        const int max_dn = 2 * N_;
        out->max_dn = max_dn;
        out->empty = cfg_.coeffs.all_zero();
        out->has11 = !cfg_.coeffs.a11.is_zero();
        out->has1 = !cfg_.coeffs.a1.is_zero();
        if (!out->empty) {
            const CMatrix& phi = modes.vectors;
            auto project = [&](FieldId id, std::vector<CMatrix>& dst) {
                dst.assign(2 * max_dn + 1, CMatrix::Zero(P_, P_));
                const auto& s = spec_->get(id);
                if (s.empty()) return;
                const int nq = 2 * Q_ + 1;
                for (int dn = -std::min(max_dn, s.max_j()); dn <= std::min(max_dn, s.max_j()); ++dn) {
                    CMatrix tphi = CMatrix::Zero(nq, P_);
                    const int K = std::min(s.max_q(), 2 * Q_);
                    for (int dq = -K; dq <= K; ++dq) {
                        const cplx a = s(dn, dq);
                        if (a == 0.0) continue;
                        // rows q' = q + dq
                        const int r0 = std::max(0, dq), c0 = std::max(0, -dq);
                        const int len = nq - std::abs(dq);
                        tphi.middleRows(r0, len).noalias() += a * phi.middleRows(c0, len);
                    }
                    dst[dn + max_dn].noalias() = phi.adjoint() * tphi;
                }
            };
            project(FieldId::A0, out->g0);
            if (out->has11) project(FieldId::A11, out->g11);
            if (out->has1) project(FieldId::A1, out->g1);
        }
        std::lock_guard lock(mutex_);
        auto [it, inserted] = cache_.emplace(key, std::move(out));
        return it->second;
    }

    static std::uint64_t bits(double x) {
        std::uint64_t b;
        std::memcpy(&b, &x, sizeof b);
        return b;
    }

    OperatorConfig cfg_;
    std::shared_ptr<const CoefficientSpectra> spec_;
    double eps_;
    int Q_;
    int N_ = 0;
    Eigen::Index P_ = 1;
    mutable std::mutex mutex_;
    mutable std::map<std::uint64_t, std::shared_ptr<const Projected>> cache_;
};

} // namespace gapopen

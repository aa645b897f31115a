#pragma once

// End-to-end runs shared by the command-line tool and the acceptance checks.

#include "gapopen/bloch1d.hpp"
#include "gapopen/bloch2d.hpp"
#include "gapopen/config_io.hpp"
#include "gapopen/crossings.hpp"
#include "gapopen/gapscan.hpp"
#include "gapopen/predictor.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gapopen {

inline Crossing select_crossing(const RunConfig& rc) {
    const auto all = enumerate_crossings(rc.op.lattice, rc.n_max);
    if (rc.crossing_index < 0 || rc.crossing_index >= static_cast<int>(all.size())) {
        std::ostringstream os;
        os << "crossing index " << rc.crossing_index << " out of range: " << all.size() << " crossings with |n|, |m| <= "
           << rc.n_max;
        throw NoAdmissibleRoot(os.str());
    }
    return all[rc.crossing_index];
}

inline int wall_cutoff(const RunConfig& rc, double eps) {
    return rc.cutoff_Q > 0 ? rc.cutoff_Q : default_wall_cutoff(rc.op, eps);
}

inline double mode_cutoff(const RunConfig& rc, double E0) {
    return rc.mode_energy_cutoff > 0.0 ? rc.mode_energy_cutoff : 4.0 * E0;
}

/// Largest Q keeping the plane-wave dimension within `max_dim`.
inline int plane_wave_q_cap(int N, int max_dim = 8000) { return (max_dim / (2 * N + 1) - 1) / 2; }

struct GapScanEpsResult {
    double eps = 0.0;
    int Q = 0;
    int modes = 0;
    std::optional<BandSurface> surface;
    std::optional<GapMeasurement> measurement;
    std::string error; // empty on success
};

struct GapScanRun {
    Crossing crossing;
    GapCoefficients coefficients;
    double C2 = 0.0;
    std::vector<GapScanEpsResult> per_eps;
    std::optional<ValidationReport> report;            // printed wall correction
    std::optional<ValidationReport> report_strip;      // strip-consistent variant
    std::string report_error;
};

/// Scan, detect and compare for every eps of the schedule. Identification
/// failures are recorded per eps; the comparison needs four gaps.
inline GapScanRun run_gapscan(const RunConfig& rc, unsigned workers, bool refine = true) {
    GapScanRun run;
    run.crossing = select_crossing(rc);
    run.coefficients = gap_coefficients(rc.op, run.crossing, rc.predictor_nodes);
    run.C2 = rc.window_C2 ? *rc.window_C2 : default_window_c2(run.coefficients);
    auto spectra = std::make_shared<const CoefficientSpectra>(
        CoefficientSpectra::build(rc.op.coeffs, rc.op.lattice, rc.op.coefficient_resolution));
    std::vector<GapMeasurement> found;
    for (double eps : rc.op.epsilons) {
        GapScanEpsResult r;
        r.eps = eps;
        r.Q = wall_cutoff(rc, eps);
        try {
            ModeSolver solver(rc.op, spectra, eps, r.Q, mode_cutoff(rc, run.crossing.E0));
            r.modes = solver.modes();
            r.surface = scan(solver, rc.op.lattice, run.crossing, run.C2, rc.op.alpha, rc.grid_G1, rc.grid_G2, workers);
            const BandPairFn pair = band_pair(solver, r.surface->k_lower);
            r.measurement = detect_gap(*r.surface, refine ? &pair : nullptr, workers);
            found.push_back(*r.measurement);
        } catch (const NumericalError& e) {
            r.error = e.what();
        }
        run.per_eps.push_back(std::move(r));
    }
    try {
        run.report = compare(found, run.coefficients, run.crossing.E0, rc.op.alpha, WallCorrection::printed);
        run.report_strip = compare(found, run.coefficients, run.crossing.E0, rc.op.alpha, WallCorrection::strip_consistent);
    } catch (const InsufficientData& e) {
        run.report_error = e.what();
    }
    return run;
}

} // namespace gapopen

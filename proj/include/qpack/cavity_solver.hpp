#pragma once

#include <string>
#include <vector>

#include "qpack/field_grid.hpp"
#include "qpack/geometry.hpp"
#include "qpack/materials.hpp"

namespace qpack {

struct SolverConfig {
    double grid_spacing = 0.0;   // m
    int num_modes = 8;
    double shift_hz = 0.0;       // spectral target; 0 targets the bottom of the spectrum
    int max_iterations = 400;
    double tolerance = 1e-8;     // relative eigenvalue residual, in (0, 1e-2]

    void validate() const;
};

/// Eigenmodes of the thin cavity, ascending in frequency. Modes whose
/// frequencies coincide within 10x the solver tolerance are reported as one
/// degenerate group; ordering inside a group is a deterministic tie-break on
/// field moments.
struct ModeSpectrum {
    std::vector<ModeSolution> modes;
    std::vector<int> degenerate_group;  // group index per mode
    CavityGeometry geometry;
    SolverConfig config;
    double effective_permittivity = 1.0;
    double model_ceiling_hz = 0.0;  // 2-D reduction valid below this
    int iterations = 0;
};

/// Solve the TM-mode Helmholtz eigenproblem -lap(psi) = mu * psi with psi = 0
/// on the outer wall and on every pillar, on a uniform grid with cut-cell
/// boundary distances. psi is the out-of-plane electric field E_z; the wafer
/// enters through a uniform effective permittivity, giving
/// f = c * sqrt(mu) / (2*pi*sqrt(eps_eff)). Every returned mode is normalized
/// to hold 1 J. Pure function; concurrent solves are safe.
///
/// `seams` are resolved against the generated boundary surfaces and embedded
/// in each mode's FieldGrid.
ModeSpectrum solve_modes(const CavityGeometry& geometry, const MaterialTable& materials,
                         const SolverConfig& config, const std::vector<SeamSpec>& seams = {});

struct FrequencyBand {
    double low_hz = 0.0;
    double high_hz = 0.0;
    std::string label;
};

struct ModeReportRow {
    int index = 0;
    std::string label;
    double frequency_hz = 0.0;
    int group = 0;
    std::string band_hit;  // empty when clear
};

struct ModeReport {
    std::vector<ModeReportRow> rows;
    int collisions = 0;
    double fundamental_hz = 0.0;
    /// Fundamental minus the top of the highest declared band (negative when
    /// the fundamental sits inside or below the bands). 0 when no bands.
    double clearance_hz = 0.0;
    double model_ceiling_hz = 0.0;
};

/// Flag spectrum modes that fall inside declared frequency bands.
/// Bands must be non-overlapping with low < high; the spectrum must be
/// non-empty.
ModeReport mode_report(const ModeSpectrum& spectrum, const std::vector<FrequencyBand>& bands);

/// Write a normalized mode to the FieldGrid interchange format. Errors when
/// the mode is not normalized (stored energy unset or inconsistent with the
/// field content).
void export_mode_field(const ModeSolution& mode, const std::string& path);

}  // namespace qpack

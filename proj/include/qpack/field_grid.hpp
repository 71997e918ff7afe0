#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qpack {

using Complex = std::complex<double>;
using Vec3c = std::array<Complex, 3>;

inline double norm_sq(const Vec3c& v) {
    return std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]);
}

/// Material region of a grid. `relative_permittivity` may be NaN when the
/// authoring tool did not embed it; consumers then resolve it by material
/// name against a MaterialTable.
struct GridRegion {
    std::string name;
    double relative_permittivity = 1.0;
};

/// One conducting-surface sample attached to a cell: outward unit normal and
/// the physical surface area represented by the sample.
struct BoundaryCell {
    std::int64_t cell = 0;  // row index into the cell arrays
    std::array<double, 3> normal{0, 0, 0};
    double area = 0.0;   // m^2
    std::uint32_t surface = 0;  // index into surface_names
};

/// Ordered polyline of boundary samples across which screening currents flow.
struct SeamPath {
    std::string name;
    bool closed = false;
    std::vector<std::int64_t> entries;  // indices into `boundary`
};

/// Discretized field samples on a structured lattice. Cells are stored as a
/// compact active list (embedded geometries leave lattice holes), each cell
/// carrying its lattice coordinates, material region, integration measure
/// (m^3), and complex E/H samples. A 2-D grid represents a through-thickness
/// slab: measures and boundary areas already include the slab height, so all
/// quadratures are volumetric regardless of dimensionality.
///
/// Immutable by convention after construction; all analysis routines take
/// const references and return fresh values.
struct FieldGrid {
    int dimensionality = 2;                 // 2 or 3
    std::array<std::int64_t, 3> shape{0, 0, 1};
    std::array<double, 3> spacing{0, 0, 0};  // m; for 2-D, spacing[2] is the slab height
    std::array<double, 3> origin{0, 0, 0};   // position of lattice cell (0,0,0) center

    std::vector<std::array<std::int32_t, 3>> coords;  // lattice coordinates per cell
    std::vector<std::uint32_t> region;                // per cell
    std::vector<double> measure;                      // m^3 per cell
    std::vector<Vec3c> e_field;                       // V/m
    std::vector<Vec3c> h_field;                       // A/m

    std::vector<GridRegion> regions;
    std::vector<std::string> surface_names;
    std::vector<BoundaryCell> boundary;
    std::vector<SeamPath> seams;

    double mode_frequency_hz = 0.0;  // optional metadata, 0 = unset

    std::size_t cell_count() const { return region.size(); }

    std::array<double, 3> cell_position(std::size_t cell) const {
        return {origin[0] + coords[cell][0] * spacing[0],
                origin[1] + coords[cell][1] * spacing[1],
                dimensionality == 3 ? origin[2] + coords[cell][2] * spacing[2] : origin[2]};
    }

    /// Index of the named region, or -1.
    int region_index(const std::string& name) const;
    /// Index of the named surface label, or -1.
    int surface_index(const std::string& name) const;
    /// Seam by name, or nullptr.
    const SeamPath* find_seam(const std::string& name) const;

    /// Enforces the structural invariants (matching array lengths, positive
    /// measures, unit normals within 1e-9, in-range indices).
    void validate() const;
};

/// Total electromagnetic energy  sum (eps0*eps_r*|E|^2 + mu0*|H|^2)/2 * dV.
/// Region permittivities must be embedded in the grid.
double total_energy(const FieldGrid& grid);

/// Uniformly rescale E and H so total_energy == target. Throws on zero field.
void scale_to_energy(FieldGrid& grid, double target_joules);

/// One eigenmode: frequency, normalized field, stored energy, display label.
struct ModeSolution {
    double frequency_hz = 0.0;
    FieldGrid field;
    double stored_energy_j = 0.0;
    std::string label;
};

/// normalize_energy returns a copy holding exactly `target` joules; frequency
/// and labels are untouched. Idempotent. Throws on zero field.
ModeSolution normalize_energy(const ModeSolution& mode, double target_joules);

// ---------------------------------------------------------------------------
// Interchange format: line-oriented text, documented in README. Numbers are
// written with round-trip-exact precision, so save -> load reproduces the
// grid bit for bit.
// ---------------------------------------------------------------------------

void write_field_grid(const FieldGrid& grid, std::ostream& out);
FieldGrid read_field_grid(std::istream& in, const std::string& origin);

void save_field_grid(const FieldGrid& grid, const std::string& path);
FieldGrid load_field_grid(const std::string& path);

}  // namespace qpack

#pragma once

#include <string>
#include <vector>

namespace qpack {

struct Point2 {
    double x = 0.0;  // m
    double y = 0.0;  // m
};

struct Pillar {
    Point2 center;
    double radius = 0.0;  // m
};

/// Thin cylindrical package cavity: disc of `radius`, plate separation
/// `height`, optional array of shorting pillars, optional dielectric wafer
/// partially filling the gap.
struct CavityGeometry {
    double radius = 0.0;            // m
    double height = 0.0;            // m, plate separation
    std::vector<Pillar> pillars;    // galvanic shorts between the plates
    double wafer_thickness = 0.0;   // m, 0 = empty cavity
    double wafer_permittivity = 1.0;

    /// Throws Error when any invariant fails: positive dimensions, pillars
    /// strictly inside the disc, pairwise disjoint pillars, wafer thinner
    /// than the gap.
    void validate() const;

    /// Uniform effective permittivity of the wafer-loaded gap
    /// (series-capacitor rule for an out-of-plane E field):
    ///   eps_eff = height / ((height - t) + t / eps_r)
    double effective_permittivity() const;

    /// The 2-D reduction holds for modes without vertical variation, i.e.
    /// below c / (2 * height).
    double model_ceiling_hz() const;
};

/// Regular triangular lattice of candidate pillar sites, pitch apart,
/// centered on the cavity axis. Sites are indexed row-major (ascending y,
/// then x); indices listed in `skip` are left unpopulated.
struct PillarLatticeSpec {
    double pitch = 0.0;          // m
    double pillar_radius = 0.0;  // m
    double margin = 0.0;         // m, clearance kept to the outer wall
    std::vector<int> skip;
};

std::vector<Pillar> build_pillar_lattice(double cavity_radius, const PillarLatticeSpec& spec);

/// Seam declared on the geometry: a named current-carrying joint resolved
/// against exported boundary-surface labels ("sidewall", "pillar_3", or the
/// prefix form "pillar_*" for every pillar weld at once).
struct SeamSpec {
    std::string name;
    std::string surface_selector;
};

struct GeometryFile {
    CavityGeometry geometry;
    std::vector<SeamSpec> seams;
};

/// Parse the cavity geometry text format:
///
///     radius = 47.3 mm
///     height = 4 mm
///     wafer_thickness = 430 um
///     wafer_permittivity = 10
///     pillar = 0mm 13mm 1.7mm           # x y radius
///     pillar_lattice = pitch=13mm radius=1.7mm margin=4mm skip=3,7
///     seam = lid_joint surface=sidewall
///
/// Units are mandatory on lengths. Validates the resulting geometry.
GeometryFile load_geometry(const std::string& path);
GeometryFile parse_geometry(const std::string& text, const std::string& origin);

/// Parse "<number><unit>" or "<number> <unit>" into meters.
double parse_length(const std::string& value, const std::string& context);

}  // namespace qpack

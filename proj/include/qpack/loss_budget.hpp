#pragma once

#include <string>
#include <vector>

#include "qpack/field_grid.hpp"
#include "qpack/materials.hpp"

namespace qpack {

enum class ChannelKind { bulk_dielectric, surface_dielectric, conductor, seam };

const char* channel_kind_name(ChannelKind k);
ChannelKind channel_kind_from_name(const std::string& name);

/// One packaging loss channel: where the energy sits (region, surface, or
/// seam) and which material's loss rate applies to it. `participation` /
/// `admittance` are filled by evaluate_channel.
struct LossChannel {
    ChannelKind kind = ChannelKind::bulk_dielectric;
    std::string region_or_surface;  // region label, surface label, or seam name
    std::string material;

    double participation = 0.0;      // dielectric / conductor kinds
    double admittance = 0.0;         // seams, S/m
    double eval_frequency_hz = 0.0;  // frequency the admittance was computed at
};

// ---------------------------------------------------------------------------
// Participation ratios. All quadratures are the piecewise-constant cell sums
// of the FieldGrid, so imported FEM exports and native solver grids evaluate
// identically.
// ---------------------------------------------------------------------------

/// p_E = int_region eps |E|^2 dV / int eps |E|^2 dV.
/// Region permittivities come from the grid; regions without an embedded
/// value are resolved by name against `materials`.
double dielectric_participation(const FieldGrid& field, const std::string& region,
                                const MaterialTable& materials);

/// Thin dielectric coating on a metal surface, sampled on the vacuum side:
/// the surface integral of |E|^2 times `thickness`, normalized like p_E, is
/// divided by oxide_permittivity^2 (displacement-field continuity).
double surface_dielectric_participation(const FieldGrid& field, const std::string& surface,
                                        double thickness, double oxide_permittivity,
                                        const MaterialTable& materials);

/// p_cond = lambda * int_surf |H_par|^2 dS / int |H|^2 dV, with H_par the
/// component tangential to the surface.
double conductor_participation(const FieldGrid& field, const std::string& surface,
                               double penetration_depth);

/// y_seam = int_seam |H_par|^2 dl / (omega * int mu0 |H|^2 dV), trapezoid
/// line integral along the path; H_par is the component along the seam.
double seam_admittance_path(const FieldGrid& field, const SeamPath& path, double frequency_hz);

/// Sum over every SeamPath carried by the grid with the given name (a seam
/// network of several rings budgets as one joint).
double seam_admittance(const FieldGrid& field, const std::string& seam_name, double frequency_hz);

/// Evaluate the channel's participation or admittance on a grid.
void evaluate_channel(LossChannel& channel, const FieldGrid& field, const MaterialTable& materials,
                      double frequency_hz);

// ---------------------------------------------------------------------------
// Q factors
// ---------------------------------------------------------------------------

/// Per-channel Q limit:
///   bulk/surface dielectric  Q = 1 / (p * tan_delta)
///   conductor                Q = omega * mu0 * lambda / (R_s * p_cond)
///   seam                     Q = g_seam / y_seam
/// Throws Error when the material lacks the needed loss rate.
/// Note: the conductor expression is used in the dimensionally consistent
/// orientation (Q falls as R_s grows).
double q_from_channel(const LossChannel& channel, const MaterialTable& materials,
                      double frequency_hz);

struct BudgetEntry {
    LossChannel channel;
    double q_limit = 0.0;  // valid when budgeted
    bool budgeted = false;
    std::string note;  // reason when unbudgeted
};

struct QBudget {
    std::vector<BudgetEntry> entries;
    double frequency_hz = 0.0;
    double total_q = 0.0;     // inverse sum over budgeted channels; inf when none
    double t1_limit_s = 0.0;  // total_q / omega
};

/// Inverse-Q summation over channels with known loss rates; channels lacking
/// one are carried through as "unbudgeted" rather than dropped.
QBudget assemble_budget(const std::vector<LossChannel>& channels, const MaterialTable& materials,
                        double frequency_hz);

/// Lower bound on seam conductance given a measured T1, assuming the seam
/// dominates the loss: g_min = y_seam * omega * T1.
double seam_bound_from_t1(double t1_s, double frequency_hz, double y_seam);

/// Budget-limited T1 across a frequency band (channels re-rated per
/// frequency; admittances rescale as 1/omega from their evaluation point).
std::vector<std::pair<double, double>> t1_bound(const std::vector<double>& frequencies_hz,
                                                const std::vector<LossChannel>& channels,
                                                const MaterialTable& materials);

// ---------------------------------------------------------------------------
// Channel declaration file: one channel per line,
//   bulk_dielectric    region=<label>  material=<name>
//   surface_dielectric surface=<label> material=<name>   # thickness+eps from
//                                                        # the oxide material
//   conductor          surface=<label> material=<name>
//   seam               seam=<name>     material=<name>
// ---------------------------------------------------------------------------

std::vector<LossChannel> load_channels(const std::string& path);
std::vector<LossChannel> parse_channels(const std::string& text, const std::string& origin);

}  // namespace qpack

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qpack {

enum class PreparedState { ground, excited };

struct IQShot {
    PreparedState prepared = PreparedState::ground;
    double i_volts = 0.0;
    double q_volts = 0.0;
};

/// Labeled single-shot readout records for one qubit.
struct IQDataset {
    std::string qubit_id;
    std::vector<IQShot> shots;
    double readout_duration_s = 0.0;  // T_m
    double qubit_frequency_hz = 0.0;
    double t1_reference_s = 0.0;  // 0 = unset

    std::size_t count(PreparedState s) const;
};

/// Shots projected onto the line of maximum discrimination (the line through
/// the two preparation centroids), translated so the midpoint sits at 0 and
/// the ground centroid is negative.
struct ProjectedShots {
    std::vector<double> ground;   // volts
    std::vector<double> excited;  // volts
    double separation_v = 0.0;    // centroid distance
    std::array<double, 2> axis{1.0, 0.0};
    std::array<double, 2> midpoint{0.0, 0.0};
};

ProjectedShots project_shots(const IQDataset& dataset);

/// Joint double-Gaussian fit to both preparation histograms. Exactly seven
/// free parameters: the shared standard deviation, the two centers and four
/// amplitudes. Amplitudes are histogram count weights.
struct DoubleGaussianFit {
    double sigma = 0.0;
    double center_g = 0.0;
    double center_e = 0.0;
    double a_gg = 0.0, a_ge = 0.0;  // ground preparation: weight at c_g / c_e
    double a_eg = 0.0, a_ee = 0.0;  // excited preparation
    double discriminator = 0.0;     // fixed at 0 after canonical translation

    bool converged = false;
    int iterations = 0;
    double goodness_r2 = 0.0;  // joint histogram R^2
    int bins = 0;
    double bin_width = 0.0;

    /// Order: sigma, center_g, center_e, a_gg, a_ge, a_eg, a_ee.
    std::array<double, 7> standard_errors{};
    std::array<double, 49> covariance{};

    /// Excited-state fraction when preparing ground (thermal population).
    double ground_excited_population() const { return a_ge / (a_gg + a_ge); }
    /// Ground-state fraction when preparing excited.
    double excited_ground_population() const { return a_eg / (a_ee + a_eg); }
    /// Delta-method standard error of ground_excited_population().
    double ground_excited_population_se() const;
};

/// Histogram binning: Freedman-Diaconis width with a floor of 64 bins.
DoubleGaussianFit fit_double_gaussian(const ProjectedShots& projected);

/// Averaged assignment error counted on the raw projected shots:
/// (fraction of ground-prep shots above 0 + fraction of excited-prep shots
/// below 0) / 2.
double readout_error(const ProjectedShots& projected, double discriminator = 0.0);

/// Threshold minimizing the fitted mixture's misclassified mass (the
/// weighted-Gaussian crossing between the two centers). Provided as a
/// variant; headline error numbers keep the midpoint discriminator at 0.
double optimal_discriminator(const DoubleGaussianFit& fit);

struct EffectiveTemperature {
    enum class Status { ok, below_floor, infinite_temperature };
    double kelvin = 0.0;
    Status status = Status::ok;
    double population_ratio = 0.0;  // a_ge / a_gg
};

/// Boltzmann inversion of the ground-preparation peak weights:
/// T = hbar*omega_q / (kB * ln(a_gg/a_ge)). a_ge = 0 reports the
/// below-measurement-floor sentinel; a_ge = a_gg is flagged as an invalid
/// thermal state; a_ge > a_gg (population inversion) throws.
EffectiveTemperature effective_temperature(const DoubleGaussianFit& fit,
                                           double qubit_frequency_hz);

struct ReadoutBudget {
    double measured = 0.0;
    double thermal = 0.0;
    double overlap = 0.0;
    double decay = 0.0;
    double residual = 0.0;  // measured - (thermal + overlap + decay); may be negative
};

/// Gaussian-overlap component of the averaged error for two equal-sigma
/// clouds separated by `separation`: erfc(separation / (2*sqrt(2)*sigma)) / 2.
double overlap_error(double separation, double sigma);

/// Error budget. thermal = ground-prep excited fraction halved (averaging
/// over the two preparations; `halve_thermal` toggles the convention),
/// decay = T_m / (4*T1), overlap from the fitted sigma/centers.
ReadoutBudget error_budget(const IQDataset& dataset, const ProjectedShots& projected,
                           const DoubleGaussianFit& fit, double t1_s, bool halve_thermal = true);

// ---------------------------------------------------------------------------
// Synthetic shot generator (test oracle). Deterministic given the seed.
// Decaying excited shots land along the inter-centroid axis at the fraction
// of the readout window they spent excited (boxcar-weighted integration), so
// the generator is deliberately richer than the aggregate T_m/(4 T1) budget
// term.
// ---------------------------------------------------------------------------

struct SynthTruth {
    std::string qubit_id = "synth";
    double sigma_v = 1e-3;
    double sigma_e_v = 0.0;  // 0 = same as sigma_v (shared-sigma truth)
    double separation_v = 6.2e-3;
    double angle_rad = 0.0;               // orientation of the axis in the IQ plane
    std::array<double, 2> offset_v{0, 0};  // translation of the whole pattern
    double thermal_population = 0.0;
    /// Extra ground-state weight on the excited preparation (e.g. pulse
    /// infidelity); lets pure two-Gaussian truths carry asymmetric weights.
    double excited_ground_extra = 0.0;
    double decay_probability = 0.0;  // P(excited shot decays inside the window)
    double readout_duration_s = 6.2e-6;
    double qubit_frequency_hz = 4.5e9;
    int shots_per_state = 100000;

    void validate() const;
    /// T1 implied by decay_probability and the readout window.
    double implied_t1_s() const;
};

IQDataset synth_shots(const SynthTruth& truth, std::uint64_t seed);

// ---------------------------------------------------------------------------
// File I/O: shot CSV (qubit_id,prepared,i_volts,q_volts) with a sidecar
// metadata file, and the synth truth key=value format.
// ---------------------------------------------------------------------------

IQDataset load_shots(const std::string& csv_path, const std::string& meta_path);
void save_shots(const IQDataset& dataset, const std::string& csv_path,
                const std::string& meta_path);
SynthTruth load_synth_truth(const std::string& path);

}  // namespace qpack

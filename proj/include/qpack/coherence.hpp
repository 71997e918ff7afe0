#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpack/geometry.hpp"

namespace qpack {

/// One relaxation/echo measurement: normalized signal versus delay.
/// Signals are expected pre-normalized (1 at zero delay, 0 asymptote); the
/// file loader applies calibration levels when the data file carries them.
struct DecayCurve {
    std::vector<double> delays_s;  // strictly increasing
    std::vector<double> signal;

    void validate() const;  // equal lengths >= 4, increasing delays
};

struct DecayFit {
    double tau_s = 0.0;
    double r_squared = 0.0;
};

/// Single-parameter least-squares fit of signal = exp(-t/tau). Scale-
/// equivariant in time: scaling every delay by c scales tau by c exactly.
/// Throws when the optimum pins to the search bound (no resolvable decay
/// constant) or the signal has no variance.
DecayFit fit_decay(const DecayCurve& curve);

enum class CoherenceKind { t1, t2e };

struct QubitRecord {
    std::string qubit_id;
    Point2 position;  // wafer coordinates, m
    double design_frequency_hz = 0.0;
    double measured_frequency_hz = 0.0;
    double resonator_design_frequency_hz = 0.0;
    double resonator_measured_frequency_hz = 0.0;
    std::vector<DecayCurve> t1_curves;
    std::vector<DecayCurve> t2e_curves;
};

struct QubitMedian {
    double median_s = 0.0;
    int accepted = 0;
    int total = 0;
    bool measured = false;  // false when no fit passed the R^2 filter
};

/// Median of per-curve fitted taus that pass `r2_threshold`. Qubits with no
/// passing fit come back marked unmeasured (rendered grey, excluded from
/// statistics).
QubitMedian qubit_median(const QubitRecord& record, CoherenceKind kind, double r2_threshold);

// ---------------------------------------------------------------------------
// Bootstrap sub-sampling
// ---------------------------------------------------------------------------

enum class Statistic { median, min, max };

const char* statistic_name(Statistic s);
Statistic statistic_from_name(const std::string& name);

struct BootstrapBand {
    double confidence = 0.0;      // e.g. 0.50, 0.90, 0.99
    double lo = 0.0, hi = 0.0;    // central quantile band of the statistic
    double relative_error = 0.0;  // confidence-quantile of |s - S| / S
};

struct BootstrapSizeResult {
    int size = 0;
    double mean = 0.0;
    std::vector<BootstrapBand> bands;  // one per requested confidence
};

struct BootstrapResult {
    Statistic statistic = Statistic::median;
    double full_statistic = 0.0;
    int resamples = 0;
    bool with_replacement = false;
    std::vector<BootstrapSizeResult> sizes;
};

/// For each requested size draw `resamples` sub-samples (without replacement
/// by default), evaluate the statistic, and report the mean, central
/// confidence bands, and the relative error against the full-population
/// statistic. Deterministically partition-seeded: results do not depend on
/// `jobs`.
BootstrapResult bootstrap_statistic(const std::vector<double>& values, Statistic statistic,
                                    const std::vector<int>& sizes, int resamples,
                                    const std::vector<double>& confidences, std::uint64_t seed,
                                    int jobs = 1, bool with_replacement = false);

/// Smallest listed size whose relative error at `confidence` is <= target;
/// -1 when none qualifies.
int crossing_size(const BootstrapResult& result, double confidence, double target);

// ---------------------------------------------------------------------------
// Spatial statistics
// ---------------------------------------------------------------------------

enum class Observable { t1, t2e, qubit_freq_error, resonator_freq_error };

const char* observable_name(Observable o);
Observable observable_from_name(const std::string& name);

struct CorrelationBin {
    double lo_m = 0.0, hi_m = 0.0;
    double mean_product = 0.0;  // averaged z_i * z_j over pairs in the bin
    double band_lo = 0.0, band_hi = 0.0;
    int pair_count = 0;
    bool present = false;  // false when the bin holds no pairs
};

struct SpatialCorrelation {
    std::vector<CorrelationBin> bins;
    int records_used = 0;
};

/// Pearson-style distance-binned correlation: z-score the observable over the
/// measured records, average z_i*z_j per distance bin, and attach confidence
/// bands from a record-subset bootstrap (full re-analysis per subset).
/// `bin_edges` empty selects 10 equal-width bins over the observed pair
/// distances.
SpatialCorrelation pearson_spatial(const std::vector<QubitRecord>& records, Observable observable,
                                   std::vector<double> bin_edges, double bootstrap_fraction,
                                   int resamples, std::uint64_t seed,
                                   double band_confidence = 0.95, double r2_threshold = 0.75,
                                   int jobs = 1, int default_bins = 10);

struct RadialPoint {
    std::string qubit_id;
    double distance_m = 0.0;
    double value = 0.0;
};

struct RadialBin {
    double lo_m = 0.0, hi_m = 0.0;
    double median = 0.0;
    int count = 0;
};

struct RadialProfile {
    std::vector<RadialPoint> points;  // sorted by distance from wafer center
    std::vector<RadialBin> bins;      // binned medians for trend inspection
};

RadialProfile radial_profile(const std::vector<QubitRecord>& records, Observable observable,
                             int nbins = 8, double r2_threshold = 0.75);

// ---------------------------------------------------------------------------
// File I/O
// ---------------------------------------------------------------------------

/// Wafer map CSV: qubit_id,x_m,y_m,design_f_hz,measured_f_hz,res_design_f_hz,
/// res_measured_f_hz.
std::vector<QubitRecord> load_wafer_map(const std::string& path);

/// Decay CSV: optional "# cal one=<v> zero=<v>" line, then
/// "delay_s,signal" rows. Calibration levels normalize the signal on load.
DecayCurve load_decay_curve(const std::string& path);

/// Manifest CSV: qubit_id,kind,file (file paths relative to the manifest).
/// Attaches curves to the matching wafer-map records.
void attach_decay_curves(std::vector<QubitRecord>& records, const std::string& manifest_path);

}  // namespace qpack

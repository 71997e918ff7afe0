#include "qpack/coherence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <thread>

#include "qpack/error.hpp"
#include "qpack/parallel.hpp"
#include "qpack/rng.hpp"
#include "qpack/text_util.hpp"

namespace qpack {

void DecayCurve::validate() const {
    require(delays_s.size() == signal.size(), "decay curve arrays must have equal length");
    require(delays_s.size() >= 4, "decay curve needs at least 4 points");
    for (std::size_t i = 1; i < delays_s.size(); ++i)
        require(delays_s[i] > delays_s[i - 1], "decay delays must be strictly increasing");
    for (double t : delays_s) require(std::isfinite(t) && t >= 0.0, "delays must be finite and >= 0");
    for (double s : signal) require(std::isfinite(s), "signal must be finite");
}

namespace {

double decay_ssr(const DecayCurve& c, double tau) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < c.delays_s.size(); ++i) {
        const double r = std::exp(-c.delays_s[i] / tau) - c.signal[i];
        ssr += r * r;
    }
    return ssr;
}

// d(SSR)/d(log tau); roots of this locate the least-squares tau far more
// sharply than value comparisons can.
double decay_ssr_gradient(const DecayCurve& c, double tau) {
    double g = 0.0;
    for (std::size_t i = 0; i < c.delays_s.size(); ++i) {
        const double m = std::exp(-c.delays_s[i] / tau);
        g += 2.0 * (m - c.signal[i]) * m * (c.delays_s[i] / tau);
    }
    return g;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

double evaluate_statistic(Statistic s, std::vector<double>& v) {
    switch (s) {
        case Statistic::median: return median_inplace(v);
        case Statistic::min: return *std::min_element(v.begin(), v.end());
        case Statistic::max: return *std::max_element(v.begin(), v.end());
    }
    return 0.0;
}

}  // namespace

DecayFit fit_decay(const DecayCurve& curve) {
    curve.validate();

    double sum = 0.0;
    for (double s : curve.signal) sum += s;
    const double mean = sum / static_cast<double>(curve.signal.size());
    double sst = 0.0;
    for (double s : curve.signal) sst += (s - mean) * (s - mean);
    require(sst > 0.0, "signal has no variance; decay constant undefined");

    // Work in units of the curve span so the fit is scale-equivariant in
    // time: tau(c * delays) = c * tau(delays).
    const double t_scale = curve.delays_s.back();
    require(t_scale > 0.0, "decay curve needs a positive time span");
    DecayCurve unit;
    unit.delays_s.reserve(curve.delays_s.size());
    for (double t : curve.delays_s) unit.delays_s.push_back(t / t_scale);
    unit.signal = curve.signal;

    // Coarse log-grid scan for the SSR basin, golden-section narrowing, then
    // bisection on the gradient sign (value comparisons alone locate a
    // smooth minimum only to sqrt(machine epsilon)).
    const double lo = std::log(1e-4);
    const double hi = std::log(1e5);
    constexpr int kScan = 96;
    int best = 0;
    double best_ssr = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kScan; ++i) {
        const double L = lo + (hi - lo) * static_cast<double>(i) / (kScan - 1);
        const double ssr = decay_ssr(unit, std::exp(L));
        if (ssr < best_ssr) {
            best_ssr = ssr;
            best = i;
        }
    }
    require(best != 0 && best != kScan - 1,
            "decay fit hit the search bound; no resolvable positive decay constant");
    double a = lo + (hi - lo) * static_cast<double>(best - 1) / (kScan - 1);
    double b = lo + (hi - lo) * static_cast<double>(best + 1) / (kScan - 1);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = decay_ssr(unit, std::exp(x1)), f2 = decay_ssr(unit, std::exp(x2));
    for (int it = 0; it < 40; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = decay_ssr(unit, std::exp(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = decay_ssr(unit, std::exp(x2));
        }
    }
    if (decay_ssr_gradient(unit, std::exp(a)) < 0.0 && decay_ssr_gradient(unit, std::exp(b)) > 0.0) {
        for (int it = 0; it < 90; ++it) {
            const double mid = 0.5 * (a + b);
            if (decay_ssr_gradient(unit, std::exp(mid)) < 0.0)
                a = mid;
            else
                b = mid;
        }
    }
    DecayFit fit;
    const double tau_unit = std::exp(0.5 * (a + b));
    fit.tau_s = tau_unit * t_scale;
    fit.r_squared = 1.0 - decay_ssr(unit, tau_unit) / sst;
    return fit;
}

QubitMedian qubit_median(const QubitRecord& record, CoherenceKind kind, double r2_threshold) {
    const auto& curves = (kind == CoherenceKind::t1) ? record.t1_curves : record.t2e_curves;
    QubitMedian out;
    out.total = static_cast<int>(curves.size());
    std::vector<double> accepted;
    for (const auto& curve : curves) {
        DecayFit fit;
        try {
            fit = fit_decay(curve);
        } catch (const Error&) {
            continue;  // unusable curve counts as a rejected fit
        }
        if (fit.r_squared > r2_threshold) accepted.push_back(fit.tau_s);
    }
    out.accepted = static_cast<int>(accepted.size());
    if (accepted.empty()) return out;  // marked unmeasured
    out.median_s = median_inplace(accepted);
    out.measured = true;
    return out;
}

const char* statistic_name(Statistic s) {
    switch (s) {
        case Statistic::median: return "median";
        case Statistic::min: return "min";
        case Statistic::max: return "max";
    }
    return "?";
}

Statistic statistic_from_name(const std::string& name) {
    if (name == "median") return Statistic::median;
    if (name == "min") return Statistic::min;
    if (name == "max") return Statistic::max;
    fail("unknown statistic '" + name + "'");
}

BootstrapResult bootstrap_statistic(const std::vector<double>& values, Statistic statistic,
                                    const std::vector<int>& sizes, int resamples,
                                    const std::vector<double>& confidences, std::uint64_t seed,
                                    int jobs, bool with_replacement) {
    require(!values.empty(), "bootstrap needs a non-empty population");
    require(resamples >= 100, "bootstrap needs >= 100 resamples");
    require(!sizes.empty(), "bootstrap needs at least one subsample size");
    const int population = static_cast<int>(values.size());
    for (int s : sizes)
        require(s >= 1 && s <= population,
                "subsample size " + std::to_string(s) + " outside population 1.." +
                    std::to_string(population));
    for (double c : confidences)
        require(c > 0.0 && c < 1.0, "confidence levels must lie in (0, 1)");

    BootstrapResult result;
    result.statistic = statistic;
    result.resamples = resamples;
    result.with_replacement = with_replacement;
    {
        std::vector<double> whole = values;
        result.full_statistic = evaluate_statistic(statistic, whole);
    }
    require(result.full_statistic != 0.0, "full-population statistic is zero; relative error undefined");

    result.sizes.resize(sizes.size());
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        const int m = sizes[si];
        std::vector<double> stats(static_cast<std::size_t>(resamples));
        parallel_for(resamples, jobs, [&](int r) {
            Rng rng(derive_seed(seed, si * static_cast<std::size_t>(resamples) +
                                          static_cast<std::size_t>(r)));
            std::vector<double> sample(static_cast<std::size_t>(m));
            if (with_replacement) {
                for (int k = 0; k < m; ++k)
                    sample[static_cast<std::size_t>(k)] =
                        values[rng.below(static_cast<std::uint64_t>(population))];
            } else {
                // Partial Fisher-Yates over an index array.
                std::vector<int> idx(static_cast<std::size_t>(population));
                for (int k = 0; k < population; ++k) idx[static_cast<std::size_t>(k)] = k;
                for (int k = 0; k < m; ++k) {
                    const auto j = k + static_cast<int>(rng.below(
                                           static_cast<std::uint64_t>(population - k)));
                    std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(j)]);
                    sample[static_cast<std::size_t>(k)] =
                        values[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
                }
            }
            stats[static_cast<std::size_t>(r)] = evaluate_statistic(statistic, sample);
        });

        BootstrapSizeResult& out = result.sizes[si];
        out.size = m;
        double mean = 0.0;
        for (double s : stats) mean += s;
        out.mean = mean / static_cast<double>(resamples);

        std::vector<double> sorted_stats = stats;
        std::sort(sorted_stats.begin(), sorted_stats.end());
        std::vector<double> rel_errors(stats.size());
        for (std::size_t k = 0; k < stats.size(); ++k)
            rel_errors[k] = std::abs(stats[k] - result.full_statistic) /
                            std::abs(result.full_statistic);
        std::sort(rel_errors.begin(), rel_errors.end());

        for (double c : confidences) {
            BootstrapBand band;
            band.confidence = c;
            band.lo = quantile_sorted(sorted_stats, (1.0 - c) / 2.0);
            band.hi = quantile_sorted(sorted_stats, (1.0 + c) / 2.0);
            band.relative_error = quantile_sorted(rel_errors, c);
            out.bands.push_back(band);
        }
    }
    return result;
}

int crossing_size(const BootstrapResult& result, double confidence, double target) {
    std::vector<std::pair<int, double>> curve;
    for (const auto& size : result.sizes)
        for (const auto& band : size.bands)
            if (std::abs(band.confidence - confidence) < 1e-12)
                curve.emplace_back(size.size, band.relative_error);
    std::sort(curve.begin(), curve.end());
    for (const auto& [size, err] : curve)
        if (err <= target) return size;
    return -1;
}

const char* observable_name(Observable o) {
    switch (o) {
        case Observable::t1: return "t1";
        case Observable::t2e: return "t2e";
        case Observable::qubit_freq_error: return "qubit_freq_error";
        case Observable::resonator_freq_error: return "resonator_freq_error";
    }
    return "?";
}

Observable observable_from_name(const std::string& name) {
    if (name == "t1") return Observable::t1;
    if (name == "t2e") return Observable::t2e;
    if (name == "qubit_freq_error") return Observable::qubit_freq_error;
    if (name == "resonator_freq_error") return Observable::resonator_freq_error;
    fail("unknown observable '" + name + "'");
}

namespace {

/// Observable value per record; false when the record has no value (e.g. no
/// passing coherence fit). Frequency errors are measured minus designed.
bool observable_value(const QubitRecord& rec, Observable obs, double r2_threshold, double& out) {
    switch (obs) {
        case Observable::t1:
        case Observable::t2e: {
            const auto med = qubit_median(
                rec, obs == Observable::t1 ? CoherenceKind::t1 : CoherenceKind::t2e, r2_threshold);
            if (!med.measured) return false;
            out = med.median_s;
            return true;
        }
        case Observable::qubit_freq_error:
            if (rec.measured_frequency_hz <= 0.0 || rec.design_frequency_hz <= 0.0) return false;
            out = rec.measured_frequency_hz - rec.design_frequency_hz;
            return true;
        case Observable::resonator_freq_error:
            if (rec.resonator_measured_frequency_hz <= 0.0 ||
                rec.resonator_design_frequency_hz <= 0.0)
                return false;
            out = rec.resonator_measured_frequency_hz - rec.resonator_design_frequency_hz;
            return true;
    }
    return false;
}

struct MeasuredSet {
    std::vector<Point2> positions;
    std::vector<double> values;
};

MeasuredSet collect_measured(const std::vector<QubitRecord>& records, Observable obs,
                             double r2_threshold) {
    MeasuredSet set;
    for (const auto& rec : records) {
        double v = 0.0;
        if (observable_value(rec, obs, r2_threshold, v)) {
            set.positions.push_back(rec.position);
            set.values.push_back(v);
        }
    }
    return set;
}

/// Distance-binned mean of z_i*z_j over the given record subset. Returns one
/// value per bin with a presence flag.
void binned_products(const MeasuredSet& set, const std::vector<int>& subset,
                     const std::vector<double>& edges, std::vector<double>& mean,
                     std::vector<int>& count) {
    const std::size_t nbins = edges.size() - 1;
    mean.assign(nbins, 0.0);
    count.assign(nbins, 0);

    double mu = 0.0;
    for (int idx : subset) mu += set.values[static_cast<std::size_t>(idx)];
    mu /= static_cast<double>(subset.size());
    double var = 0.0;
    for (int idx : subset) {
        const double d = set.values[static_cast<std::size_t>(idx)] - mu;
        var += d * d;
    }
    var /= static_cast<double>(subset.size());
    if (var <= 0.0) fail("observable has zero variance; z-score undefined");
    const double sd = std::sqrt(var);

    for (std::size_t a = 0; a < subset.size(); ++a) {
        for (std::size_t b = a + 1; b < subset.size(); ++b) {
            const auto ia = static_cast<std::size_t>(subset[a]);
            const auto ib = static_cast<std::size_t>(subset[b]);
            const double dist = std::hypot(set.positions[ia].x - set.positions[ib].x,
                                           set.positions[ia].y - set.positions[ib].y);
            if (dist < edges.front() || dist > edges.back()) continue;
            auto bin = static_cast<std::size_t>(
                std::upper_bound(edges.begin(), edges.end(), dist) - edges.begin());
            bin = (bin == 0) ? 0 : bin - 1;
            if (bin >= nbins) bin = nbins - 1;
            const double za = (set.values[ia] - mu) / sd;
            const double zb = (set.values[ib] - mu) / sd;
            mean[bin] += za * zb;
            count[bin] += 1;
        }
    }
    for (std::size_t b = 0; b < nbins; ++b)
        if (count[b] > 0) mean[b] /= static_cast<double>(count[b]);
}

}  // namespace

SpatialCorrelation pearson_spatial(const std::vector<QubitRecord>& records, Observable observable,
                                   std::vector<double> bin_edges, double bootstrap_fraction,
                                   int resamples, std::uint64_t seed, double band_confidence,
                                   double r2_threshold, int jobs, int default_bins) {
    MeasuredSet set = collect_measured(records, observable, r2_threshold);
    const int n = static_cast<int>(set.values.size());
    require(n >= 2, "pearson_spatial needs at least two measured records");
    require(bootstrap_fraction > 0.0 && bootstrap_fraction <= 1.0,
            "bootstrap_fraction must lie in (0, 1]");
    require(resamples >= 10, "pearson bootstrap needs >= 10 resamples");
    require(band_confidence > 0.0 && band_confidence < 1.0, "band confidence must lie in (0,1)");

    if (bin_edges.empty()) {
        double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                const double d = std::hypot(
                    set.positions[static_cast<std::size_t>(a)].x -
                        set.positions[static_cast<std::size_t>(b)].x,
                    set.positions[static_cast<std::size_t>(a)].y -
                        set.positions[static_cast<std::size_t>(b)].y);
                dmin = std::min(dmin, d);
                dmax = std::max(dmax, d);
            }
        require(dmax > 0.0, "all record positions coincide");
        require(default_bins >= 1, "need at least one distance bin");
        for (int b = 0; b <= default_bins; ++b)
            bin_edges.push_back(dmin + (dmax - dmin) * static_cast<double>(b) / default_bins);
    }
    require(bin_edges.size() >= 2, "need at least one distance bin");
    for (std::size_t i = 1; i < bin_edges.size(); ++i)
        require(bin_edges[i] > bin_edges[i - 1], "bin edges must be strictly increasing");

    const std::size_t nbins = bin_edges.size() - 1;
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    std::vector<double> full_mean;
    std::vector<int> full_count;
    binned_products(set, all, bin_edges, full_mean, full_count);

    // Subset bootstrap: full re-analysis (z-scores included) per subset.
    const int m = std::max(2, static_cast<int>(std::lround(bootstrap_fraction * n)));
    std::vector<std::vector<double>> bin_samples(nbins);
    std::vector<std::vector<double>> per_resample(static_cast<std::size_t>(resamples));
    parallel_for(resamples, jobs, [&](int r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        std::vector<int> idx(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) idx[static_cast<std::size_t>(k)] = k;
        for (int k = 0; k < m; ++k) {
            const auto j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - k)));
            std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(j)]);
        }
        std::vector<int> subset(idx.begin(), idx.begin() + m);
        std::vector<double> mean;
        std::vector<int> count;
        try {
            binned_products(set, subset, bin_edges, mean, count);
        } catch (const Error&) {
            return;  // zero-variance subset contributes nothing
        }
        std::vector<double> row(nbins, std::nan(""));
        for (std::size_t b = 0; b < nbins; ++b)
            if (count[b] > 0) row[b] = mean[b];
        per_resample[static_cast<std::size_t>(r)] = std::move(row);
    });
    for (const auto& row : per_resample) {
        if (row.empty()) continue;
        for (std::size_t b = 0; b < nbins; ++b)
            if (!std::isnan(row[b])) bin_samples[b].push_back(row[b]);
    }

    SpatialCorrelation out;
    out.records_used = n;
    for (std::size_t b = 0; b < nbins; ++b) {
        CorrelationBin bin;
        bin.lo_m = bin_edges[b];
        bin.hi_m = bin_edges[b + 1];
        bin.pair_count = full_count[b];
        bin.present = full_count[b] > 0;
        if (bin.present) {
            bin.mean_product = full_mean[b];
            auto& samples = bin_samples[b];
            if (!samples.empty()) {
                std::sort(samples.begin(), samples.end());
                bin.band_lo = quantile_sorted(samples, (1.0 - band_confidence) / 2.0);
                bin.band_hi = quantile_sorted(samples, (1.0 + band_confidence) / 2.0);
            } else {
                bin.band_lo = bin.band_hi = bin.mean_product;
            }
        }
        out.bins.push_back(bin);
    }
    return out;
}

RadialProfile radial_profile(const std::vector<QubitRecord>& records, Observable observable,
                             int nbins, double r2_threshold) {
    RadialProfile out;
    for (const auto& rec : records) {
        double v = 0.0;
        if (!observable_value(rec, observable, r2_threshold, v)) continue;
        RadialPoint p;
        p.qubit_id = rec.qubit_id;
        p.distance_m = std::hypot(rec.position.x, rec.position.y);
        p.value = v;
        out.points.push_back(std::move(p));
    }
    std::sort(out.points.begin(), out.points.end(),
              [](const RadialPoint& a, const RadialPoint& b) {
                  if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
                  return a.qubit_id < b.qubit_id;
              });
    if (out.points.empty() || nbins < 1) return out;

    const double rmax = out.points.back().distance_m;
    const double width = rmax > 0.0 ? rmax / nbins : 1.0;
    for (int b = 0; b < nbins; ++b) {
        RadialBin bin;
        bin.lo_m = b * width;
        bin.hi_m = (b + 1) * width;
        std::vector<double> vals;
        for (const auto& p : out.points) {
            const bool last = (b == nbins - 1);
            if (p.distance_m >= bin.lo_m && (p.distance_m < bin.hi_m || (last && p.distance_m <= bin.hi_m)))
                vals.push_back(p.value);
        }
        bin.count = static_cast<int>(vals.size());
        if (bin.count > 0) {
            bin.median = median_inplace(vals);
            out.bins.push_back(bin);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// File I/O
// ---------------------------------------------------------------------------

std::vector<QubitRecord> load_wafer_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open wafer map '" + path + "'");
    std::vector<QubitRecord> out;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string content = strip_comment(line);
        if (content.empty()) continue;
        if (!header_seen) {
            require(content ==
                        "qubit_id,x_m,y_m,design_f_hz,measured_f_hz,res_design_f_hz,res_measured_f_hz",
                    "unexpected wafer map header in " + path);
            header_seen = true;
            continue;
        }
        auto f = split(content, ',');
        require(f.size() == 7,
                "wafer map row needs 7 fields at " + path + ":" + std::to_string(lineno));
        QubitRecord rec;
        rec.qubit_id = f[0];
        rec.position.x = parse_double(f[1], path);
        rec.position.y = parse_double(f[2], path);
        rec.design_frequency_hz = parse_double(f[3], path);
        rec.measured_frequency_hz = parse_double(f[4], path);
        rec.resonator_design_frequency_hz = parse_double(f[5], path);
        rec.resonator_measured_frequency_hz = parse_double(f[6], path);
        out.push_back(std::move(rec));
    }
    require(header_seen, "wafer map is empty: " + path);
    return out;
}

DecayCurve load_decay_curve(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open decay file '" + path + "'");
    DecayCurve curve;
    double cal_one = 1.0, cal_zero = 0.0;
    bool have_cal = false;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string raw = trim(line);
        if (raw.rfind("# cal", 0) == 0) {
            // "# cal one=<v> zero=<v>": instrument calibration levels.
            for (const auto& tok : tokens(raw.substr(5))) {
                auto eq = tok.find('=');
                require(eq != std::string::npos, "malformed cal line in " + path);
                const std::string k = tok.substr(0, eq);
                const double v = parse_double(tok.substr(eq + 1), path);
                if (k == "one") cal_one = v;
                else if (k == "zero") cal_zero = v;
                else fail("unknown cal key '" + k + "' in " + path);
            }
            have_cal = true;
            continue;
        }
        const std::string content = strip_comment(line);
        if (content.empty()) continue;
        if (!header_seen) {
            require(content == "delay_s,signal", "unexpected decay header in " + path);
            header_seen = true;
            continue;
        }
        auto f = split(content, ',');
        require(f.size() == 2, "decay row needs 2 fields at " + path + ":" + std::to_string(lineno));
        curve.delays_s.push_back(parse_double(f[0], path));
        curve.signal.push_back(parse_double(f[1], path));
    }
    if (have_cal) {
        require(cal_one != cal_zero, "degenerate calibration levels in " + path);
        for (double& s : curve.signal) s = (s - cal_zero) / (cal_one - cal_zero);
    }
    curve.validate();
    return curve;
}

void attach_decay_curves(std::vector<QubitRecord>& records, const std::string& manifest_path) {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) fail("cannot open decay manifest '" + manifest_path + "'");
    const auto base = std::filesystem::path(manifest_path).parent_path();

    std::map<std::string, QubitRecord*> by_id;
    for (auto& rec : records) by_id[rec.qubit_id] = &rec;

    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string content = strip_comment(line);
        if (content.empty()) continue;
        if (!header_seen) {
            require(content == "qubit_id,kind,file",
                    "unexpected manifest header in " + manifest_path);
            header_seen = true;
            continue;
        }
        auto f = split(content, ',');
        require(f.size() == 3,
                "manifest row needs 3 fields at " + manifest_path + ":" + std::to_string(lineno));
        auto it = by_id.find(f[0]);
        require(it != by_id.end(), "manifest references unknown qubit '" + f[0] + "' at " +
                                       manifest_path + ":" + std::to_string(lineno));
        DecayCurve curve = load_decay_curve((base / f[2]).string());
        if (f[1] == "t1")
            it->second->t1_curves.push_back(std::move(curve));
        else if (f[1] == "t2e")
            it->second->t2e_curves.push_back(std::move(curve));
        else
            fail("manifest kind must be t1|t2e at " + manifest_path + ":" + std::to_string(lineno));
    }
}

}  // namespace qpack

#include "qpack/readout.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "qpack/constants.hpp"
#include "qpack/error.hpp"
#include "qpack/report.hpp"
#include "qpack/rng.hpp"
#include "qpack/text_util.hpp"

namespace qpack {

std::size_t IQDataset::count(PreparedState s) const {
    std::size_t n = 0;
    for (const auto& shot : shots)
        if (shot.prepared == s) ++n;
    return n;
}

ProjectedShots project_shots(const IQDataset& dataset) {
    double cg[2] = {0, 0}, ce[2] = {0, 0};
    std::size_t ng = 0, ne = 0;
    for (const auto& s : dataset.shots) {
        if (s.prepared == PreparedState::ground) {
            cg[0] += s.i_volts;
            cg[1] += s.q_volts;
            ++ng;
        } else {
            ce[0] += s.i_volts;
            ce[1] += s.q_volts;
            ++ne;
        }
    }
    require(ng > 0 && ne > 0, "both preparations must be present");
    cg[0] /= static_cast<double>(ng);
    cg[1] /= static_cast<double>(ng);
    ce[0] /= static_cast<double>(ne);
    ce[1] /= static_cast<double>(ne);

    const double dx = ce[0] - cg[0], dy = ce[1] - cg[1];
    const double sep = std::hypot(dx, dy);
    require(sep > 0.0, "coincident preparation centroids: discrimination line undefined");

    ProjectedShots out;
    out.axis = {dx / sep, dy / sep};
    out.midpoint = {0.5 * (cg[0] + ce[0]), 0.5 * (cg[1] + ce[1])};
    out.separation_v = sep;
    out.ground.reserve(ng);
    out.excited.reserve(ne);
    for (const auto& s : dataset.shots) {
        const double p =
            (s.i_volts - out.midpoint[0]) * out.axis[0] + (s.q_volts - out.midpoint[1]) * out.axis[1];
        if (s.prepared == PreparedState::ground)
            out.ground.push_back(p);
        else
            out.excited.push_back(p);
    }
    return out;
}

namespace {

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

double gauss_pdf(double x, double c, double sigma) {
    const double z = (x - c) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * kPi));
}

struct Histogram {
    std::vector<double> centers;
    std::vector<double> ground_counts;
    std::vector<double> excited_counts;
    double width = 0.0;
};

Histogram make_histogram(const ProjectedShots& p) {
    std::vector<double> all;
    all.reserve(p.ground.size() + p.excited.size());
    all.insert(all.end(), p.ground.begin(), p.ground.end());
    all.insert(all.end(), p.excited.begin(), p.excited.end());
    std::sort(all.begin(), all.end());
    const double lo = all.front(), hi = all.back();
    require(hi > lo, "degenerate projected samples");

    // Freedman-Diaconis width per preparation (the combined sample is
    // bimodal, so its IQR spans the gap and badly overestimates the width),
    // with a floor of 64 bins.
    auto fd_width = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        const double iqr = v[(3 * n) / 4] - v[n / 4];
        return 2.0 * iqr / std::cbrt(static_cast<double>(n));
    };
    double width = std::min(fd_width(p.ground), fd_width(p.excited));
    if (width <= 0.0) width = (hi - lo) / 64.0;
    int bins = static_cast<int>(std::ceil((hi - lo) / width));
    bins = std::max(bins, 64);  // floor of 64 bins
    bins = std::min(bins, 4096);

    Histogram h;
    h.width = (hi - lo) / bins;
    h.centers.resize(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) h.centers[static_cast<std::size_t>(b)] = lo + (b + 0.5) * h.width;
    h.ground_counts.assign(static_cast<std::size_t>(bins), 0.0);
    h.excited_counts.assign(static_cast<std::size_t>(bins), 0.0);
    auto fill = [&](const std::vector<double>& xs, std::vector<double>& counts) {
        for (double x : xs) {
            int b = static_cast<int>((x - lo) / h.width);
            b = std::clamp(b, 0, bins - 1);
            counts[static_cast<std::size_t>(b)] += 1.0;
        }
    };
    fill(p.ground, h.ground_counts);
    fill(p.excited, h.excited_counts);
    return h;
}

// Parameter order: sigma, c_g, c_e, a_gg, a_ge, a_eg, a_ee.
using Params = Eigen::Matrix<double, 7, 1>;

void model_and_jacobian(const Histogram& h, const Params& t, Eigen::VectorXd& resid,
                        Eigen::MatrixXd* jac) {
    const int nb = static_cast<int>(h.centers.size());
    const double sigma = t(0), cg = t(1), ce = t(2);
    const double w = h.width;
    resid.resize(2 * nb);
    if (jac) jac->setZero(2 * nb, 7);
    for (int b = 0; b < nb; ++b) {
        const double x = h.centers[static_cast<std::size_t>(b)];
        const double gg = gauss_pdf(x, cg, sigma);
        const double ge = gauss_pdf(x, ce, sigma);
        const double model_g = w * (t(3) * gg + t(4) * ge);
        const double model_e = w * (t(5) * gg + t(6) * ge);
        resid(b) = model_g - h.ground_counts[static_cast<std::size_t>(b)];
        resid(nb + b) = model_e - h.excited_counts[static_cast<std::size_t>(b)];
        if (!jac) continue;
        const double zg = (x - cg) / sigma, ze = (x - ce) / sigma;
        const double dgg_dsigma = gg * (zg * zg - 1.0) / sigma;
        const double dge_dsigma = ge * (ze * ze - 1.0) / sigma;
        const double dgg_dc = gg * zg / sigma;
        const double dge_dc = ge * ze / sigma;
        (*jac)(b, 0) = w * (t(3) * dgg_dsigma + t(4) * dge_dsigma);
        (*jac)(b, 1) = w * t(3) * dgg_dc;
        (*jac)(b, 2) = w * t(4) * dge_dc;
        (*jac)(b, 3) = w * gg;
        (*jac)(b, 4) = w * ge;
        (*jac)(nb + b, 0) = w * (t(5) * dgg_dsigma + t(6) * dge_dsigma);
        (*jac)(nb + b, 1) = w * t(5) * dgg_dc;
        (*jac)(nb + b, 2) = w * t(6) * dge_dc;
        (*jac)(nb + b, 5) = w * gg;
        (*jac)(nb + b, 6) = w * ge;
    }
}

}  // namespace

double DoubleGaussianFit::ground_excited_population_se() const {
    const double s = a_gg + a_ge;
    if (s <= 0.0) return 0.0;
    const double d_agg = -a_ge / (s * s);
    const double d_age = a_gg / (s * s);
    // Covariance block of (a_gg, a_ge) = indices 3, 4.
    const double var = d_agg * d_agg * covariance[3 * 7 + 3] +
                       2.0 * d_agg * d_age * covariance[3 * 7 + 4] +
                       d_age * d_age * covariance[4 * 7 + 4];
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

DoubleGaussianFit fit_double_gaussian(const ProjectedShots& projected) {
    require(projected.ground.size() >= 100 && projected.excited.size() >= 100,
            "need at least 100 shots per prepared state for fitting");
    Histogram h = make_histogram(projected);

    // Initialization: per-preparation medians for the centers, a MAD-based
    // sigma, side-of-discriminator counts for the amplitudes.
    Params t;
    t(1) = median_of(projected.ground);
    t(2) = median_of(projected.excited);
    std::vector<double> dev;
    dev.reserve(projected.ground.size());
    for (double x : projected.ground) dev.push_back(std::abs(x - t(1)));
    t(0) = std::max(1.4826 * median_of(dev), h.width);
    const auto below = [](const std::vector<double>& xs, bool negative) {
        std::size_t n = 0;
        for (double x : xs)
            if ((x < 0.0) == negative) ++n;
        return static_cast<double>(n);
    };
    t(3) = std::max(below(projected.ground, true), 1.0);
    t(4) = std::max(below(projected.ground, false), 0.5);
    t(5) = std::max(below(projected.excited, true), 0.5);
    t(6) = std::max(below(projected.excited, false), 1.0);

    Eigen::VectorXd resid;
    Eigen::MatrixXd jac;
    model_and_jacobian(h, t, resid, &jac);
    double ssr = resid.squaredNorm();

    double lambda = 1e-3;
    int iter = 0;
    bool converged = false;
    for (; iter < 200; ++iter) {
        const Eigen::Matrix<double, 7, 7> hess = jac.transpose() * jac;
        const Params grad = jac.transpose() * resid;
        bool stepped = false;
        for (int attempt = 0; attempt < 25; ++attempt) {
            Eigen::Matrix<double, 7, 7> damped = hess;
            for (int d = 0; d < 7; ++d) damped(d, d) += lambda * std::max(hess(d, d), 1e-12);
            const Params delta = damped.ldlt().solve(-grad);
            const Params trial = t + delta;
            if (trial(0) <= 0.0) {
                lambda *= 4.0;
                continue;
            }
            Eigen::VectorXd trial_resid;
            model_and_jacobian(h, trial, trial_resid, nullptr);
            const double trial_ssr = trial_resid.squaredNorm();
            if (trial_ssr <= ssr) {
                const double improvement = ssr - trial_ssr;
                t = trial;
                ssr = trial_ssr;
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
                model_and_jacobian(h, t, resid, &jac);
                if (improvement <= 1e-12 * std::max(ssr, 1e-300)) converged = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!stepped || converged) {
            converged = converged || !stepped;
            break;
        }
    }
    require(converged, "double-Gaussian fit did not converge");

    // Canonical order: ground center below excited center.
    if (t(1) > t(2)) {
        std::swap(t(1), t(2));
        std::swap(t(3), t(4));
        std::swap(t(5), t(6));
    }
    // Weights are non-negative by contract; clamp noise-level undershoot.
    for (int a = 3; a < 7; ++a) t(a) = std::max(t(a), 0.0);

    DoubleGaussianFit fit;
    fit.sigma = t(0);
    fit.center_g = t(1);
    fit.center_e = t(2);
    fit.a_gg = t(3);
    fit.a_ge = t(4);
    fit.a_eg = t(5);
    fit.a_ee = t(6);
    fit.discriminator = 0.0;
    fit.converged = true;
    fit.iterations = iter + 1;
    fit.bins = static_cast<int>(h.centers.size());
    fit.bin_width = h.width;

    // Goodness: joint-histogram R^2.
    double mean = 0.0;
    const double nb2 = static_cast<double>(2 * h.centers.size());
    for (std::size_t b = 0; b < h.centers.size(); ++b)
        mean += h.ground_counts[b] + h.excited_counts[b];
    mean /= nb2;
    double sst = 0.0;
    for (std::size_t b = 0; b < h.centers.size(); ++b) {
        sst += (h.ground_counts[b] - mean) * (h.ground_counts[b] - mean);
        sst += (h.excited_counts[b] - mean) * (h.excited_counts[b] - mean);
    }
    fit.goodness_r2 = sst > 0.0 ? 1.0 - ssr / sst : 0.0;

    // Covariance of the unweighted least-squares estimate under Poisson bin
    // noise: sandwich form inv(J'J) (J' W J) inv(J'J) with W the per-bin
    // count variance (= the modeled count). A flat residual-variance scaling
    // would understate the peak-dominated parameters, sigma above all.
    model_and_jacobian(h, t, resid, &jac);
    Eigen::VectorXd model_counts(resid.size());
    for (Eigen::Index b = 0; b < resid.size(); ++b) {
        const double data_count = b < static_cast<Eigen::Index>(h.centers.size())
                                      ? h.ground_counts[static_cast<std::size_t>(b)]
                                      : h.excited_counts[static_cast<std::size_t>(
                                            b - static_cast<Eigen::Index>(h.centers.size()))];
        model_counts(b) = std::max(resid(b) + data_count, 1.0);
    }
    const Eigen::Matrix<double, 7, 7> normal = jac.transpose() * jac;
    const Eigen::Matrix<double, 7, 7> inv_normal =
        normal.ldlt().solve(Eigen::Matrix<double, 7, 7>::Identity());
    const Eigen::Matrix<double, 7, 7> meat =
        jac.transpose() * model_counts.asDiagonal() * jac;
    Eigen::Matrix<double, 7, 7> cov = inv_normal * meat * inv_normal;
    for (int r = 0; r < 7; ++r) {
        fit.standard_errors[static_cast<std::size_t>(r)] =
            cov(r, r) > 0.0 ? std::sqrt(cov(r, r)) : 0.0;
        for (int c = 0; c < 7; ++c) fit.covariance[static_cast<std::size_t>(r * 7 + c)] = cov(r, c);
    }
    return fit;
}

double readout_error(const ProjectedShots& projected, double discriminator) {
    require(!projected.ground.empty() && !projected.excited.empty(), "empty sample set");
    std::size_t g_wrong = 0, e_wrong = 0;
    for (double x : projected.ground)
        if (x > discriminator) ++g_wrong;
    for (double x : projected.excited)
        if (x < discriminator) ++e_wrong;
    const double fg = static_cast<double>(g_wrong) / static_cast<double>(projected.ground.size());
    const double fe = static_cast<double>(e_wrong) / static_cast<double>(projected.excited.size());
    return 0.5 * (fg + fe);
}

double optimal_discriminator(const DoubleGaussianFit& fit) {
    require(fit.converged, "fit must be converged");
    require(fit.sigma > 0.0 && fit.center_g < fit.center_e, "fit lacks separated centers");
    // Misassigned mass is stationary where the two preparation-summed peak
    // densities cross: wl * G(x; c_g, s) = wr * G(x; c_e, s) with
    // wl = a_gg + a_eg (mass around the ground center) and
    // wr = a_ge + a_ee (mass around the excited center).
    const double wl = fit.a_gg + fit.a_eg;
    const double wr = fit.a_ge + fit.a_ee;
    require(wl > 0.0 && wr > 0.0, "degenerate weights");
    const double mid = 0.5 * (fit.center_g + fit.center_e);
    const double sep = fit.center_e - fit.center_g;
    // Equal-sigma crossing: x = mid + sigma^2 * ln(wl / wr) / sep.
    return mid + fit.sigma * fit.sigma * std::log(wl / wr) / sep;
}

EffectiveTemperature effective_temperature(const DoubleGaussianFit& fit,
                                           double qubit_frequency_hz) {
    require(qubit_frequency_hz > 0.0, "qubit frequency must be > 0");
    require(fit.a_gg > 0.0, "ground-preparation ground weight must be > 0");
    require(fit.a_ge >= 0.0, "ground-preparation excited weight must be >= 0");
    if (fit.a_ge > fit.a_gg)
        fail("population inversion: excited weight exceeds ground weight on ground preparation");

    EffectiveTemperature out;
    out.population_ratio = fit.a_ge / fit.a_gg;
    if (fit.a_ge == 0.0) {
        out.status = EffectiveTemperature::Status::below_floor;
        out.kelvin = 0.0;
        return out;
    }
    if (fit.a_ge == fit.a_gg) {
        out.status = EffectiveTemperature::Status::infinite_temperature;
        out.kelvin = std::numeric_limits<double>::infinity();
        return out;
    }
    const double log_ratio = std::log(fit.a_gg / fit.a_ge);
    out.kelvin = kHbar * angular(qubit_frequency_hz) / (kBoltzmann * log_ratio);
    out.status = EffectiveTemperature::Status::ok;
    return out;
}

double overlap_error(double separation, double sigma) {
    require(sigma > 0.0, "sigma must be > 0");
    return 0.5 * std::erfc(separation / (2.0 * std::sqrt(2.0) * sigma));
}

ReadoutBudget error_budget(const IQDataset& dataset, const ProjectedShots& projected,
                           const DoubleGaussianFit& fit, double t1_s, bool halve_thermal) {
    require(fit.converged, "fit must be converged");
    require(t1_s > 0.0, "missing T1 reference for the decay term");
    require(dataset.readout_duration_s > 0.0, "dataset lacks readout duration");
    ReadoutBudget budget;
    budget.measured = readout_error(projected, fit.discriminator);
    const double thermal_pop = fit.ground_excited_population();
    budget.thermal = (halve_thermal ? 0.5 : 1.0) * thermal_pop;
    budget.overlap = overlap_error(fit.center_e - fit.center_g, fit.sigma);
    budget.decay = dataset.readout_duration_s / (4.0 * t1_s);
    budget.residual = budget.measured - (budget.thermal + budget.overlap + budget.decay);
    return budget;
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

void SynthTruth::validate() const {
    require(sigma_v > 0.0, "sigma must be > 0");
    require(sigma_e_v >= 0.0, "excited sigma must be >= 0");
    require(separation_v > 0.0, "separation must be > 0");
    require(thermal_population >= 0.0 && thermal_population < 1.0,
            "thermal_population must lie in [0, 1)");
    require(excited_ground_extra >= 0.0 && thermal_population + excited_ground_extra < 1.0,
            "excited_ground_extra must keep the ground weight below 1");
    require(decay_probability >= 0.0 && decay_probability < 1.0,
            "decay_probability must lie in [0, 1)");
    require(readout_duration_s > 0.0, "readout duration must be > 0");
    require(shots_per_state >= 1, "shots_per_state must be >= 1");
}

double SynthTruth::implied_t1_s() const {
    if (decay_probability <= 0.0) return 0.0;
    return -readout_duration_s / std::log1p(-decay_probability);
}

IQDataset synth_shots(const SynthTruth& truth, std::uint64_t seed) {
    truth.validate();
    Rng rng(seed);

    const double ca = std::cos(truth.angle_rad), sa = std::sin(truth.angle_rad);
    const double half = 0.5 * truth.separation_v;
    const double sigma_e = truth.sigma_e_v > 0.0 ? truth.sigma_e_v : truth.sigma_v;

    IQDataset data;
    data.qubit_id = truth.qubit_id;
    data.readout_duration_s = truth.readout_duration_s;
    data.qubit_frequency_hz = truth.qubit_frequency_hz;
    data.t1_reference_s = truth.implied_t1_s();
    data.shots.reserve(static_cast<std::size_t>(truth.shots_per_state) * 2);

    const double t1 = truth.implied_t1_s();
    for (int prep = 0; prep < 2; ++prep) {
        const bool prep_excited = (prep == 1);
        for (int s = 0; s < truth.shots_per_state; ++s) {
            // State after preparation: thermal excitation survives the pi
            // pulse as a swap; the excited preparation may carry extra
            // ground weight (pulse infidelity).
            bool excited = prep_excited;
            const double flip = prep_excited
                                    ? truth.thermal_population + truth.excited_ground_extra
                                    : truth.thermal_population;
            if (rng.uniform() < flip) excited = !excited;

            // Axis coordinate before noise: +half excited, -half ground;
            // decayed shots sit at the time-weighted mixture point.
            double u;
            if (excited && truth.decay_probability > 0.0 &&
                rng.uniform() < truth.decay_probability) {
                const double v = rng.uniform();
                const double t_decay = -t1 * std::log1p(-v * truth.decay_probability);
                const double frac = std::min(t_decay / truth.readout_duration_s, 1.0);
                u = -half + frac * truth.separation_v;
            } else {
                u = excited ? half : -half;
            }
            const double sig = excited ? sigma_e : truth.sigma_v;
            const double du = rng.gauss(0.0, sig);
            const double dv = rng.gauss(0.0, sig);

            IQShot shot;
            shot.prepared = prep_excited ? PreparedState::excited : PreparedState::ground;
            shot.i_volts = truth.offset_v[0] + ca * (u + du) - sa * dv;
            shot.q_volts = truth.offset_v[1] + sa * (u + du) + ca * dv;
            data.shots.push_back(shot);
        }
    }
    return data;
}

// ---------------------------------------------------------------------------
// File I/O
// ---------------------------------------------------------------------------

IQDataset load_shots(const std::string& csv_path, const std::string& meta_path) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) fail("cannot open shots file '" + csv_path + "'");
    IQDataset data;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string content = strip_comment(line);
        if (content.empty()) continue;
        if (!header_seen) {
            require(content == "qubit_id,prepared,i_volts,q_volts",
                    "unexpected shots header in " + csv_path);
            header_seen = true;
            continue;
        }
        auto f = split(content, ',');
        require(f.size() == 4, "shots row needs 4 fields at " + csv_path + ":" +
                                   std::to_string(lineno));
        if (data.qubit_id.empty()) data.qubit_id = f[0];
        IQShot shot;
        if (f[1] == "ground")
            shot.prepared = PreparedState::ground;
        else if (f[1] == "excited")
            shot.prepared = PreparedState::excited;
        else
            fail("prepared state must be ground|excited at " + csv_path + ":" +
                 std::to_string(lineno));
        shot.i_volts = parse_double(f[2], csv_path);
        shot.q_volts = parse_double(f[3], csv_path);
        require(std::isfinite(shot.i_volts) && std::isfinite(shot.q_volts),
                "non-finite voltage at " + csv_path + ":" + std::to_string(lineno));
        data.shots.push_back(shot);
    }
    require(header_seen, "shots file is empty: " + csv_path);

    std::ifstream meta(meta_path, std::ios::binary);
    if (!meta) fail("cannot open shots metadata '" + meta_path + "'");
    int mline = 0;
    while (std::getline(meta, line)) {
        ++mline;
        const std::string content = strip_comment(line);
        if (content.empty()) continue;
        const std::string context = meta_path + ":" + std::to_string(mline);
        auto eq = content.find('=');
        require(eq != std::string::npos, "expected key = value in " + context);
        const std::string key = trim(content.substr(0, eq));
        const std::string value = trim(content.substr(eq + 1));
        if (key == "qubit_id")
            data.qubit_id = value;
        else if (key == "readout_duration")
            data.readout_duration_s = parse_time_s(value, context);
        else if (key == "qubit_frequency")
            data.qubit_frequency_hz = parse_frequency_hz(value, context);
        else if (key == "t1_reference")
            data.t1_reference_s = parse_time_s(value, context);
        else
            fail("unknown metadata key '" + key + "' in " + context);
    }
    return data;
}

void save_shots(const IQDataset& dataset, const std::string& csv_path,
                const std::string& meta_path) {
    std::ostringstream csv;
    csv << "qubit_id,prepared,i_volts,q_volts\n";
    for (const auto& s : dataset.shots)
        csv << dataset.qubit_id << ','
            << (s.prepared == PreparedState::ground ? "ground" : "excited") << ','
            << format_double(s.i_volts) << ',' << format_double(s.q_volts) << '\n';
    atomic_write(csv_path, csv.str());

    std::ostringstream meta;
    meta << "qubit_id = " << dataset.qubit_id << '\n';
    meta << "readout_duration = " << format_double(dataset.readout_duration_s) << " s\n";
    meta << "qubit_frequency = " << format_double(dataset.qubit_frequency_hz) << " Hz\n";
    if (dataset.t1_reference_s > 0.0)
        meta << "t1_reference = " << format_double(dataset.t1_reference_s) << " s\n";
    atomic_write(meta_path, meta.str());
}

SynthTruth load_synth_truth(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open synth truth file '" + path + "'");
    SynthTruth truth;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string content = strip_comment(line);
        if (content.empty()) continue;
        const std::string context = path + ":" + std::to_string(lineno);
        auto eq = content.find('=');
        require(eq != std::string::npos, "expected key = value in " + context);
        const std::string key = trim(content.substr(0, eq));
        const std::string value = trim(content.substr(eq + 1));
        if (key == "qubit_id") truth.qubit_id = value;
        else if (key == "sigma") truth.sigma_v = parse_voltage_v(value, context);
        else if (key == "sigma_excited") truth.sigma_e_v = parse_voltage_v(value, context);
        else if (key == "separation") truth.separation_v = parse_voltage_v(value, context);
        else if (key == "angle_deg") truth.angle_rad = parse_double(value, context) * kPi / 180.0;
        else if (key == "offset_i") truth.offset_v[0] = parse_voltage_v(value, context);
        else if (key == "offset_q") truth.offset_v[1] = parse_voltage_v(value, context);
        else if (key == "thermal_population") truth.thermal_population = parse_double(value, context);
        else if (key == "excited_ground_extra")
            truth.excited_ground_extra = parse_double(value, context);
        else if (key == "decay_probability") truth.decay_probability = parse_double(value, context);
        else if (key == "readout_duration") truth.readout_duration_s = parse_time_s(value, context);
        else if (key == "qubit_frequency")
            truth.qubit_frequency_hz = parse_frequency_hz(value, context);
        else if (key == "shots_per_state")
            truth.shots_per_state = static_cast<int>(parse_long(value, context));
        else fail("unknown synth truth key '" + key + "' in " + context);
    }
    truth.validate();
    return truth;
}

}  // namespace qpack

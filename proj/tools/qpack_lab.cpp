// qpack-lab: analysis toolkit for wafer-scale superconducting-qubit packages.
// Subcommands: modes, loss, readout, coherence, thermal, pipeline.
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include "qpack/cavity_solver.hpp"
#include "qpack/coherence.hpp"
#include "qpack/constants.hpp"
#include "qpack/error.hpp"
#include "qpack/loss_budget.hpp"
#include "qpack/materials.hpp"
#include "qpack/parallel.hpp"
#include "qpack/readout.hpp"
#include "qpack/report.hpp"
#include "qpack/rng.hpp"
#include "qpack/text_util.hpp"
#include "qpack/thermal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qpack;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 0;
    bool seed_fixed = false;
    int jobs = 1;
};

std::string data_file(const std::string& name) {
    return (fs::path(QPACK_DATA_DIR) / name).string();
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

double parse_frequency_flag(const std::string& s, const std::string& context) {
    // Accept bare numbers as Hz alongside explicit units.
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (trim(s.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    return parse_frequency_hz(s, context);
}

std::vector<FrequencyBand> parse_bands(const std::string& spec) {
    // "4GHz:6GHz:qubits,9.5GHz:10.5GHz:readout"
    std::vector<FrequencyBand> bands;
    if (trim(spec).empty()) return bands;
    for (const auto& item : split(spec, ',')) {
        if (item.empty()) continue;
        auto parts = split(item, ':');
        require(parts.size() == 3, "band entry must be low:high:label, got '" + item + "'");
        FrequencyBand band;
        band.low_hz = parse_frequency_flag(parts[0], "bands");
        band.high_hz = parse_frequency_flag(parts[1], "bands");
        band.label = parts[2];
        bands.push_back(band);
    }
    return bands;
}

void write_with_manifest(const std::string& path, const RunManifest& manifest,
                         const std::string& body) {
    atomic_write(path, manifest.csv_block() + body);
}

json manifest_json(const RunManifest& m) {
    json j;
    j["subcommand"] = m.subcommand;
    j["inputs"] = m.inputs;
    j["config_hash"] = hex64(m.config_hash);
    j["seed"] = m.seed;
    j["seed_fixed"] = m.seed_fixed;
    j["tool"] = m.tool_version;
    j["timestamp"] = m.timestamp;
    return j;
}

// ---------------------------------------------------------------------------
// modes
// ---------------------------------------------------------------------------

struct ModesArgs {
    std::string geometry_path;
    std::string materials_path = data_file("materials_default.txt");
    int n_modes = 8;
    std::string spacing;
    std::string bands_spec;
    double tolerance = 1e-8;
    std::string out_dir;
};

int run_modes(const ModesArgs& args, const GlobalOptions& global) {
    GeometryFile gf = load_geometry(args.geometry_path);
    MaterialTable materials = load_material_table(args.materials_path);
    SolverConfig config;
    config.grid_spacing = parse_length(args.spacing, "--spacing");
    config.num_modes = args.n_modes;
    config.tolerance = args.tolerance;
    ModeSpectrum spectrum = solve_modes(gf.geometry, materials, config, gf.seams);
    std::vector<FrequencyBand> bands = parse_bands(args.bands_spec);
    ModeReport report = mode_report(spectrum, bands);

    RunManifest manifest = make_manifest(
        "modes", {args.geometry_path, args.materials_path},
        {args.spacing, std::to_string(args.n_modes), args.bands_spec}, global.seed,
        global.seed_fixed);

    std::ostringstream csv;
    csv << "# validity: 2-D reduction holds below " << format_double(report.model_ceiling_hz)
        << " Hz (no vertical field variation)\n";
    csv << "# effective_permittivity=" << format_double(spectrum.effective_permittivity) << '\n';
    csv << "# fundamental_hz=" << format_double(report.fundamental_hz) << '\n';
    csv << "# clearance_above_bands_hz=" << format_double(report.clearance_hz) << '\n';
    csv << "# collisions=" << report.collisions << '\n';
    csv << "# solver_iterations=" << spectrum.iterations << '\n';
    csv << "index,label,frequency_hz,degenerate_group,band_hit\n";
    for (const auto& row : report.rows)
        csv << row.index << ',' << row.label << ',' << format_double(row.frequency_hz) << ','
            << row.group << ',' << row.band_hit << '\n';
    write_with_manifest((fs::path(args.out_dir) / "spectrum.csv").string(), manifest, csv.str());

    for (const auto& mode : spectrum.modes)
        export_mode_field(mode, (fs::path(args.out_dir) / (mode.label + ".fgrid")).string());
    std::cout << "modes: " << spectrum.modes.size() << " modes, fundamental "
              << format_double(report.fundamental_hz) << " Hz, " << report.collisions
              << " band collisions\n";
    return 0;
}

// ---------------------------------------------------------------------------
// loss
// ---------------------------------------------------------------------------

struct LossArgs {
    std::string field_path;
    std::string field_manifest_alias;  // stable name for pipeline-internal files
    std::string materials_path = data_file("materials_default.txt");
    std::string channels_path;
    std::string frequency;
    std::string report_format = "csv";
    std::string t1_band;  // optional "lo:hi:count"
    std::string out_dir;
};

int run_loss(const LossArgs& args, const GlobalOptions& global) {
    FieldGrid field = load_field_grid(args.field_path);
    MaterialTable materials = load_material_table(args.materials_path);
    std::vector<LossChannel> channels = load_channels(args.channels_path);
    double frequency = 0.0;
    if (!args.frequency.empty())
        frequency = parse_frequency_flag(args.frequency, "--frequency");
    else
        frequency = field.mode_frequency_hz;
    require(frequency > 0.0, "no frequency: pass --frequency or use a grid with mode metadata");

    for (auto& ch : channels) evaluate_channel(ch, field, materials, frequency);
    QBudget budget = assemble_budget(channels, materials, frequency);

    const std::string field_name =
        args.field_manifest_alias.empty() ? args.field_path : args.field_manifest_alias;
    RunManifest manifest =
        make_manifest("loss", {field_name, args.materials_path, args.channels_path},
                      {args.frequency, args.report_format}, global.seed, global.seed_fixed);
    manifest.config_hash = fnv1a64(read_file_bytes(args.field_path), manifest.config_hash);

    const fs::path out(args.out_dir);
    if (args.report_format == "json") {
        json j;
        j["manifest"] = manifest_json(manifest);
        j["frequency_hz"] = budget.frequency_hz;
        j["total_q"] = budget.total_q;
        j["t1_limit_s"] = budget.t1_limit_s;
        j["channels"] = json::array();
        for (const auto& e : budget.entries) {
            json c;
            c["kind"] = channel_kind_name(e.channel.kind);
            c["label"] = e.channel.region_or_surface;
            c["material"] = e.channel.material;
            c["participation"] = e.channel.participation;
            c["admittance_S_per_m"] = e.channel.admittance;
            c["budgeted"] = e.budgeted;
            if (e.budgeted)
                c["q_limit"] = e.q_limit;
            else
                c["note"] = e.note;
            j["channels"].push_back(c);
        }
        atomic_write((out / "budget.json").string(), j.dump(2) + "\n");
    } else {
        std::ostringstream csv;
        csv << "# frequency_hz=" << format_double(budget.frequency_hz) << '\n';
        csv << "# total_q=" << format_double(budget.total_q) << '\n';
        csv << "# t1_limit_s=" << format_double(budget.t1_limit_s) << '\n';
        csv << "kind,label,material,participation,admittance_S_per_m,q_limit,budgeted,note\n";
        for (const auto& e : budget.entries) {
            csv << channel_kind_name(e.channel.kind) << ',' << e.channel.region_or_surface << ','
                << e.channel.material << ',' << format_double(e.channel.participation) << ','
                << format_double(e.channel.admittance) << ','
                << (e.budgeted ? format_double(e.q_limit) : "") << ','
                << (e.budgeted ? "yes" : "no") << ',' << e.note << '\n';
        }
        write_with_manifest((out / "budget.csv").string(), manifest, csv.str());
    }

    if (!args.t1_band.empty()) {
        auto parts = split(args.t1_band, ':');
        require(parts.size() == 3, "--t1-band must be lo:hi:count");
        const double lo = parse_frequency_flag(parts[0], "--t1-band");
        const double hi = parse_frequency_flag(parts[1], "--t1-band");
        const long count = parse_long(parts[2], "--t1-band");
        require(lo > 0.0 && hi > lo && count >= 2, "--t1-band needs 0 < lo < hi and count >= 2");
        std::vector<double> freqs;
        for (long i = 0; i < count; ++i)
            freqs.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
        auto curve = t1_bound(freqs, channels, materials);
        std::ostringstream csv;
        csv << "frequency_hz,t1_limit_s\n";
        for (const auto& [f, t1] : curve)
            csv << format_double(f) << ',' << format_double(t1) << '\n';
        write_with_manifest((out / "t1_bound.csv").string(), manifest, csv.str());
    }
    std::cout << "loss: total Q " << format_double(budget.total_q) << ", T1 limit "
              << format_double(budget.t1_limit_s) << " s\n";
    return 0;
}

// ---------------------------------------------------------------------------
// readout
// ---------------------------------------------------------------------------

struct ReadoutArgs {
    std::string shots_path;  // file or directory
    std::string t1_path;
    std::string synth_path;
    std::string report_format = "csv";
    std::string out_dir;
};

struct ReadoutRow {
    std::string qubit_id;
    std::size_t shots_g = 0, shots_e = 0;
    DoubleGaussianFit fit;
    ReadoutBudget budget;
    EffectiveTemperature teff;
    double t1_used_s = 0.0;
};

ReadoutRow analyze_dataset(const IQDataset& dataset, double t1_override) {
    ReadoutRow row;
    row.qubit_id = dataset.qubit_id;
    row.shots_g = dataset.count(PreparedState::ground);
    row.shots_e = dataset.count(PreparedState::excited);
    ProjectedShots projected = project_shots(dataset);
    row.fit = fit_double_gaussian(projected);
    row.t1_used_s = t1_override > 0.0 ? t1_override : dataset.t1_reference_s;
    require(row.t1_used_s > 0.0,
            "no T1 for qubit '" + dataset.qubit_id + "': supply --t1 or metadata t1_reference");
    row.budget = error_budget(dataset, projected, row.fit, row.t1_used_s);
    row.teff = effective_temperature(row.fit, dataset.qubit_frequency_hz);
    return row;
}

const char* teff_status_name(EffectiveTemperature::Status s) {
    switch (s) {
        case EffectiveTemperature::Status::ok: return "ok";
        case EffectiveTemperature::Status::below_floor: return "below_floor";
        case EffectiveTemperature::Status::infinite_temperature: return "invalid_infinite";
    }
    return "?";
}

int run_readout(const ReadoutArgs& args, const GlobalOptions& global) {
    std::map<std::string, double> t1_by_qubit;
    if (!args.t1_path.empty()) {
        std::ifstream in(args.t1_path);
        if (!in) fail("cannot open --t1 file '" + args.t1_path + "'");
        std::string line;
        bool header_seen = false;
        while (std::getline(in, line)) {
            const std::string content = strip_comment(line);
            if (content.empty()) continue;
            if (!header_seen && content == "qubit_id,t1_s") {
                header_seen = true;
                continue;
            }
            auto f = split(content, ',');
            require(f.size() == 2, "t1 file rows must be qubit_id,t1_s");
            t1_by_qubit[f[0]] = parse_double(f[1], args.t1_path);
        }
    }

    std::vector<IQDataset> datasets;
    std::vector<std::string> inputs;
    if (!args.synth_path.empty()) {
        SynthTruth truth = load_synth_truth(args.synth_path);
        IQDataset data = synth_shots(truth, global.seed);
        save_shots(data, (fs::path(args.out_dir) / (truth.qubit_id + "_shots.csv")).string(),
                   (fs::path(args.out_dir) / (truth.qubit_id + "_shots.meta")).string());
        datasets.push_back(std::move(data));
        inputs.push_back(args.synth_path);
    } else {
        require(!args.shots_path.empty(), "readout needs --shots or --synth");
        if (fs::is_directory(args.shots_path)) {
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(args.shots_path))
                if (entry.path().extension() == ".csv") files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            require(!files.empty(), "no .csv shot files in '" + args.shots_path + "'");
            for (const auto& f : files) {
                fs::path meta = f;
                meta.replace_extension(".meta");
                datasets.push_back(load_shots(f.string(), meta.string()));
                inputs.push_back(f.string());
            }
        } else {
            fs::path meta(args.shots_path);
            meta.replace_extension(".meta");
            datasets.push_back(load_shots(args.shots_path, meta.string()));
            inputs.push_back(args.shots_path);
        }
    }
    if (!args.t1_path.empty()) inputs.push_back(args.t1_path);

    std::vector<ReadoutRow> rows(datasets.size());
    // Per-qubit analyses are independent; seeding is per qubit, so the
    // outcome does not depend on worker scheduling.
    std::exception_ptr first_error;
    std::mutex error_mutex;
    parallel_for(static_cast<int>(datasets.size()), global.jobs, [&](int i) {
        try {
            const auto it = t1_by_qubit.find(datasets[static_cast<std::size_t>(i)].qubit_id);
            const double t1 = it != t1_by_qubit.end() ? it->second : 0.0;
            rows[static_cast<std::size_t>(i)] =
                analyze_dataset(datasets[static_cast<std::size_t>(i)], t1);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);

    RunManifest manifest = make_manifest("readout", inputs, {args.report_format}, global.seed,
                                         global.seed_fixed);
    const fs::path out(args.out_dir);
    if (args.report_format == "json") {
        json j;
        j["manifest"] = manifest_json(manifest);
        j["qubits"] = json::array();
        for (const auto& r : rows) {
            json q;
            q["qubit_id"] = r.qubit_id;
            q["measured_error"] = r.budget.measured;
            q["thermal"] = r.budget.thermal;
            q["overlap"] = r.budget.overlap;
            q["decay"] = r.budget.decay;
            q["residual"] = r.budget.residual;
            q["t_eff_k"] = r.teff.kelvin;
            q["t_eff_status"] = teff_status_name(r.teff.status);
            q["sigma_v"] = r.fit.sigma;
            q["center_g_v"] = r.fit.center_g;
            q["center_e_v"] = r.fit.center_e;
            q["amplitudes"] = {r.fit.a_gg, r.fit.a_ge, r.fit.a_eg, r.fit.a_ee};
            q["fit_r2"] = r.fit.goodness_r2;
            q["t1_used_s"] = r.t1_used_s;
            j["qubits"].push_back(q);
        }
        atomic_write((out / "readout.json").string(), j.dump(2) + "\n");
    } else {
        std::ostringstream csv;
        csv << "# convention: ground maps to the negative projected axis; discriminator at 0 V\n";
        csv << "qubit_id,shots_ground,shots_excited,sigma_v,center_g_v,center_e_v,"
               "a_gg,a_ge,a_eg,a_ee,fit_r2,measured_error,thermal,overlap,decay,residual,"
               "t_eff_k,t_eff_status,t1_used_s\n";
        for (const auto& r : rows) {
            csv << r.qubit_id << ',' << r.shots_g << ',' << r.shots_e << ','
                << format_double(r.fit.sigma) << ',' << format_double(r.fit.center_g) << ','
                << format_double(r.fit.center_e) << ',' << format_double(r.fit.a_gg) << ','
                << format_double(r.fit.a_ge) << ',' << format_double(r.fit.a_eg) << ','
                << format_double(r.fit.a_ee) << ',' << format_double(r.fit.goodness_r2) << ','
                << format_double(r.budget.measured) << ',' << format_double(r.budget.thermal)
                << ',' << format_double(r.budget.overlap) << ',' << format_double(r.budget.decay)
                << ',' << format_double(r.budget.residual) << ',' << format_double(r.teff.kelvin)
                << ',' << teff_status_name(r.teff.status) << ',' << format_double(r.t1_used_s)
                << '\n';
        }
        write_with_manifest((out / "readout.csv").string(), manifest, csv.str());
    }
    std::cout << "readout: " << rows.size() << " qubit(s) analyzed\n";
    return 0;
}

// ---------------------------------------------------------------------------
// coherence
// ---------------------------------------------------------------------------

struct CoherenceArgs {
    std::string wafer_path;
    std::string decays_manifest;
    double r2_threshold = 0.75;
    std::string bootstrap_spec;  // "sizes=5:10:20,resamples=2000,conf=0.5:0.9:0.99,statistic=median"
    std::string pearson_spec;    // "observable=t1,fraction=0.25,resamples=500"
    std::string out_dir;
};

int run_coherence(const CoherenceArgs& args, const GlobalOptions& global) {
    std::vector<QubitRecord> records = load_wafer_map(args.wafer_path);
    if (!args.decays_manifest.empty()) attach_decay_curves(records, args.decays_manifest);

    RunManifest manifest = make_manifest(
        "coherence", {args.wafer_path, args.decays_manifest},
        {args.bootstrap_spec, args.pearson_spec, format_double(args.r2_threshold)}, global.seed,
        global.seed_fixed);
    const fs::path out(args.out_dir);

    // Wafer map + histogram data: per-qubit medians with unmeasured qubits
    // retained (they render grey) but excluded from statistics.
    std::map<std::string, std::map<std::string, QubitMedian>> medians;
    std::ostringstream wafer_csv, hist_csv;
    wafer_csv << "qubit_id,x_m,y_m,kind,median_s,accepted,total,measured\n";
    hist_csv << "kind,median_s\n";
    for (const auto& rec : records) {
        for (const auto kind : {CoherenceKind::t1, CoherenceKind::t2e}) {
            const char* kind_name = kind == CoherenceKind::t1 ? "t1" : "t2e";
            QubitMedian med = qubit_median(rec, kind, args.r2_threshold);
            medians[kind_name][rec.qubit_id] = med;
            wafer_csv << rec.qubit_id << ',' << format_double(rec.position.x) << ','
                      << format_double(rec.position.y) << ',' << kind_name << ','
                      << (med.measured ? format_double(med.median_s) : "") << ',' << med.accepted
                      << ',' << med.total << ',' << (med.measured ? "yes" : "no") << '\n';
            if (med.measured) hist_csv << kind_name << ',' << format_double(med.median_s) << '\n';
        }
    }
    write_with_manifest((out / "wafer_map.csv").string(), manifest, wafer_csv.str());
    write_with_manifest((out / "histogram.csv").string(), manifest, hist_csv.str());

    if (!args.bootstrap_spec.empty()) {
        std::vector<int> sizes;
        int resamples = 2000;
        std::vector<double> confidences = {0.5, 0.9, 0.99};
        std::vector<Statistic> statistics = {Statistic::median, Statistic::min, Statistic::max};
        std::string kind_name = "t1";
        for (const auto& tok : split(args.bootstrap_spec, ',')) {
            auto eq = tok.find('=');
            require(eq != std::string::npos, "bootstrap spec tokens must be key=value");
            const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
            if (k == "sizes") {
                for (const auto& s : split(v, ':'))
                    sizes.push_back(static_cast<int>(parse_long(s, "--bootstrap sizes")));
            } else if (k == "resamples") {
                resamples = static_cast<int>(parse_long(v, "--bootstrap resamples"));
            } else if (k == "conf") {
                confidences.clear();
                for (const auto& c : split(v, ':')) {
                    double level = parse_double(c, "--bootstrap conf");
                    if (level > 1.0) level /= 100.0;  // accept percent form
                    confidences.push_back(level);
                }
            } else if (k == "statistic") {
                statistics = {statistic_from_name(v)};
            } else if (k == "kind") {
                kind_name = v;
            } else {
                fail("unknown bootstrap key '" + k + "'");
            }
        }
        std::vector<double> values;
        for (const auto& [qubit, med] : medians[kind_name])
            if (med.measured) values.push_back(med.median_s);
        require(!values.empty(), "no measured qubits for bootstrap");
        if (sizes.empty())
            for (int s = 2; s <= static_cast<int>(values.size()); ++s) sizes.push_back(s);

        std::ostringstream csv;
        csv << "statistic,size,mean,confidence,band_lo,band_hi,relative_error\n";
        for (const auto stat : statistics) {
            BootstrapResult result = bootstrap_statistic(values, stat, sizes, resamples,
                                                         confidences, global.seed, global.jobs);
            for (const auto& size : result.sizes)
                for (const auto& band : size.bands)
                    csv << statistic_name(stat) << ',' << size.size << ','
                        << format_double(size.mean) << ',' << format_double(band.confidence)
                        << ',' << format_double(band.lo) << ',' << format_double(band.hi) << ','
                        << format_double(band.relative_error) << '\n';
        }
        write_with_manifest((out / "bootstrap.csv").string(), manifest, csv.str());
    }

    if (!args.pearson_spec.empty()) {
        Observable observable = Observable::t1;
        double fraction = 0.25;
        int resamples = 500;
        int bins = 10;
        for (const auto& tok : split(args.pearson_spec, ',')) {
            auto eq = tok.find('=');
            require(eq != std::string::npos, "pearson spec tokens must be key=value");
            const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
            if (k == "observable") observable = observable_from_name(v);
            else if (k == "fraction") fraction = parse_double(v, "--pearson fraction");
            else if (k == "resamples") resamples = static_cast<int>(parse_long(v, "--pearson"));
            else if (k == "bins") bins = static_cast<int>(parse_long(v, "--pearson bins"));
            else fail("unknown pearson key '" + k + "'");
        }
        SpatialCorrelation corr = pearson_spatial(records, observable, {}, fraction, resamples,
                                                  global.seed, 0.95, args.r2_threshold,
                                                  global.jobs, bins);
        std::ostringstream csv;
        csv << "observable,bin_lo_m,bin_hi_m,pairs,mean_product,band_lo,band_hi\n";
        for (const auto& bin : corr.bins) {
            if (!bin.present) continue;  // empty bins reported as absent
            csv << observable_name(observable) << ',' << format_double(bin.lo_m) << ','
                << format_double(bin.hi_m) << ',' << bin.pair_count << ','
                << format_double(bin.mean_product) << ',' << format_double(bin.band_lo) << ','
                << format_double(bin.band_hi) << '\n';
        }
        write_with_manifest((out / "correlation.csv").string(), manifest, csv.str());

        RadialProfile prof = radial_profile(records, observable, 8, args.r2_threshold);
        std::ostringstream rad;
        rad << "row,qubit_id_or_bin,distance_or_lo_m,value_or_hi,median_s,count\n";
        for (const auto& p : prof.points)
            rad << "point," << p.qubit_id << ',' << format_double(p.distance_m) << ','
                << format_double(p.value) << ",,\n";
        for (const auto& b : prof.bins)
            rad << "bin,," << format_double(b.lo_m) << ',' << format_double(b.hi_m) << ','
                << format_double(b.median) << ',' << b.count << '\n';
        write_with_manifest((out / "radial.csv").string(), manifest, rad.str());
    }
    std::cout << "coherence: " << records.size() << " qubits processed\n";
    return 0;
}

// ---------------------------------------------------------------------------
// thermal
// ---------------------------------------------------------------------------

struct ThermalArgs {
    std::string payload_path;
    std::string mode_preset;
    std::string report_format = "csv";
    std::string out_dir;
};

int run_thermal(const ThermalArgs& args, const GlobalOptions& global) {
    std::string path = args.payload_path;
    if (path.empty()) {
        require(!args.mode_preset.empty(), "thermal needs --payload or --mode");
        path = data_file("payload_" + args.mode_preset + ".txt");
    }
    FridgePayload payload = load_payload(path);
    LoadReport report = aggregate_loads(payload.lines, payload.active);
    solve_temperatures(report, payload.curves);
    const double margin = headroom(report, payload.mxc_budget_w);
    const double travel = differential_contraction(payload.contraction_radius_m,
                                                   payload.contraction_a, payload.contraction_b);

    RunManifest manifest =
        make_manifest("thermal", {path}, {args.report_format}, global.seed, global.seed_fixed);
    const fs::path out(args.out_dir);
    if (args.report_format == "json") {
        json j;
        j["manifest"] = manifest_json(manifest);
        j["payload"] = payload.name;
        for (int s = 0; s < kStageCount; ++s) {
            json stage;
            stage["passive_w"] = report.stages[s].passive_w;
            stage["active_w"] = report.stages[s].active_w;
            stage["dissipative_w"] = report.stages[s].dissipative_w;
            stage["total_w"] = report.stages[s].total_w();
            stage["temperature_k"] = report.temperature_k[s];
            j["stages"][stage_label(static_cast<StageName>(s))] = stage;
        }
        j["mxc_headroom_fraction"] = margin;
        j["mxc_budget_w"] = payload.mxc_budget_w;
        j["headroom_flag"] = margin >= 1.0 ? "over budget" : "ok";
        j["contraction"] = {{"radius_m", payload.contraction_radius_m},
                            {"material_a", payload.contraction_material_a},
                            {"material_b", payload.contraction_material_b},
                            {"relative_travel_m", travel}};
        atomic_write((out / "thermal.json").string(), j.dump(2) + "\n");
    } else {
        std::ostringstream csv;
        csv << "# payload=" << payload.name << '\n';
        csv << "# mxc_headroom_fraction=" << format_double(margin)
            << (margin >= 1.0 ? " (over budget)" : "") << '\n';
        csv << "# differential_contraction_m=" << format_double(travel) << " ("
            << payload.contraction_material_a << " vs " << payload.contraction_material_b
            << " over " << format_double(payload.contraction_radius_m) << " m)\n";
        csv << "stage,passive_w,active_w,dissipative_w,total_w,temperature_k\n";
        for (int s = 0; s < kStageCount; ++s)
            csv << stage_label(static_cast<StageName>(s)) << ','
                << format_double(report.stages[s].passive_w) << ','
                << format_double(report.stages[s].active_w) << ','
                << format_double(report.stages[s].dissipative_w) << ','
                << format_double(report.stages[s].total_w()) << ','
                << format_double(report.temperature_k[s]) << '\n';
        write_with_manifest((out / "thermal.csv").string(), manifest, csv.str());
    }
    std::cout << "thermal: " << payload.name << ", MXC "
              << format_double(report.temperature_k[static_cast<int>(StageName::MXC)] * 1e3)
              << " mK, headroom " << format_double(margin) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

struct PipelineArgs {
    std::string config_path;
    std::string out_dir;
};

int run_pipeline(const PipelineArgs& args, const GlobalOptions& global) {
    std::ifstream in(args.config_path);
    if (!in) fail("cannot open pipeline config '" + args.config_path + "'");
    const fs::path base = fs::path(args.config_path).parent_path();
    const fs::path out(args.out_dir);

    auto resolve = [&](const std::string& p) {
        fs::path path(p);
        return path.is_absolute() ? path.string() : (base / path).string();
    };

    std::string line;
    int lineno = 0;
    int stages_run = 0;
    std::string modes_out;  // lets the loss stage consume exported fields
    while (std::getline(in, line)) {
        ++lineno;
        const std::string content = strip_comment(line);
        if (content.empty()) continue;
        const std::string context = args.config_path + ":" + std::to_string(lineno);
        auto toks = tokens(content);
        const std::string& stage = toks[0];
        std::map<std::string, std::string> kv;
        for (std::size_t i = 1; i < toks.size(); ++i) {
            auto eq = toks[i].find('=');
            require(eq != std::string::npos, "expected key=value tokens in " + context);
            kv[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
        }
        auto need = [&](const std::string& key) {
            auto it = kv.find(key);
            require(it != kv.end(), "pipeline stage '" + stage + "' needs " + key + " in " + context);
            return it->second;
        };

        if (stage == "modes") {
            ModesArgs margs;
            margs.geometry_path = resolve(need("geometry"));
            if (kv.count("materials")) margs.materials_path = resolve(kv["materials"]);
            if (kv.count("n_modes")) margs.n_modes = static_cast<int>(parse_long(kv["n_modes"], context));
            margs.spacing = need("spacing");
            if (kv.count("bands")) margs.bands_spec = kv["bands"];
            margs.out_dir = (out / "modes").string();
            run_modes(margs, global);
            modes_out = margs.out_dir;
        } else if (stage == "loss") {
            LossArgs largs;
            std::string field = need("field");
            if (field.rfind("modes:", 0) == 0) {
                require(!modes_out.empty(), "loss stage uses modes output before modes ran");
                largs.field_path =
                    (fs::path(modes_out) / ("mode0" + field.substr(6) + ".fgrid")).string();
                largs.field_manifest_alias = "pipeline:modes/mode0" + field.substr(6) + ".fgrid";
            } else {
                largs.field_path = resolve(field);
            }
            if (kv.count("materials")) largs.materials_path = resolve(kv["materials"]);
            largs.channels_path = resolve(need("channels"));
            if (kv.count("frequency")) largs.frequency = kv["frequency"];
            if (kv.count("report")) largs.report_format = kv["report"];
            largs.out_dir = (out / "loss").string();
            run_loss(largs, global);
        } else if (stage == "readout") {
            ReadoutArgs rargs;
            if (kv.count("synth")) rargs.synth_path = resolve(kv["synth"]);
            if (kv.count("shots")) rargs.shots_path = resolve(kv["shots"]);
            if (kv.count("t1")) rargs.t1_path = resolve(kv["t1"]);
            if (kv.count("report")) rargs.report_format = kv["report"];
            rargs.out_dir = (out / "readout").string();
            run_readout(rargs, global);
        } else if (stage == "coherence") {
            CoherenceArgs cargs;
            cargs.wafer_path = resolve(need("wafer"));
            if (kv.count("decays")) cargs.decays_manifest = resolve(kv["decays"]);
            if (kv.count("r2")) cargs.r2_threshold = parse_double(kv["r2"], context);
            if (kv.count("bootstrap")) cargs.bootstrap_spec = kv["bootstrap"];
            if (kv.count("pearson")) cargs.pearson_spec = kv["pearson"];
            cargs.out_dir = (out / "coherence").string();
            run_coherence(cargs, global);
        } else if (stage == "thermal") {
            ThermalArgs targs;
            if (kv.count("payload")) targs.payload_path = resolve(kv["payload"]);
            if (kv.count("mode")) targs.mode_preset = kv["mode"];
            if (kv.count("report")) targs.report_format = kv["report"];
            targs.out_dir = (out / "thermal").string();
            run_thermal(targs, global);
        } else {
            fail("unknown pipeline stage '" + stage + "' in " + context);
        }
        ++stages_run;
    }
    require(stages_run > 0, "pipeline config declares no stages");
    std::cout << "pipeline: " << stages_run << " stage(s) complete\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qpack-lab: cavity modes, packaging loss budgets, readout error analysis,\n"
                 "coherence statistics and dilution-refrigerator heat loads"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    GlobalOptions global;
    std::string seed_text;
    app.add_option("--seed", seed_text, "random seed (fixed seeds make reports byte-identical)");
    app.add_option("--jobs", global.jobs, "worker threads (results independent of the count)")
        ->check(CLI::Range(1, 256));

    ModesArgs modes_args;
    auto* modes = app.add_subcommand("modes", "solve cavity eigenmodes");
    modes->add_option("--geometry", modes_args.geometry_path, "geometry file")->required();
    modes->add_option("--materials", modes_args.materials_path, "material table");
    modes->add_option("--n-modes", modes_args.n_modes, "number of modes")->check(CLI::Range(1, 409600));
    modes->add_option("--spacing", modes_args.spacing, "grid spacing, e.g. 0.5mm")->required();
    modes->add_option("--bands", modes_args.bands_spec, "low:high:label[,...] frequency bands");
    modes->add_option("--tolerance", modes_args.tolerance, "eigenvalue residual tolerance");
    modes->add_option("--out", modes_args.out_dir, "output directory")->required();

    LossArgs loss_args;
    auto* loss = app.add_subcommand("loss", "energy-participation loss budget");
    loss->add_option("--field", loss_args.field_path, "field grid file")->required();
    loss->add_option("--materials", loss_args.materials_path, "material table");
    loss->add_option("--channels", loss_args.channels_path, "channel declarations")->required();
    loss->add_option("--frequency", loss_args.frequency, "mode frequency (defaults to grid metadata)");
    loss->add_option("--report", loss_args.report_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    loss->add_option("--t1-band", loss_args.t1_band, "lo:hi:count frequency sweep for T1 bounds");
    loss->add_option("--out", loss_args.out_dir, "output directory")->required();

    ReadoutArgs readout_args;
    auto* readout = app.add_subcommand("readout", "IQ-shot readout error analysis");
    readout->add_option("--shots", readout_args.shots_path, "shot CSV file or directory");
    readout->add_option("--t1", readout_args.t1_path, "qubit_id,t1_s overrides");
    readout->add_option("--synth", readout_args.synth_path, "generate shots from a truth file");
    readout->add_option("--report", readout_args.report_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    readout->add_option("--out", readout_args.out_dir, "output directory")->required();

    CoherenceArgs coherence_args;
    auto* coherence = app.add_subcommand("coherence", "coherence fits and statistics");
    coherence->add_option("--wafer", coherence_args.wafer_path, "wafer map CSV")->required();
    coherence->add_option("--decays", coherence_args.decays_manifest, "decay manifest CSV");
    coherence->add_option("--r2", coherence_args.r2_threshold, "R^2 acceptance threshold");
    coherence->add_option("--bootstrap", coherence_args.bootstrap_spec,
                          "sizes=2:5:10,resamples=2000,conf=50:90:99[,statistic=..][,kind=t1|t2e]");
    coherence->add_option("--pearson", coherence_args.pearson_spec,
                          "observable=..[,fraction=..][,resamples=..]");
    coherence->add_option("--report", coherence_args.out_dir, "output directory")->required();

    ThermalArgs thermal_args;
    auto* thermal = app.add_subcommand("thermal", "fridge heat loads and temperatures");
    thermal->add_option("--payload", thermal_args.payload_path, "payload file");
    thermal->add_option("--mode", thermal_args.mode_preset,
                        "bundled preset: high_throughput|qpu_mode");
    thermal->add_option("--report", thermal_args.report_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    thermal->add_option("--out", thermal_args.out_dir, "output directory")->required();

    PipelineArgs pipeline_args;
    auto* pipeline = app.add_subcommand("pipeline", "run several stages from one config");
    pipeline->add_option("--config", pipeline_args.config_path, "pipeline config file")->required();
    pipeline->add_option("--out", pipeline_args.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage error
    }

    if (!seed_text.empty()) {
        try {
            global.seed = std::stoull(seed_text);
            global.seed_fixed = true;
        } catch (const std::exception&) {
            std::cerr << "error: --seed must be an unsigned integer\n";
            return 2;
        }
    } else {
        std::random_device rd;
        global.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        global.seed_fixed = false;
        std::cerr << "note: no --seed given; using entropy seed " << global.seed
                  << " (recorded in the manifest)\n";
    }

    try {
        if (modes->parsed()) return run_modes(modes_args, global);
        if (loss->parsed()) return run_loss(loss_args, global);
        if (readout->parsed()) return run_readout(readout_args, global);
        if (coherence->parsed()) return run_coherence(coherence_args, global);
        if (thermal->parsed()) return run_thermal(thermal_args, global);
        if (pipeline->parsed()) return run_pipeline(pipeline_args, global);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

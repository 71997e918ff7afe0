#include "qpack/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qpack/error.hpp"
#include "qpack/geometry.hpp"
#include "qpack/text_util.hpp"

namespace qpack {

namespace {
constexpr const char* kStageLabels[kStageCount] = {"PT1", "PT2", "STL", "CLD", "MXC"};
}

const char* stage_label(StageName s) { return kStageLabels[static_cast<int>(s)]; }

StageName stage_from_label(const std::string& label) {
    for (int i = 0; i < kStageCount; ++i)
        if (label == kStageLabels[i]) return static_cast<StageName>(i);
    fail("unknown stage '" + label + "' (expected PT1|PT2|STL|CLD|MXC)");
}

const char* line_kind_label(LineKind k) {
    switch (k) {
        case LineKind::drive: return "drive";
        case LineKind::readout_in: return "readout_in";
        case LineKind::readout_out: return "readout_out";
        case LineKind::pump: return "pump";
    }
    return "?";
}

LineKind line_kind_from_label(const std::string& label) {
    if (label == "drive") return LineKind::drive;
    if (label == "readout_in") return LineKind::readout_in;
    if (label == "readout_out") return LineKind::readout_out;
    if (label == "pump") return LineKind::pump;
    fail("unknown line kind '" + label + "'");
}

void CoolingCurve::validate() const {
    if (kind == Kind::quadratic) {
        require(a > 0.0, "quadratic cooling curve needs a > 0");
        require(t0 > 0.0, "quadratic cooling curve needs t0 > 0");
        return;
    }
    require(points.size() >= 2, "tabulated cooling curve needs >= 2 points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        require(points[i].first > 0.0, "curve temperatures must be > 0");
        require(points[i].second >= 0.0, "curve powers must be >= 0");
        if (i > 0) {
            require(points[i].first > points[i - 1].first, "curve temperatures must ascend");
            require(points[i].second > points[i - 1].second,
                    "cooling power must strictly increase with temperature");
        }
    }
}

double CoolingCurve::base_temperature_k() const {
    return kind == Kind::quadratic ? t0 : points.front().first;
}

double CoolingCurve::max_power_w() const {
    return kind == Kind::quadratic ? std::numeric_limits<double>::infinity()
                                   : points.back().second;
}

double CoolingCurve::power_at(double t_k) const {
    if (kind == Kind::quadratic) return a * (t_k * t_k - t0 * t0);
    if (t_k <= points.front().first) return points.front().second;
    if (t_k >= points.back().first) return points.back().second;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (t_k <= points[i].first) {
            const auto& [t_lo, w_lo] = points[i - 1];
            const auto& [t_hi, w_hi] = points[i];
            return w_lo + (w_hi - w_lo) * (t_k - t_lo) / (t_hi - t_lo);
        }
    }
    return points.back().second;
}

double CoolingCurve::solve_temperature(double load_w) const {
    validate();
    require(load_w >= 0.0, "stage load must be >= 0");
    if (load_w == 0.0) return base_temperature_k();
    require(load_w <= max_power_w(),
            "insufficient cooling power: load " + format_double(load_w) + " W exceeds curve range");
    double lo = base_temperature_k();
    double hi = kind == Kind::quadratic ? std::max(2.0 * t0, std::sqrt(load_w / a + t0 * t0) * 2.0)
                                        : points.back().first;
    // Bisection to 0.1 mK on the monotone curve.
    while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        if (power_at(mid) < load_w)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

void LineSpec::validate() const {
    require(count >= 0, "line count must be >= 0");
    require(signal_power_at_device_w >= 0.0, "device power must be >= 0");
    double total = 0.0;
    for (double a_db : attenuation_db) {
        require(a_db >= 0.0, "attenuations must be >= 0");
        total += a_db;
    }
    require(std::abs(total - attenuation_budget_db) <= 1e-9,
            std::string(line_kind_label(kind)) + " line: attenuation schedule (" +
                format_double(total) + " dB) does not match the declared budget (" +
                format_double(attenuation_budget_db) + " dB)");
    for (double w : passive_w_per_line) require(w >= 0.0, "passive loads must be >= 0");
}

std::array<double, kStageCount> dissipative_loads(const std::vector<LineSpec>& lines) {
    std::array<double, kStageCount> out{};
    for (const auto& line : lines) {
        line.validate();
        if (line.count == 0 || line.signal_power_at_device_w == 0.0) continue;
        // Room-temperature input implied by the delivered power and the
        // total attenuation, walked downward stage by stage.
        double power = line.signal_power_at_device_w *
                       std::pow(10.0, line.attenuation_budget_db / 10.0);
        for (int s = 0; s < kStageCount; ++s) {
            const double a_db = line.attenuation_db[static_cast<std::size_t>(s)];
            if (a_db <= 0.0) continue;
            const double through = std::pow(10.0, -a_db / 10.0);
            out[static_cast<std::size_t>(s)] += line.count * power * (1.0 - through);
            power *= through;
        }
    }
    return out;
}

double line_conservation_residual(const LineSpec& line) {
    const double input =
        line.signal_power_at_device_w * std::pow(10.0, line.attenuation_budget_db / 10.0);
    if (input == 0.0) return 0.0;
    double power = input;
    double dissipated = 0.0;
    for (int s = 0; s < kStageCount; ++s) {
        const double a_db = line.attenuation_db[static_cast<std::size_t>(s)];
        if (a_db <= 0.0) continue;
        const double through = std::pow(10.0, -a_db / 10.0);
        dissipated += power * (1.0 - through);
        power *= through;
    }
    return std::abs(input - dissipated - line.signal_power_at_device_w) / input;
}

LoadReport aggregate_loads(const std::vector<LineSpec>& lines,
                           const std::vector<ActiveComponent>& active) {
    LoadReport report;
    const auto dissipative = dissipative_loads(lines);
    for (int s = 0; s < kStageCount; ++s)
        report.stages[static_cast<std::size_t>(s)].dissipative_w =
            dissipative[static_cast<std::size_t>(s)];
    for (const auto& line : lines)
        for (int s = 0; s < kStageCount; ++s)
            report.stages[static_cast<std::size_t>(s)].passive_w +=
                line.count * line.passive_w_per_line[static_cast<std::size_t>(s)];
    for (const auto& comp : active) {
        require(comp.count >= 0 && comp.power_w_each >= 0.0,
                "active component '" + comp.name + "' must have non-negative count and power");
        report.stages[static_cast<std::size_t>(comp.stage)].active_w +=
            comp.count * comp.power_w_each;
    }
    return report;
}

void solve_temperatures(LoadReport& report, const std::array<CoolingCurve, kStageCount>& curves) {
    for (int s = 0; s < kStageCount; ++s)
        report.temperature_k[static_cast<std::size_t>(s)] =
            curves[static_cast<std::size_t>(s)].solve_temperature(
                report.stages[static_cast<std::size_t>(s)].total_w());
    for (int s = 1; s < kStageCount; ++s)
        require(report.temperature_k[static_cast<std::size_t>(s)] <
                    report.temperature_k[static_cast<std::size_t>(s - 1)],
                "solved temperatures are not monotone cold-to-warm; check curve configuration");
    report.solved = true;
}

double headroom(const LoadReport& report, double budget_w) {
    require(report.solved, "headroom needs a solved report");
    require(budget_w > 0.0, "budget must be > 0");
    return report.stages[static_cast<std::size_t>(StageName::MXC)].total_w() / budget_w;
}

double differential_contraction(double radius_m, double contraction_a, double contraction_b) {
    require(radius_m >= 0.0, "radius must be >= 0");
    require(contraction_a >= 0.0 && contraction_a <= 0.05, "contraction_a must lie in [0, 0.05]");
    require(contraction_b >= 0.0 && contraction_b <= 0.05, "contraction_b must lie in [0, 0.05]");
    return std::abs(contraction_a - contraction_b) * radius_m;
}

double parse_power_w(const std::string& s, const std::string& context) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &pos);
    } catch (const std::exception&) {
        fail("malformed power '" + s + "' in " + context);
    }
    const std::string unit = trim(s.substr(pos));
    if (unit == "W") return value;
    if (unit == "mW") return value * 1e-3;
    if (unit == "uW") return value * 1e-6;
    if (unit == "nW") return value * 1e-9;
    if (unit == "pW") return value * 1e-12;
    if (unit == "dBm") return 1e-3 * std::pow(10.0, value / 10.0);
    fail("unknown power unit '" + unit + "' in " + context);
}

namespace {

std::array<double, kStageCount> parse_stage_map(const std::string& value,
                                                const std::string& context) {
    // "PT2:20,CLD:20,MXC:20"
    std::array<double, kStageCount> out{};
    for (const auto& item : split(value, ',')) {
        if (item.empty()) continue;
        auto colon = item.find(':');
        require(colon != std::string::npos, "expected STAGE:value entries in " + context);
        const StageName stage = stage_from_label(trim(item.substr(0, colon)));
        out[static_cast<std::size_t>(stage)] = parse_double(trim(item.substr(colon + 1)), context);
    }
    return out;
}

}  // namespace

FridgePayload parse_payload(const std::string& text, const std::string& origin) {
    FridgePayload payload;
    std::array<bool, kStageCount> curve_set{};
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = strip_comment(raw);
        if (line.empty()) continue;
        const std::string context = origin + ":" + std::to_string(lineno);
        auto t = tokens(line);
        const std::string& key = t[0];

        if (key == "name") {
            require(t.size() >= 3 && t[1] == "=", "expected 'name = <text>' in " + context);
            payload.name = t[2];
        } else if (key == "line") {
            require(t.size() >= 2, "line needs a kind in " + context);
            LineSpec spec;
            spec.kind = line_kind_from_label(t[1]);
            for (std::size_t i = 2; i < t.size(); ++i) {
                auto eq = t[i].find('=');
                require(eq != std::string::npos, "expected key=value tokens in " + context);
                const std::string k = t[i].substr(0, eq);
                const std::string v = t[i].substr(eq + 1);
                if (k == "count")
                    spec.count = static_cast<int>(parse_long(v, context));
                else if (k == "device_power")
                    spec.signal_power_at_device_w = parse_power_w(v, context);
                else if (k == "budget") {
                    require(v.size() > 2 && v.substr(v.size() - 2) == "dB",
                            "budget needs a dB suffix in " + context);
                    spec.attenuation_budget_db = parse_double(v.substr(0, v.size() - 2), context);
                } else if (k == "atten")
                    spec.attenuation_db = parse_stage_map(v, context);
                else
                    fail("unknown line key '" + k + "' in " + context);
            }
            spec.validate();
            payload.lines.push_back(spec);
        } else if (key == "passive") {
            // passive <kind> <stage> <W per line>
            require(t.size() == 4, "expected 'passive <kind> <stage> <watts>' in " + context);
            const LineKind kind = line_kind_from_label(t[1]);
            const StageName stage = stage_from_label(t[2]);
            const double w = parse_double(t[3], context);
            bool found = false;
            for (auto& spec : payload.lines)
                if (spec.kind == kind) {
                    spec.passive_w_per_line[static_cast<std::size_t>(stage)] = w;
                    found = true;
                }
            require(found, "passive row references undeclared line kind in " + context);
        } else if (key == "active") {
            // active <name> <stage> <W each> count=<n>
            require(t.size() >= 4, "expected 'active <name> <stage> <watts> [count=n]' in " + context);
            ActiveComponent comp;
            comp.name = t[1];
            comp.stage = stage_from_label(t[2]);
            comp.power_w_each = parse_double(t[3], context);
            for (std::size_t i = 4; i < t.size(); ++i) {
                auto eq = t[i].find('=');
                require(eq != std::string::npos && t[i].substr(0, eq) == "count",
                        "expected count=<n> in " + context);
                comp.count = static_cast<int>(parse_long(t[i].substr(eq + 1), context));
            }
            payload.active.push_back(comp);
        } else if (key == "curve") {
            // curve MXC quadratic a=.. t0=..   |   curve PT1 table T:W,T:W,...
            require(t.size() >= 3, "expected 'curve <stage> <quadratic|table> ...' in " + context);
            const StageName stage = stage_from_label(t[1]);
            CoolingCurve curve;
            if (t[2] == "quadratic") {
                curve.kind = CoolingCurve::Kind::quadratic;
                for (std::size_t i = 3; i < t.size(); ++i) {
                    auto eq = t[i].find('=');
                    require(eq != std::string::npos, "expected key=value in " + context);
                    const std::string k = t[i].substr(0, eq);
                    const double v = parse_double(t[i].substr(eq + 1), context);
                    if (k == "a") curve.a = v;
                    else if (k == "t0") curve.t0 = v;
                    else fail("unknown quadratic curve key '" + k + "' in " + context);
                }
            } else if (t[2] == "table") {
                curve.kind = CoolingCurve::Kind::table;
                require(t.size() == 4, "table curve needs one T:W,... token in " + context);
                for (const auto& item : split(t[3], ',')) {
                    auto colon = item.find(':');
                    require(colon != std::string::npos, "expected T:W pairs in " + context);
                    curve.points.emplace_back(parse_double(item.substr(0, colon), context),
                                              parse_double(item.substr(colon + 1), context));
                }
            } else {
                fail("curve kind must be quadratic|table in " + context);
            }
            curve.validate();
            payload.curves[static_cast<std::size_t>(stage)] = curve;
            curve_set[static_cast<std::size_t>(stage)] = true;
        } else if (key == "mxc_budget") {
            require(t.size() >= 3 && t[1] == "=", "expected 'mxc_budget = <power>' in " + context);
            std::string v = t[2];
            if (t.size() >= 4) v += " " + t[3];
            payload.mxc_budget_w = parse_power_w(v, context);
        } else if (key == "contraction") {
            // contraction radius=38.1mm a=Al:0.00415 b=sapphire:0.00080
            for (std::size_t i = 1; i < t.size(); ++i) {
                auto eq = t[i].find('=');
                require(eq != std::string::npos, "expected key=value in " + context);
                const std::string k = t[i].substr(0, eq);
                const std::string v = t[i].substr(eq + 1);
                if (k == "radius") {
                    payload.contraction_radius_m = parse_length(v, context);
                } else if (k == "a" || k == "b") {
                    auto colon = v.find(':');
                    require(colon != std::string::npos, "expected material:value in " + context);
                    const std::string mat = v.substr(0, colon);
                    const double val = parse_double(v.substr(colon + 1), context);
                    if (k == "a") {
                        payload.contraction_material_a = mat;
                        payload.contraction_a = val;
                    } else {
                        payload.contraction_material_b = mat;
                        payload.contraction_b = val;
                    }
                } else {
                    fail("unknown contraction key '" + k + "' in " + context);
                }
            }
        } else {
            fail("unknown payload key '" + key + "' in " + context);
        }
    }
    for (int s = 0; s < kStageCount; ++s)
        require(curve_set[static_cast<std::size_t>(s)],
                std::string("payload missing cooling curve for stage ") +
                    kStageLabels[s] + " (" + origin + ")");
    require(!payload.lines.empty(), "payload declares no lines (" + origin + ")");
    return payload;
}

FridgePayload load_payload(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open payload file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_payload(buf.str(), path);
}

}  // namespace qpack

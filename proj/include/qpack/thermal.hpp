#pragma once

#include <array>
#include <string>
#include <vector>

namespace qpack {

/// Refrigerator stages, warm to cold: the two pulse-tube plates, the still
/// plate, the cold plate, and the mixing chamber plate.
enum class StageName { PT1 = 0, PT2 = 1, STL = 2, CLD = 3, MXC = 4 };
inline constexpr int kStageCount = 5;

const char* stage_label(StageName s);
StageName stage_from_label(const std::string& label);

/// Monotone cooling-power curve Q(T). Either the quadratic form
/// Q = a * (T^2 - T0^2) (mixing chamber) or a tabulated piecewise-linear map
/// (pulse-tube stages). Curves are configuration calibrated to the operating
/// points of the modeled refrigerator, not first-principles predictions.
struct CoolingCurve {
    enum class Kind { quadratic, table };
    Kind kind = Kind::quadratic;
    double a = 0.0;   // W/K^2
    double t0 = 0.0;  // K, zero-load temperature for the quadratic form
    std::vector<std::pair<double, double>> points;  // (T ascending, W strictly increasing)

    void validate() const;
    double base_temperature_k() const;
    double max_power_w() const;  // table form: last point; quadratic: unbounded
    double power_at(double temperature_k) const;
    /// Bisection to 0.1 mK. Throws "insufficient cooling power" when the load
    /// exceeds the curve range.
    double solve_temperature(double load_w) const;
};

enum class LineKind { drive, readout_in, readout_out, pump };

const char* line_kind_label(LineKind k);
LineKind line_kind_from_label(const std::string& label);

/// One family of identical wiring lines.
struct LineSpec {
    LineKind kind = LineKind::drive;
    int count = 0;
    double attenuation_budget_db = 0.0;             // declared total
    std::array<double, kStageCount> attenuation_db{};  // placement per stage
    std::array<double, kStageCount> passive_w_per_line{};  // conduction loads (configured)
    double signal_power_at_device_w = 0.0;  // continuous-equivalent tone power

    /// Attenuations non-negative and summing to the declared budget.
    void validate() const;
};

struct ActiveComponent {
    std::string name;
    StageName stage = StageName::PT2;
    double power_w_each = 0.0;
    int count = 1;
};

struct StageLoads {
    double passive_w = 0.0;
    double active_w = 0.0;
    double dissipative_w = 0.0;
    double total_w() const { return passive_w + active_w + dissipative_w; }
};

struct LoadReport {
    std::array<StageLoads, kStageCount> stages;
    std::array<double, kStageCount> temperature_k{};
    bool solved = false;
};

/// Heat dumped per stage by the signal tones: an attenuator of A dB passes
/// 10^(-A/10) of its incoming power and dissipates the rest where it sits.
/// Incoming powers are back-computed from the power delivered at the device.
/// Energy is conserved per line: input = delivered + sum of dissipation.
std::array<double, kStageCount> dissipative_loads(const std::vector<LineSpec>& lines);

/// Per-line energy-conservation residual (relative); exercised by tests.
double line_conservation_residual(const LineSpec& line);

LoadReport aggregate_loads(const std::vector<LineSpec>& lines,
                           const std::vector<ActiveComponent>& active);

/// Solve each stage's temperature against its cooling curve (stages are
/// independent in this model). Verifies the solved profile is monotone cold
/// to warm.
void solve_temperatures(LoadReport& report, const std::array<CoolingCurve, kStageCount>& curves);

/// MXC total load over the available cooling budget.
double headroom(const LoadReport& report, double budget_w);

/// Relative travel at radius between two materials with integrated thermal
/// contractions (delta L / L, each in [0, 0.05]). Symmetric and linear in
/// radius.
double differential_contraction(double radius_m, double contraction_a, double contraction_b);

/// A full wiring payload plus solver configuration, parsed from the payload
/// file format (bundled presets: high_throughput, qpu_mode).
struct FridgePayload {
    std::string name;
    std::vector<LineSpec> lines;
    std::vector<ActiveComponent> active;
    std::array<CoolingCurve, kStageCount> curves;
    double mxc_budget_w = 25e-6;

    // Differential-contraction configuration (implementer-sourced integrated
    // contraction values).
    double contraction_radius_m = 0.0;
    std::string contraction_material_a, contraction_material_b;
    double contraction_a = 0.0, contraction_b = 0.0;
};

FridgePayload load_payload(const std::string& path);
FridgePayload parse_payload(const std::string& text, const std::string& origin);

/// Parse "<value><unit>" power: W/mW/uW/nW/pW or dBm.
double parse_power_w(const std::string& s, const std::string& context);

}  // namespace qpack

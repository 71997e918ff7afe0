#include "qpack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qpack/constants.hpp"
#include "qpack/error.hpp"
#include "qpack/text_util.hpp"

namespace qpack {

void CavityGeometry::validate() const {
    require(std::isfinite(radius) && radius > 0.0, "cavity radius must be > 0");
    require(std::isfinite(height) && height > 0.0, "cavity height must be > 0");
    require(std::isfinite(wafer_thickness) && wafer_thickness >= 0.0 && wafer_thickness < height,
            "wafer_thickness must satisfy 0 <= t < height");
    require(std::isfinite(wafer_permittivity) && wafer_permittivity >= 1.0,
            "wafer_permittivity must be >= 1");
    for (std::size_t i = 0; i < pillars.size(); ++i) {
        const auto& p = pillars[i];
        require(std::isfinite(p.center.x) && std::isfinite(p.center.y), "pillar center must be finite");
        require(std::isfinite(p.radius) && p.radius > 0.0, "pillar radius must be > 0");
        const double r = std::hypot(p.center.x, p.center.y);
        require(r + p.radius < radius,
                "pillar " + std::to_string(i) + " is not strictly inside the cavity disc");
        for (std::size_t j = i + 1; j < pillars.size(); ++j) {
            const auto& q = pillars[j];
            const double d = std::hypot(p.center.x - q.center.x, p.center.y - q.center.y);
            require(d > p.radius + q.radius, "pillars " + std::to_string(i) + " and " +
                                                 std::to_string(j) + " overlap");
        }
    }
}

double CavityGeometry::effective_permittivity() const {
    if (wafer_thickness <= 0.0) return 1.0;
    return height / ((height - wafer_thickness) + wafer_thickness / wafer_permittivity);
}

double CavityGeometry::model_ceiling_hz() const { return kSpeedOfLight / (2.0 * height); }

std::vector<Pillar> build_pillar_lattice(double cavity_radius, const PillarLatticeSpec& spec) {
    require(spec.pitch > 0.0, "lattice pitch must be > 0");
    require(spec.pillar_radius > 0.0, "lattice pillar radius must be > 0");
    require(spec.margin >= 0.0, "lattice margin must be >= 0");
    const double reach = cavity_radius - spec.pillar_radius - spec.margin;
    require(reach > 0.0, "lattice does not fit: radius - pillar_radius - margin <= 0");

    const double dy = spec.pitch * std::sqrt(3.0) / 2.0;
    const int nrows = static_cast<int>(std::floor(reach / dy));
    const int ncols = static_cast<int>(std::floor(reach / spec.pitch)) + 1;

    std::vector<Pillar> sites;
    for (int row = -nrows; row <= nrows; ++row) {
        const double y = row * dy;
        const double offset = (row % 2 != 0) ? spec.pitch / 2.0 : 0.0;
        for (int col = -ncols; col <= ncols; ++col) {
            const double x = col * spec.pitch + offset;
            if (std::hypot(x, y) <= reach) sites.push_back({{x, y}, spec.pillar_radius});
        }
    }
    std::sort(sites.begin(), sites.end(), [](const Pillar& a, const Pillar& b) {
        if (a.center.y != b.center.y) return a.center.y < b.center.y;
        return a.center.x < b.center.x;
    });

    std::set<int> skip(spec.skip.begin(), spec.skip.end());
    for (int idx : spec.skip)
        require(idx >= 0 && idx < static_cast<int>(sites.size()),
                "skip index " + std::to_string(idx) + " outside lattice (0.." +
                    std::to_string(sites.size() ? sites.size() - 1 : 0) + ")");

    std::vector<Pillar> out;
    for (std::size_t i = 0; i < sites.size(); ++i)
        if (!skip.count(static_cast<int>(i))) out.push_back(sites[i]);
    return out;
}

namespace {

// Splits "13mm" / "13 mm" / "1.7e-3m" into value and unit suffix.
bool split_quantity(const std::string& s, double& value, std::string& unit) {
    std::size_t pos = 0;
    try {
        value = std::stod(s, &pos);
    } catch (const std::exception&) {
        return false;
    }
    unit = trim(s.substr(pos));
    return true;
}

double length_to_si(double value, const std::string& unit, const std::string& context) {
    if (unit == "m") return value;
    if (unit == "mm") return value * 1e-3;
    if (unit == "um" || unit == "µm") return value * 1e-6;
    if (unit == "nm") return value * 1e-9;
    if (unit.empty()) fail("length requires an explicit unit in " + context);
    fail("unknown length unit '" + unit + "' in " + context);
}

}  // namespace

double parse_length(const std::string& s, const std::string& context) {
    double value = 0.0;
    std::string unit;
    if (!split_quantity(s, value, unit)) fail("malformed length '" + s + "' in " + context);
    return length_to_si(value, unit, context);
}

GeometryFile parse_geometry(const std::string& text, const std::string& origin) {
    GeometryFile out;
    bool have_radius = false, have_height = false;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = strip_comment(raw);
        if (line.empty()) continue;
        const std::string context = origin + ":" + std::to_string(lineno);

        auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value' in " + context);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto toks = tokens(value);

        if (key == "radius") {
            out.geometry.radius = parse_length(value, context);
            have_radius = true;
        } else if (key == "height") {
            out.geometry.height = parse_length(value, context);
            have_height = true;
        } else if (key == "wafer_thickness") {
            out.geometry.wafer_thickness = parse_length(value, context);
        } else if (key == "wafer_permittivity") {
            require(!toks.empty(), "missing value in " + context);
            out.geometry.wafer_permittivity = parse_double(toks[0], context);
        } else if (key == "pillar") {
            // Either three quantities with units, or three numbers + one unit.
            require(toks.size() == 3 || toks.size() == 4,
                    "pillar needs 'x y radius' (with units) in " + context);
            double v[3];
            if (toks.size() == 4) {
                for (int i = 0; i < 3; ++i) v[i] = parse_length(toks[i] + toks[3], context);
            } else {
                for (int i = 0; i < 3; ++i) v[i] = parse_length(toks[i], context);
            }
            out.geometry.pillars.push_back({{v[0], v[1]}, v[2]});
        } else if (key == "pillar_lattice") {
            PillarLatticeSpec spec;
            for (const auto& tok : toks) {
                auto kv = tok.find('=');
                if (kv == std::string::npos) fail("expected key=value tokens in " + context);
                const std::string k = tok.substr(0, kv);
                const std::string v = tok.substr(kv + 1);
                if (k == "pitch") spec.pitch = parse_length(v, context);
                else if (k == "radius") spec.pillar_radius = parse_length(v, context);
                else if (k == "margin") spec.margin = parse_length(v, context);
                else if (k == "skip") {
                    for (const auto& s : split(v, ','))
                        if (!s.empty()) spec.skip.push_back(static_cast<int>(parse_long(s, context)));
                } else {
                    fail("unknown pillar_lattice key '" + k + "' in " + context);
                }
            }
            require(have_radius, "pillar_lattice must come after radius in " + context);
            auto pillars = build_pillar_lattice(out.geometry.radius, spec);
            out.geometry.pillars.insert(out.geometry.pillars.end(), pillars.begin(), pillars.end());
        } else if (key == "seam") {
            require(toks.size() == 2, "expected 'seam = name surface=<label>' in " + context);
            SeamSpec seam;
            seam.name = toks[0];
            const std::string& sel = toks[1];
            require(sel.rfind("surface=", 0) == 0, "expected surface=<label> in " + context);
            seam.surface_selector = sel.substr(8);
            out.seams.push_back(seam);
        } else {
            fail("unknown geometry key '" + key + "' in " + context);
        }
    }
    require(have_radius && have_height, "geometry file must declare radius and height (" + origin + ")");
    out.geometry.validate();
    return out;
}

GeometryFile load_geometry(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open geometry file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_geometry(buf.str(), path);
}

}  // namespace qpack

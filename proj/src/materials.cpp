#include "qpack/materials.hpp"

#include <fstream>
#include <sstream>

#include "qpack/error.hpp"
#include "qpack/text_util.hpp"

namespace qpack {

namespace {

struct PropertyInfo {
    MaterialProperty prop;
    const char* name;
    // Unit class: 0 dimensionless, 1 length, 2 resistance, 3 conductance/length
    int unit_class;
};

constexpr PropertyInfo kProps[] = {
    {MaterialProperty::relative_permittivity, "relative_permittivity", 0},
    {MaterialProperty::loss_tangent, "loss_tangent", 0},
    {MaterialProperty::surface_resistance, "surface_resistance", 2},
    {MaterialProperty::penetration_depth, "penetration_depth", 1},
    {MaterialProperty::oxide_thickness, "oxide_thickness", 1},
    {MaterialProperty::oxide_permittivity, "oxide_permittivity", 0},
    {MaterialProperty::seam_conductance, "seam_conductance", 3},
};

int unit_class_of(MaterialProperty p) {
    for (const auto& info : kProps)
        if (info.prop == p) return info.unit_class;
    return 0;
}

}  // namespace

const char* property_name(MaterialProperty p) {
    for (const auto& info : kProps)
        if (info.prop == p) return info.name;
    return "?";
}

std::optional<MaterialProperty> property_from_name(const std::string& name) {
    for (const auto& info : kProps)
        if (name == info.name) return info.prop;
    return std::nullopt;
}

double convert_unit(double value, const std::string& unit, MaterialProperty prop,
                    const std::string& context) {
    const int cls = unit_class_of(prop);
    switch (cls) {
        case 0:
            if (unit.empty() || unit == "-" || unit == "1")
                return value;
            fail("property " + std::string(property_name(prop)) + " is dimensionless, got unit '" +
                 unit + "' in " + context);
        case 1:
            if (unit == "m") return value;
            if (unit == "mm") return value * 1e-3;
            if (unit == "um" || unit == "µm") return value * 1e-6;
            if (unit == "nm") return value * 1e-9;
            fail("unknown length unit '" + unit + "' in " + context);
        case 2:
            if (unit == "Ohm") return value;
            if (unit == "mOhm") return value * 1e-3;
            if (unit == "uOhm" || unit == "µOhm") return value * 1e-6;
            if (unit == "nOhm") return value * 1e-9;
            fail("unknown resistance unit '" + unit + "' in " + context);
        case 3:
            if (unit == "S/m" || unit == "1/Ohm/m") return value;
            fail("unknown conductance unit '" + unit + "' (expected S/m) in " + context);
    }
    fail("unhandled unit class in " + context);
}

void MaterialTable::set(const std::string& material, MaterialProperty prop, double value_si) {
    if (prop == MaterialProperty::loss_tangent) {
        require(value_si >= 0.0, "loss_tangent of '" + material + "' must be >= 0");
    } else {
        require(value_si > 0.0, std::string(property_name(prop)) + " of '" + material +
                                    "' must be > 0 (got " + format_double(value_si) + ")");
    }
    records_[material].values[prop] = value_si;
}

double MaterialTable::get(const std::string& material, MaterialProperty prop) const {
    auto it = records_.find(material);
    if (it == records_.end()) fail("material '" + material + "' absent from table");
    auto pit = it->second.values.find(prop);
    if (pit == it->second.values.end())
        fail("property absent: '" + material + "." + property_name(prop) + "'");
    return pit->second;
}

std::optional<double> MaterialTable::maybe(const std::string& material,
                                           MaterialProperty prop) const {
    auto it = records_.find(material);
    if (it == records_.end()) return std::nullopt;
    auto pit = it->second.values.find(prop);
    if (pit == it->second.values.end()) return std::nullopt;
    return pit->second;
}

std::vector<std::string> MaterialTable::material_names() const {
    std::vector<std::string> out;
    out.reserve(records_.size());
    for (const auto& kv : records_) out.push_back(kv.first);
    return out;
}

MaterialTable parse_material_table(const std::string& text, const std::string& origin) {
    MaterialTable table;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = strip_comment(raw);
        if (line.empty()) continue;
        const std::string context = origin + ":" + std::to_string(lineno);

        auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'material.property = value unit' in " + context);
        const std::string lhs = trim(line.substr(0, eq));
        const std::string rhs = trim(line.substr(eq + 1));

        auto dot = lhs.rfind('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == lhs.size())
            fail("expected 'material.property' on left side in " + context);
        const std::string material = trim(lhs.substr(0, dot));
        const std::string prop_name = trim(lhs.substr(dot + 1));
        auto prop = property_from_name(prop_name);
        if (!prop) fail("unknown property '" + prop_name + "' in " + context);

        auto parts = tokens(rhs);
        if (parts.empty() || parts.size() > 2) fail("expected 'value [unit]' in " + context);
        const double value = parse_double(parts[0], context);
        const std::string unit = parts.size() == 2 ? parts[1] : std::string{};
        table.set(material, *prop, convert_unit(value, unit, *prop, context));
    }
    return table;
}

MaterialTable load_material_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open material table '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_material_table(buf.str(), path);
}

}  // namespace qpack

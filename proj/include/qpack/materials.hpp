#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qpack {

/// Property keys a material may carry. Materials are an open set of optional
/// keys: a PCB laminate has a permittivity and loss tangent, a machined metal
/// has a surface resistance and penetration depth, a joint has a seam
/// conductance. Absent keys are reported as errors on lookup, never defaulted.
enum class MaterialProperty {
    relative_permittivity,  // dimensionless, >= 1 in practice
    loss_tangent,           // dimensionless, >= 0
    surface_resistance,     // Ohm
    penetration_depth,      // m
    oxide_thickness,        // m
    oxide_permittivity,     // dimensionless
    seam_conductance,       // 1/(Ohm*m), i.e. S/m
};

const char* property_name(MaterialProperty p);
std::optional<MaterialProperty> property_from_name(const std::string& name);

struct MaterialRecord {
    std::map<MaterialProperty, double> values;

    bool has(MaterialProperty p) const { return values.count(p) > 0; }
};

/// Named material properties loaded from a line-oriented text file:
///
///     # comment
///     Al.penetration_depth = 50 nm
///     Rogers.relative_permittivity = 2.2 -
///
/// Unit strings are mandatory for dimensional properties and converted to SI
/// on load. Immutable after construction.
class MaterialTable {
public:
    MaterialTable() = default;

    /// Insert one property value (SI units). Validates positivity.
    void set(const std::string& material, MaterialProperty prop, double value_si);

    /// Strict lookup: throws Error when the material or the property is absent.
    double get(const std::string& material, MaterialProperty prop) const;

    std::optional<double> maybe(const std::string& material, MaterialProperty prop) const;

    bool has_material(const std::string& material) const { return records_.count(material) > 0; }

    std::vector<std::string> material_names() const;

    const std::map<std::string, MaterialRecord>& records() const { return records_; }

private:
    std::map<std::string, MaterialRecord> records_;
};

/// Parse `material.property = value unit` lines. Throws Error on malformed
/// lines, unknown property names, missing/incompatible units, or values that
/// violate the positivity invariants.
MaterialTable load_material_table(const std::string& path);
MaterialTable parse_material_table(const std::string& text, const std::string& origin);

/// Convert `value` expressed in `unit` to SI for the given property.
/// Dimensionless properties accept "-", "" or "1".
double convert_unit(double value, const std::string& unit, MaterialProperty prop,
                    const std::string& context);

}  // namespace qpack

#include "qpack/field_grid.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qpack/constants.hpp"
#include "qpack/error.hpp"
#include "qpack/report.hpp"
#include "qpack/text_util.hpp"

namespace qpack {

int FieldGrid::region_index(const std::string& name) const {
    for (std::size_t i = 0; i < regions.size(); ++i)
        if (regions[i].name == name) return static_cast<int>(i);
    return -1;
}

int FieldGrid::surface_index(const std::string& name) const {
    for (std::size_t i = 0; i < surface_names.size(); ++i)
        if (surface_names[i] == name) return static_cast<int>(i);
    return -1;
}

const SeamPath* FieldGrid::find_seam(const std::string& name) const {
    for (const auto& s : seams)
        if (s.name == name) return &s;
    return nullptr;
}

void FieldGrid::validate() const {
    require(dimensionality == 2 || dimensionality == 3, "dimensionality must be 2 or 3");
    const std::size_t n = region.size();
    require(coords.size() == n && measure.size() == n && e_field.size() == n &&
                h_field.size() == n,
            "cell arrays must have identical lengths");
    for (std::size_t i = 0; i < n; ++i) {
        require(std::isfinite(measure[i]) && measure[i] > 0.0,
                "cell_measure must be > 0 (cell " + std::to_string(i) + ")");
        require(region[i] < regions.size(), "region id out of range (cell " + std::to_string(i) + ")");
    }
    for (std::size_t b = 0; b < boundary.size(); ++b) {
        const auto& bc = boundary[b];
        require(bc.cell >= 0 && static_cast<std::size_t>(bc.cell) < n,
                "boundary entry " + std::to_string(b) + " references missing cell");
        require(bc.surface < surface_names.size(),
                "boundary entry " + std::to_string(b) + " has unknown surface id");
        require(std::isfinite(bc.area) && bc.area > 0.0,
                "boundary area must be > 0 (entry " + std::to_string(b) + ")");
        const double mag = std::sqrt(bc.normal[0] * bc.normal[0] + bc.normal[1] * bc.normal[1] +
                                     bc.normal[2] * bc.normal[2]);
        require(std::abs(mag - 1.0) < 1e-9,
                "boundary normal must be unit magnitude (entry " + std::to_string(b) + ")");
    }
    for (const auto& seam : seams)
        for (auto idx : seam.entries)
            require(idx >= 0 && static_cast<std::size_t>(idx) < boundary.size(),
                    "seam '" + seam.name + "' references missing boundary entry");
}

double total_energy(const FieldGrid& grid) {
    double energy = 0.0;
    for (std::size_t i = 0; i < grid.cell_count(); ++i) {
        const double eps_r = grid.regions[grid.region[i]].relative_permittivity;
        require(std::isfinite(eps_r) && eps_r > 0.0,
                "region '" + grid.regions[grid.region[i]].name +
                    "' has no embedded permittivity; cannot compute energy");
        const double u = kEps0 * eps_r * norm_sq(grid.e_field[i]) + kMu0 * norm_sq(grid.h_field[i]);
        energy += 0.5 * u * grid.measure[i];
    }
    return energy;
}

void scale_to_energy(FieldGrid& grid, double target_joules) {
    require(target_joules > 0.0, "target energy must be > 0");
    const double current = total_energy(grid);
    if (current <= 0.0) fail("cannot normalize a zero field");
    const double s = std::sqrt(target_joules / current);
    for (auto& v : grid.e_field)
        for (auto& c : v) c *= s;
    for (auto& v : grid.h_field)
        for (auto& c : v) c *= s;
}

ModeSolution normalize_energy(const ModeSolution& mode, double target_joules) {
    ModeSolution out = mode;
    scale_to_energy(out.field, target_joules);
    out.stored_energy_j = total_energy(out.field);
    return out;
}

// ---------------------------------------------------------------------------
// Interchange I/O
// ---------------------------------------------------------------------------

namespace {
constexpr const char* kMagic = "qpack-fieldgrid 1";

void put(std::ostream& out, double v) { out << ' ' << format_double(v); }
}  // namespace

void write_field_grid(const FieldGrid& grid, std::ostream& out) {
    out << kMagic << '\n';
    out << "dimensionality " << grid.dimensionality << '\n';
    out << "shape " << grid.shape[0] << ' ' << grid.shape[1] << ' ' << grid.shape[2] << '\n';
    out << "spacing_m " << format_double(grid.spacing[0]) << ' ' << format_double(grid.spacing[1])
        << ' ' << format_double(grid.spacing[2]) << '\n';
    out << "origin_m " << format_double(grid.origin[0]) << ' ' << format_double(grid.origin[1])
        << ' ' << format_double(grid.origin[2]) << '\n';
    out << "units e_field=V/m h_field=A/m measure=m^3 area=m^2\n";
    if (grid.mode_frequency_hz > 0.0)
        out << "mode_frequency_hz " << format_double(grid.mode_frequency_hz) << '\n';

    out << "regions " << grid.regions.size() << '\n';
    for (std::size_t i = 0; i < grid.regions.size(); ++i) {
        out << i << ' ' << grid.regions[i].name << ' ';
        if (std::isfinite(grid.regions[i].relative_permittivity))
            out << format_double(grid.regions[i].relative_permittivity);
        else
            out << '?';
        out << '\n';
    }

    out << "surfaces " << grid.surface_names.size() << '\n';
    for (std::size_t i = 0; i < grid.surface_names.size(); ++i)
        out << i << ' ' << grid.surface_names[i] << '\n';

    out << "cells " << grid.cell_count() << '\n';
    for (std::size_t i = 0; i < grid.cell_count(); ++i) {
        out << grid.coords[i][0] << ' ' << grid.coords[i][1] << ' ' << grid.coords[i][2] << ' '
            << grid.region[i];
        put(out, grid.measure[i]);
        for (const auto* f : {&grid.e_field[i], &grid.h_field[i]})
            for (const auto& c : *f) {
                put(out, c.real());
                put(out, c.imag());
            }
        out << '\n';
    }

    out << "boundary " << grid.boundary.size() << '\n';
    for (const auto& bc : grid.boundary) {
        out << bc.cell;
        for (double nv : bc.normal) put(out, nv);
        put(out, bc.area);
        out << ' ' << bc.surface << '\n';
    }

    out << "seams " << grid.seams.size() << '\n';
    for (const auto& seam : grid.seams) {
        out << seam.name << ' ' << (seam.closed ? "closed" : "open") << ' ' << seam.entries.size();
        for (auto idx : seam.entries) out << ' ' << idx;
        out << '\n';
    }
    out << "end\n";
}

namespace {

std::string next_content_line(std::istream& in, const std::string& origin, int& lineno) {
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = strip_comment(raw);
        if (!line.empty()) return line;
    }
    fail("unexpected end of file in " + origin);
}

}  // namespace

FieldGrid read_field_grid(std::istream& in, const std::string& origin) {
    FieldGrid grid;
    int lineno = 0;
    std::string line = next_content_line(in, origin, lineno);
    require(line == kMagic, "not a qpack field grid: " + origin);

    auto ctx = [&] { return origin + ":" + std::to_string(lineno); };

    std::size_t n_cells = 0, n_boundary = 0, n_seams = 0;
    bool saw_cells = false;
    while (true) {
        line = next_content_line(in, origin, lineno);
        auto t = tokens(line);
        const std::string& key = t[0];
        if (key == "end") break;

        if (key == "dimensionality") {
            require(t.size() == 2, "malformed dimensionality in " + ctx());
            grid.dimensionality = static_cast<int>(parse_long(t[1], ctx()));
        } else if (key == "shape") {
            require(t.size() == 4, "shape needs three extents in " + ctx());
            for (int i = 0; i < 3; ++i) grid.shape[i] = parse_long(t[i + 1], ctx());
        } else if (key == "spacing_m") {
            require(t.size() == 4, "spacing_m needs three values in " + ctx());
            for (int i = 0; i < 3; ++i) grid.spacing[i] = parse_double(t[i + 1], ctx());
        } else if (key == "origin_m") {
            require(t.size() == 4, "origin_m needs three values in " + ctx());
            for (int i = 0; i < 3; ++i) grid.origin[i] = parse_double(t[i + 1], ctx());
        } else if (key == "units") {
            // Fixed SI declaration; presence is what matters.
        } else if (key == "mode_frequency_hz") {
            require(t.size() == 2, "malformed mode_frequency_hz in " + ctx());
            grid.mode_frequency_hz = parse_double(t[1], ctx());
        } else if (key == "regions") {
            const auto count = static_cast<std::size_t>(parse_long(t[1], ctx()));
            grid.regions.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                auto r = tokens(next_content_line(in, origin, lineno));
                require(r.size() == 3, "region row needs 'id name eps_r' in " + ctx());
                const auto id = static_cast<std::size_t>(parse_long(r[0], ctx()));
                require(id < count, "region id out of order in " + ctx());
                grid.regions[id].name = r[1];
                grid.regions[id].relative_permittivity =
                    (r[2] == "?") ? std::nan("") : parse_double(r[2], ctx());
            }
        } else if (key == "surfaces") {
            const auto count = static_cast<std::size_t>(parse_long(t[1], ctx()));
            grid.surface_names.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                auto r = tokens(next_content_line(in, origin, lineno));
                require(r.size() == 2, "surface row needs 'id name' in " + ctx());
                const auto id = static_cast<std::size_t>(parse_long(r[0], ctx()));
                require(id < count, "surface id out of order in " + ctx());
                grid.surface_names[id] = r[1];
            }
        } else if (key == "cells") {
            n_cells = static_cast<std::size_t>(parse_long(t[1], ctx()));
            grid.coords.resize(n_cells);
            grid.region.resize(n_cells);
            grid.measure.resize(n_cells);
            grid.e_field.resize(n_cells);
            grid.h_field.resize(n_cells);
            for (std::size_t i = 0; i < n_cells; ++i) {
                auto r = tokens(next_content_line(in, origin, lineno));
                require(r.size() == 17, "cell row needs 17 fields in " + ctx());
                for (int a = 0; a < 3; ++a)
                    grid.coords[i][a] = static_cast<std::int32_t>(parse_long(r[a], ctx()));
                grid.region[i] = static_cast<std::uint32_t>(parse_long(r[3], ctx()));
                grid.measure[i] = parse_double(r[4], ctx());
                for (int c = 0; c < 3; ++c)
                    grid.e_field[i][c] = Complex(parse_double(r[5 + 2 * c], ctx()),
                                                 parse_double(r[6 + 2 * c], ctx()));
                for (int c = 0; c < 3; ++c)
                    grid.h_field[i][c] = Complex(parse_double(r[11 + 2 * c], ctx()),
                                                 parse_double(r[12 + 2 * c], ctx()));
            }
            saw_cells = true;
        } else if (key == "boundary") {
            n_boundary = static_cast<std::size_t>(parse_long(t[1], ctx()));
            grid.boundary.resize(n_boundary);
            for (std::size_t i = 0; i < n_boundary; ++i) {
                auto r = tokens(next_content_line(in, origin, lineno));
                require(r.size() == 6, "boundary row needs 6 fields in " + ctx());
                grid.boundary[i].cell = parse_long(r[0], ctx());
                for (int a = 0; a < 3; ++a) grid.boundary[i].normal[a] = parse_double(r[1 + a], ctx());
                grid.boundary[i].area = parse_double(r[4], ctx());
                grid.boundary[i].surface = static_cast<std::uint32_t>(parse_long(r[5], ctx()));
            }
        } else if (key == "seams") {
            n_seams = static_cast<std::size_t>(parse_long(t[1], ctx()));
            grid.seams.resize(n_seams);
            for (std::size_t i = 0; i < n_seams; ++i) {
                auto r = tokens(next_content_line(in, origin, lineno));
                require(r.size() >= 3, "seam row needs 'name closed|open count ...' in " + ctx());
                grid.seams[i].name = r[0];
                grid.seams[i].closed = (r[1] == "closed");
                const auto count = static_cast<std::size_t>(parse_long(r[2], ctx()));
                require(r.size() == 3 + count, "seam entry count mismatch in " + ctx());
                grid.seams[i].entries.resize(count);
                for (std::size_t k = 0; k < count; ++k)
                    grid.seams[i].entries[k] = parse_long(r[3 + k], ctx());
            }
        } else {
            fail("unknown field-grid section '" + key + "' in " + ctx());
        }
    }
    require(saw_cells, "field grid has no cells section: " + origin);
    grid.validate();
    return grid;
}

void save_field_grid(const FieldGrid& grid, const std::string& path) {
    std::ostringstream buf;
    write_field_grid(grid, buf);
    atomic_write(path, buf.str());
}

FieldGrid load_field_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open field grid '" + path + "'");
    return read_field_grid(in, path);
}

}  // namespace qpack

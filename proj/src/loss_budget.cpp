#include "qpack/loss_budget.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "qpack/constants.hpp"
#include "qpack/error.hpp"
#include "qpack/text_util.hpp"

namespace qpack {

const char* channel_kind_name(ChannelKind k) {
    switch (k) {
        case ChannelKind::bulk_dielectric: return "bulk_dielectric";
        case ChannelKind::surface_dielectric: return "surface_dielectric";
        case ChannelKind::conductor: return "conductor";
        case ChannelKind::seam: return "seam";
    }
    return "?";
}

ChannelKind channel_kind_from_name(const std::string& name) {
    if (name == "bulk_dielectric") return ChannelKind::bulk_dielectric;
    if (name == "surface_dielectric") return ChannelKind::surface_dielectric;
    if (name == "conductor") return ChannelKind::conductor;
    if (name == "seam") return ChannelKind::seam;
    fail("unknown channel kind '" + name + "'");
}

namespace {

double region_permittivity(const FieldGrid& field, std::uint32_t region_id,
                           const MaterialTable& materials) {
    const GridRegion& r = field.regions[region_id];
    if (std::isfinite(r.relative_permittivity) && r.relative_permittivity > 0.0)
        return r.relative_permittivity;
    auto from_table = materials.maybe(r.name, MaterialProperty::relative_permittivity);
    if (!from_table)
        fail("missing permittivity for region '" + r.name +
             "' (not embedded in grid, not in material table)");
    return *from_table;
}

/// int eps_r |E|^2 dV over all cells (relative permittivity; eps0 cancels in
/// every ratio it appears in).
double dielectric_denominator(const FieldGrid& field, const MaterialTable& materials) {
    double total = 0.0;
    for (std::size_t i = 0; i < field.cell_count(); ++i)
        total += region_permittivity(field, field.region[i], materials) *
                 norm_sq(field.e_field[i]) * field.measure[i];
    return total;
}

double magnetic_volume_integral(const FieldGrid& field) {
    double total = 0.0;
    for (std::size_t i = 0; i < field.cell_count(); ++i)
        total += norm_sq(field.h_field[i]) * field.measure[i];
    return total;
}

bool has_h_field(const FieldGrid& field) {
    for (const auto& h : field.h_field)
        if (norm_sq(h) > 0.0) return true;
    return false;
}

double tangential_h_sq(const Vec3c& h, const std::array<double, 3>& n) {
    Complex hn{0.0, 0.0};
    for (int c = 0; c < 3; ++c) hn += h[c] * n[c];
    const double full = norm_sq(h);
    const double normal_part = std::norm(hn);
    return std::max(0.0, full - normal_part);
}

}  // namespace

double dielectric_participation(const FieldGrid& field, const std::string& region,
                                const MaterialTable& materials) {
    const int idx = field.region_index(region);
    if (idx < 0) fail("unknown region '" + region + "'");
    const double den = dielectric_denominator(field, materials);
    require(den > 0.0, "zero electric energy in grid");
    double num = 0.0;
    for (std::size_t i = 0; i < field.cell_count(); ++i)
        if (field.region[i] == static_cast<std::uint32_t>(idx))
            num += region_permittivity(field, field.region[i], materials) *
                   norm_sq(field.e_field[i]) * field.measure[i];
    return num / den;
}

double surface_dielectric_participation(const FieldGrid& field, const std::string& surface,
                                        double thickness, double oxide_permittivity,
                                        const MaterialTable& materials) {
    const int sid = field.surface_index(surface);
    if (sid < 0) fail("unknown surface '" + surface + "'");
    require(thickness > 0.0, "oxide thickness must be > 0");
    require(oxide_permittivity > 0.0, "oxide permittivity must be > 0");
    const double den = dielectric_denominator(field, materials);
    require(den > 0.0, "zero electric energy in grid");
    double num = 0.0;
    bool seen = false;
    for (const auto& bc : field.boundary) {
        if (bc.surface != static_cast<std::uint32_t>(sid)) continue;
        seen = true;
        num += norm_sq(field.e_field[static_cast<std::size_t>(bc.cell)]) * bc.area;
    }
    require(seen, "surface '" + surface + "' has no boundary samples");
    return thickness * num / den / (oxide_permittivity * oxide_permittivity);
}

double conductor_participation(const FieldGrid& field, const std::string& surface,
                               double penetration_depth) {
    const int sid = field.surface_index(surface);
    if (sid < 0) fail("unknown surface '" + surface + "'");
    require(penetration_depth > 0.0, "penetration depth must be > 0");
    require(has_h_field(field), "grid carries no magnetic field samples");
    const double den = magnetic_volume_integral(field);
    require(den > 0.0, "zero magnetic energy in grid");
    double num = 0.0;
    bool seen = false;
    for (const auto& bc : field.boundary) {
        if (bc.surface != static_cast<std::uint32_t>(sid)) continue;
        seen = true;
        num += tangential_h_sq(field.h_field[static_cast<std::size_t>(bc.cell)], bc.normal) *
               bc.area;
    }
    require(seen, "surface '" + surface + "' has no boundary samples");
    return penetration_depth * num / den;
}

double seam_admittance_path(const FieldGrid& field, const SeamPath& path, double frequency_hz) {
    require(!path.entries.empty(), "seam path is empty");
    require(frequency_hz > 0.0, "seam admittance needs frequency > 0");
    require(has_h_field(field), "grid carries no magnetic field samples");
    const double den = kMu0 * magnetic_volume_integral(field);
    require(den > 0.0, "zero magnetic energy in grid");

    const std::size_t n = path.entries.size();
    auto position = [&](std::size_t k) {
        const auto& bc = field.boundary[static_cast<std::size_t>(path.entries[k])];
        return field.cell_position(static_cast<std::size_t>(bc.cell));
    };
    auto h_at = [&](std::size_t k) -> const Vec3c& {
        const auto& bc = field.boundary[static_cast<std::size_t>(path.entries[k])];
        return field.h_field[static_cast<std::size_t>(bc.cell)];
    };
    auto h_along = [&](std::size_t k, const double (&t)[3]) {
        const auto& h = h_at(k);
        Complex ht{0.0, 0.0};
        for (int c = 0; c < 3; ++c) ht += h[c] * t[c];
        return std::norm(ht);
    };

    double line = 0.0;
    if (path.closed) {
        // Ring on a staircase boundary: node positions wobble around the true
        // curve, so chord lengths overestimate the arc. Integrate in angle
        // around the ring centroid instead (in-plane rings; entries ordered
        // by angle): dl = r dtheta, tangent = z x r_hat.
        require(n >= 3, "closed seam ring needs >= 3 entries");
        double cx = 0.0, cy = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            auto p = position(k);
            cx += p[0];
            cy += p[1];
        }
        cx /= static_cast<double>(n);
        cy /= static_cast<double>(n);
        std::vector<double> theta(n), radius(n);
        for (std::size_t k = 0; k < n; ++k) {
            auto p = position(k);
            theta[k] = std::atan2(p[1] - cy, p[0] - cx);
            radius[k] = std::hypot(p[0] - cx, p[1] - cy);
        }
        auto wrap = [](double a) {
            while (a > kPi) a -= 2.0 * kPi;
            while (a < -kPi) a += 2.0 * kPi;
            return a;
        };
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t prev = (k == 0) ? n - 1 : k - 1;
            const std::size_t next = (k + 1) % n;
            const double dtheta =
                0.5 * (std::abs(wrap(theta[next] - theta[k])) + std::abs(wrap(theta[k] - theta[prev])));
            if (radius[k] <= 0.0) continue;
            auto p = position(k);
            const double rx = (p[0] - cx) / radius[k], ry = (p[1] - cy) / radius[k];
            const double t[3] = {-ry, rx, 0.0};  // z x r_hat
            line += h_along(k, t) * radius[k] * dtheta;
        }
    } else {
        // Open polyline with nodes on the seam: trapezoid over the segments,
        // central-difference tangents.
        require(n >= 2, "open seam path needs >= 2 entries");
        auto h_par_sq = [&](std::size_t k) {
            const std::size_t prev = (k == 0) ? 0 : k - 1;
            const std::size_t next = (k + 1 == n) ? n - 1 : k + 1;
            auto a = position(prev);
            auto b = position(next);
            double t[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
            const double len = std::sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2]);
            if (len <= 0.0) return 0.0;
            for (double& c : t) c /= len;
            return h_along(k, t);
        };
        for (std::size_t k = 0; k + 1 < n; ++k) {
            auto a = position(k);
            auto b = position(k + 1);
            const double dl =
                std::sqrt((b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1]) +
                          (b[2] - a[2]) * (b[2] - a[2]));
            line += 0.5 * (h_par_sq(k) + h_par_sq(k + 1)) * dl;
        }
    }
    return line / (angular(frequency_hz) * den);
}

double seam_admittance(const FieldGrid& field, const std::string& seam_name, double frequency_hz) {
    double total = 0.0;
    bool seen = false;
    for (const auto& path : field.seams) {
        if (path.name != seam_name) continue;
        seen = true;
        total += seam_admittance_path(field, path, frequency_hz);
    }
    if (!seen) fail("unknown seam '" + seam_name + "'");
    return total;
}

void evaluate_channel(LossChannel& channel, const FieldGrid& field, const MaterialTable& materials,
                      double frequency_hz) {
    auto check_dielectric_bounds = [&] {
        require(channel.participation >= 0.0 && channel.participation <= 1.0 + 1e-9,
                "dielectric participation outside [0, 1] for '" + channel.region_or_surface +
                    "'");
    };
    switch (channel.kind) {
        case ChannelKind::bulk_dielectric:
            channel.participation =
                dielectric_participation(field, channel.region_or_surface, materials);
            check_dielectric_bounds();
            break;
        case ChannelKind::surface_dielectric: {
            const double t = materials.get(channel.material, MaterialProperty::oxide_thickness);
            const double eps =
                materials.get(channel.material, MaterialProperty::oxide_permittivity);
            channel.participation = surface_dielectric_participation(
                field, channel.region_or_surface, t, eps, materials);
            check_dielectric_bounds();
            break;
        }
        case ChannelKind::conductor: {
            const double lambda =
                materials.get(channel.material, MaterialProperty::penetration_depth);
            channel.participation =
                conductor_participation(field, channel.region_or_surface, lambda);
            break;
        }
        case ChannelKind::seam:
            channel.admittance = seam_admittance(field, channel.region_or_surface, frequency_hz);
            channel.eval_frequency_hz = frequency_hz;
            break;
    }
}

double q_from_channel(const LossChannel& channel, const MaterialTable& materials,
                      double frequency_hz) {
    require(frequency_hz > 0.0, "frequency must be > 0");
    switch (channel.kind) {
        case ChannelKind::bulk_dielectric:
        case ChannelKind::surface_dielectric: {
            const double tan_delta = materials.get(channel.material, MaterialProperty::loss_tangent);
            require(channel.participation >= 0.0, "channel participation not evaluated");
            if (channel.participation == 0.0 || tan_delta == 0.0)
                return std::numeric_limits<double>::infinity();
            return 1.0 / (channel.participation * tan_delta);
        }
        case ChannelKind::conductor: {
            const double rs = materials.get(channel.material, MaterialProperty::surface_resistance);
            const double lambda =
                materials.get(channel.material, MaterialProperty::penetration_depth);
            if (channel.participation == 0.0) return std::numeric_limits<double>::infinity();
            return angular(frequency_hz) * kMu0 * lambda / (rs * channel.participation);
        }
        case ChannelKind::seam: {
            const double g = materials.get(channel.material, MaterialProperty::seam_conductance);
            double y = channel.admittance;
            // Admittance carries an explicit 1/omega; rescale from the
            // evaluation frequency when rating the channel elsewhere.
            if (channel.eval_frequency_hz > 0.0 && channel.eval_frequency_hz != frequency_hz)
                y *= channel.eval_frequency_hz / frequency_hz;
            if (y == 0.0) return std::numeric_limits<double>::infinity();
            return g / y;
        }
    }
    fail("unhandled channel kind");
}

QBudget assemble_budget(const std::vector<LossChannel>& channels, const MaterialTable& materials,
                        double frequency_hz) {
    require(!channels.empty(), "budget needs at least one channel");
    require(frequency_hz > 0.0, "frequency must be > 0");
    QBudget budget;
    budget.frequency_hz = frequency_hz;
    double inv_q = 0.0;
    for (const auto& ch : channels) {
        BudgetEntry entry;
        entry.channel = ch;
        try {
            entry.q_limit = q_from_channel(ch, materials, frequency_hz);
            entry.budgeted = true;
            if (std::isfinite(entry.q_limit)) inv_q += 1.0 / entry.q_limit;
        } catch (const Error& e) {
            entry.budgeted = false;
            entry.note = e.what();
        }
        budget.entries.push_back(std::move(entry));
    }
    budget.total_q = inv_q > 0.0 ? 1.0 / inv_q : std::numeric_limits<double>::infinity();
    budget.t1_limit_s = budget.total_q / angular(frequency_hz);
    return budget;
}

double seam_bound_from_t1(double t1_s, double frequency_hz, double y_seam) {
    require(t1_s > 0.0, "T1 must be > 0");
    require(frequency_hz > 0.0, "frequency must be > 0");
    require(y_seam > 0.0, "seam admittance must be > 0");
    return y_seam * angular(frequency_hz) * t1_s;
}

std::vector<std::pair<double, double>> t1_bound(const std::vector<double>& frequencies_hz,
                                                const std::vector<LossChannel>& channels,
                                                const MaterialTable& materials) {
    require(!frequencies_hz.empty(), "t1_bound needs at least one frequency");
    std::vector<std::pair<double, double>> out;
    out.reserve(frequencies_hz.size());
    for (double f : frequencies_hz) {
        QBudget budget = assemble_budget(channels, materials, f);
        out.emplace_back(f, budget.t1_limit_s);
    }
    return out;
}

std::vector<LossChannel> parse_channels(const std::string& text, const std::string& origin) {
    std::vector<LossChannel> out;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = strip_comment(raw);
        if (line.empty()) continue;
        const std::string context = origin + ":" + std::to_string(lineno);
        auto t = tokens(line);
        require(t.size() >= 2, "expected '<kind> key=value ...' in " + context);
        LossChannel ch;
        ch.kind = channel_kind_from_name(t[0]);
        for (std::size_t i = 1; i < t.size(); ++i) {
            auto kv = t[i].find('=');
            require(kv != std::string::npos, "expected key=value token in " + context);
            const std::string k = t[i].substr(0, kv);
            const std::string v = t[i].substr(kv + 1);
            if (k == "region" || k == "surface" || k == "seam")
                ch.region_or_surface = v;
            else if (k == "material")
                ch.material = v;
            else
                fail("unknown channel key '" + k + "' in " + context);
        }
        require(!ch.region_or_surface.empty(), "channel needs a region/surface/seam in " + context);
        require(!ch.material.empty(), "channel needs a material in " + context);
        out.push_back(std::move(ch));
    }
    return out;
}

std::vector<LossChannel> load_channels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open channels file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_channels(buf.str(), path);
}

}  // namespace qpack

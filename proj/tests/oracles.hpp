#pragma once

// Test-only oracles: closed-form TM010 pillbox fields and integrals, plus
// small independent quadrature helpers. Everything here is evaluated from
// analytic formulas, never through the library's grid operations, so these
// are independent checks on the implementation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "qpack/constants.hpp"
#include "qpack/field_grid.hpp"

namespace oracle {

// First zeros of J0 / J1 (Abramowitz & Stegun); verified against
// std::cyl_bessel_j in the test suite.
inline constexpr double kJ01 = 2.404825557695773;
inline constexpr double kJ11 = 3.831705970207512;
inline constexpr double kJ21 = 5.135622301840683;
inline constexpr double kJ02 = 5.520078110286311;

inline double j0(double x) { return std::cyl_bessel_j(0.0, x); }
inline double j1(double x) { return std::cyl_bessel_j(1.0, x); }

/// Composite Simpson on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2 != 0) ++n;
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

/// Analytic TM010 pillbox mode of radius `a`, plate gap `height`, amplitude
/// chosen so the total energy (eps0|E|^2 + mu0|H|^2)/2 integrates to
/// `energy_j`.
struct Pillbox {
    double a = 0.0;
    double height = 0.0;
    double e0 = 0.0;  // V/m
    double k = 0.0;   // rad/m
    double frequency_hz = 0.0;

    Pillbox(double radius, double gap, double energy_j = 1.0) : a(radius), height(gap) {
        k = kJ01 / a;
        frequency_hz = qpack::kSpeedOfLight * k / (2.0 * qpack::kPi);
        // U = pi * eps0 * E0^2 * a^2 * h * J1(j01)^2
        const double u_unit =
            qpack::kPi * qpack::kEps0 * a * a * height * j1(kJ01) * j1(kJ01);
        e0 = std::sqrt(energy_j / u_unit);
    }

    double ez(double r) const { return e0 * j0(k * r); }
    /// |H_phi|; the phasor is 90 degrees out of phase with E.
    double h_phi(double r) const { return (e0 / qpack::kFreeSpaceImpedance) * j1(k * r); }

    double energy_j() const {
        return qpack::kPi * qpack::kEps0 * e0 * e0 * a * a * height * j1(kJ01) * j1(kJ01);
    }

    /// Conductor participation, all walls (two plates + side wall):
    /// p = 2 * lambda * (a + height) / (a * height).
    double conductor_participation(double lambda) const {
        return 2.0 * lambda * (a + height) / (a * height);
    }

    /// Circumferential side-wall seam: y = 2 / (omega * mu0 * a * height).
    double sidewall_seam_admittance() const {
        return 2.0 / (qpack::angular(frequency_hz) * qpack::kMu0 * a * height);
    }

    /// Thin metal-oxide layer on one plate, vacuum-side sampling divided by
    /// eps_ox^2: p = t / (eps_ox^2 * height).
    double plate_oxide_participation(double thickness, double eps_ox) const {
        return thickness / (eps_ox * eps_ox * height);
    }

    /// Dielectric participation of the sub-disc r < b (same material):
    /// closed form from int_0^x t J0(t)^2 dt = x^2/2 (J0^2 + J1^2).
    double disc_participation(double b) const {
        const double num = b * b * (j0(k * b) * j0(k * b) + j1(k * b) * j1(k * b));
        const double den = a * a * (j1(kJ01) * j1(kJ01));
        return num / den;
    }
};

/// Build a FieldGrid holding the analytic pillbox fields sampled on a square
/// lattice of spacing `h` (cell centers strictly inside the disc). Boundary
/// samples cover both plates and the staircase side wall, and one closed
/// "sidewall_seam" ring is attached. This builder is test-local and
/// independent of the solver's lattice code.
inline qpack::FieldGrid sample_pillbox(const Pillbox& box, double h) {
    using qpack::Complex;
    qpack::FieldGrid grid;
    const auto n = static_cast<std::int64_t>(std::ceil(2.0 * box.a / h));
    grid.dimensionality = 2;
    grid.shape = {n, n, 1};
    grid.spacing = {h, h, box.height};
    grid.origin = {-0.5 * n * h + 0.5 * h, -0.5 * n * h + 0.5 * h, 0.0};
    grid.regions.push_back({"vacuum", 1.0});
    grid.surface_names = {"floor", "ceiling", "sidewall"};

    auto coord = [&](std::int64_t i) { return grid.origin[0] + static_cast<double>(i) * h; };
    std::vector<std::vector<std::int64_t>> row(static_cast<std::size_t>(n),
                                               std::vector<std::int64_t>(static_cast<std::size_t>(n), -1));
    for (std::int64_t j = 0; j < n; ++j)
        for (std::int64_t i = 0; i < n; ++i) {
            const double x = coord(i), y = coord(j);
            const double r = std::hypot(x, y);
            if (r >= box.a) continue;
            row[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
                static_cast<std::int64_t>(grid.cell_count());
            grid.coords.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), 0});
            grid.region.push_back(0);
            grid.measure.push_back(h * h * box.height);
            qpack::Vec3c e{}, hh{};
            e[2] = Complex(box.ez(r), 0.0);
            if (r > 0.0) {
                const double hphi = box.h_phi(r);
                // phi_hat = (-y/r, x/r)
                hh[0] = Complex(0.0, -y / r * hphi);
                hh[1] = Complex(0.0, x / r * hphi);
            }
            grid.e_field.push_back(e);
            grid.h_field.push_back(hh);
        }

    std::vector<std::int64_t> ring;
    for (std::int64_t j = 0; j < n; ++j)
        for (std::int64_t i = 0; i < n; ++i) {
            const auto c = row[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            if (c < 0) continue;
            grid.boundary.push_back({c, {0, 0, -1}, h * h, 0});
            grid.boundary.push_back({c, {0, 0, 1}, h * h, 1});
            const std::int64_t di[4] = {1, -1, 0, 0};
            const std::int64_t dj[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                const std::int64_t ii = i + di[d], jj = j + dj[d];
                bool outside = ii < 0 || ii >= n || jj < 0 || jj >= n;
                if (!outside)
                    outside = row[static_cast<std::size_t>(jj)][static_cast<std::size_t>(ii)] < 0;
                if (!outside) continue;
                // True outward (radial) normal at the wall hit point, face
                // area projected onto the wall.
                const double x = coord(i), y = coord(j);
                const double ex = static_cast<double>(di[d]), ey = static_cast<double>(dj[d]);
                const double pe = x * ex + y * ey;
                const double disc = pe * pe + box.a * box.a - (x * x + y * y);
                const double t_hit = -pe + std::sqrt(disc);
                const double wx = x + t_hit * ex, wy = y + t_hit * ey;
                const double wr = std::hypot(wx, wy);
                const double nx = wx / wr, ny = wy / wr;
                const double proj = nx * ex + ny * ey;
                if (proj <= 1e-9) continue;
                qpack::BoundaryCell bc;
                bc.cell = c;
                bc.normal = {nx, ny, 0.0};
                bc.area = h * box.height * proj;
                bc.surface = 2;
                ring.push_back(static_cast<std::int64_t>(grid.boundary.size()));
                grid.boundary.push_back(bc);
            }
        }

    // Order the side-wall ring by angle to form the seam polyline.
    std::sort(ring.begin(), ring.end(), [&](std::int64_t lhs, std::int64_t rhs) {
        auto pa = grid.cell_position(static_cast<std::size_t>(grid.boundary[static_cast<std::size_t>(lhs)].cell));
        auto pb = grid.cell_position(static_cast<std::size_t>(grid.boundary[static_cast<std::size_t>(rhs)].cell));
        const double ta = std::atan2(pa[1], pa[0]);
        const double tb = std::atan2(pb[1], pb[0]);
        if (ta != tb) return ta < tb;
        return lhs < rhs;
    });
    grid.seams.push_back({"sidewall_seam", true, ring});
    grid.validate();
    return grid;
}

}  // namespace oracle

#include "qpack/cavity_solver.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qpack/constants.hpp"
#include "qpack/error.hpp"
#include "qpack/rng.hpp"
#include "qpack/text_util.hpp"

namespace qpack {

void SolverConfig::validate() const {
    require(grid_spacing > 0.0, "grid_spacing must be > 0");
    require(num_modes >= 1, "num_modes must be >= 1");
    require(tolerance > 0.0 && tolerance <= 1e-2, "tolerance must lie in (0, 1e-2]");
    require(max_iterations >= 1, "max_iterations must be >= 1");
}

namespace {

// Directions: 0 +x, 1 -x, 2 +y, 3 -y.
constexpr int kDx[4] = {1, -1, 0, 0};
constexpr int kDy[4] = {0, 0, 1, -1};

struct CellTopology {
    std::array<std::int64_t, 4> neighbor;  // active row, or -1 when the wall cuts
    std::array<double, 4> cut;             // distance to the wall when neighbor == -1
    std::array<int, 4> cut_surface;        // surface id of the cutting wall
};

struct Lattice {
    std::int64_t n = 0;      // cells per axis
    double h = 0.0;          // spacing
    double origin = 0.0;     // center coordinate of cell 0
    std::vector<std::int64_t> row;             // (i,j) -> active row or -1
    std::vector<std::array<std::int32_t, 2>> cells;  // active row -> (i,j)
    std::vector<CellTopology> topo;
    std::vector<std::string> surfaces;  // 0 floor, 1 ceiling, 2 sidewall, 3.. pillars

    double x(std::int64_t i) const { return origin + static_cast<double>(i) * h; }
    std::int64_t flat(std::int64_t i, std::int64_t j) const { return j * n + i; }
};

bool inside_domain(const CavityGeometry& g, double x, double y) {
    if (x * x + y * y >= g.radius * g.radius) return false;
    for (const auto& p : g.pillars) {
        const double dx = x - p.center.x, dy = y - p.center.y;
        if (dx * dx + dy * dy <= p.radius * p.radius) return false;
    }
    return true;
}

// Distance along (ex, ey) from (x, y) to the first wall crossing, and the
// surface id of that wall. Assumes the stepped-to neighbor is blocked.
std::pair<double, int> wall_distance(const CavityGeometry& g, double x, double y, double ex,
                                     double ey, double h) {
    double best = h;
    int surface = 2;  // sidewall
    {
        // |p + t e| = R, from inside: positive root.
        const double pe = x * ex + y * ey;
        const double c = x * x + y * y - g.radius * g.radius;
        const double disc = pe * pe - c;
        if (disc >= 0.0) {
            const double t = -pe + std::sqrt(disc);
            if (t > 0.0 && t <= best) {
                best = t;
                surface = 2;
            }
        }
    }
    for (std::size_t k = 0; k < g.pillars.size(); ++k) {
        const auto& p = g.pillars[k];
        const double wx = x - p.center.x, wy = y - p.center.y;
        const double we = wx * ex + wy * ey;
        const double c = wx * wx + wy * wy - p.radius * p.radius;
        const double disc = we * we - c;
        if (disc < 0.0) continue;
        const double t = -we - std::sqrt(disc);  // entering crossing
        if (t > 0.0 && t <= best) {
            best = t;
            surface = 3 + static_cast<int>(k);
        }
    }
    // Slivers with the wall nearly on the cell center would dominate the
    // diagonal; clamp for conditioning (the mode value there is ~0 anyway).
    return {std::max(best, 0.05 * h), surface};
}

Lattice build_lattice(const CavityGeometry& g, double h) {
    Lattice lat;
    lat.h = h;
    lat.n = static_cast<std::int64_t>(std::ceil(2.0 * g.radius / h));
    lat.origin = -0.5 * static_cast<double>(lat.n) * h + 0.5 * h;
    lat.row.assign(static_cast<std::size_t>(lat.n * lat.n), -1);

    for (std::int64_t j = 0; j < lat.n; ++j)
        for (std::int64_t i = 0; i < lat.n; ++i)
            if (inside_domain(g, lat.x(i), lat.x(j))) {
                lat.row[lat.flat(i, j)] = static_cast<std::int64_t>(lat.cells.size());
                lat.cells.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j)});
            }

    lat.surfaces = {"floor", "ceiling", "sidewall"};
    for (std::size_t k = 0; k < g.pillars.size(); ++k)
        lat.surfaces.push_back("pillar_" + std::to_string(k));

    lat.topo.resize(lat.cells.size());
    for (std::size_t c = 0; c < lat.cells.size(); ++c) {
        const double x = lat.x(lat.cells[c][0]);
        const double y = lat.x(lat.cells[c][1]);
        for (int d = 0; d < 4; ++d) {
            const std::int64_t ni = lat.cells[c][0] + kDx[d];
            const std::int64_t nj = lat.cells[c][1] + kDy[d];
            std::int64_t nrow = -1;
            if (ni >= 0 && ni < lat.n && nj >= 0 && nj < lat.n) nrow = lat.row[lat.flat(ni, nj)];
            lat.topo[c].neighbor[d] = nrow;
            if (nrow < 0) {
                auto [dist, surf] = wall_distance(g, x, y, kDx[d], kDy[d], h);
                lat.topo[c].cut[d] = dist;
                lat.topo[c].cut_surface[d] = surf;
            } else {
                lat.topo[c].cut[d] = 0.0;
                lat.topo[c].cut_surface[d] = -1;
            }
        }
    }
    return lat;
}

Eigen::SparseMatrix<double> assemble(const Lattice& lat) {
    const auto n = static_cast<Eigen::Index>(lat.cells.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 5);
    for (Eigen::Index c = 0; c < n; ++c) {
        double diag = 0.0;
        for (int d = 0; d < 4; ++d) {
            const auto nb = lat.topo[c].neighbor[d];
            if (nb >= 0) {
                diag += 1.0;
                trip.emplace_back(c, static_cast<Eigen::Index>(nb), -1.0);
            } else {
                diag += lat.h / lat.topo[c].cut[d];
            }
        }
        trip.emplace_back(c, c, diag);
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

struct EigenResult {
    Eigen::MatrixXd vectors;  // n x k
    Eigen::VectorXd values;   // matrix eigenvalues (theta = mu * h^2)
    int iterations = 0;
};

// Block shift-invert subspace iteration with Rayleigh-Ritz extraction.
// Returns the lowest eigenpairs of the symmetric matrix A; degeneracies are
// resolved naturally by the block.
EigenResult lowest_eigenpairs(const Eigen::SparseMatrix<double>& A, int want, double shift,
                              double tol, int max_iterations) {
    const Eigen::Index n = A.rows();
    require(want >= 1 && static_cast<Eigen::Index>(want) <= n,
            "requested more eigenmodes than grid unknowns");
    const int block =
        static_cast<int>(std::min<Eigen::Index>(n, want + (want >= 8 ? 16 : 8)));

    Eigen::SparseMatrix<double> shifted = A;
    if (shift != 0.0) {
        Eigen::SparseMatrix<double> I(n, n);
        I.setIdentity();
        shifted = A - shift * I;
    }
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(shifted);
    require(lu.info() == Eigen::Success,
            "factorization failed (shift may coincide with an eigenvalue)");

    Rng rng(0x9ac4f1e15eedULL);
    Eigen::MatrixXd X(n, block);
    for (Eigen::Index j = 0; j < block; ++j)
        for (Eigen::Index i = 0; i < n; ++i) X(i, j) = rng.gauss();

    EigenResult out;
    Eigen::MatrixXd Q, AQ, V;
    Eigen::VectorXd theta;
    for (int iter = 1; iter <= max_iterations; ++iter) {
        Eigen::MatrixXd Y = lu.solve(X);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
        Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
        AQ = A * Q;
        Eigen::MatrixXd T = Q.transpose() * AQ;
        T = 0.5 * (T + T.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        V = es.eigenvectors();
        theta = es.eigenvalues();
        X = Q * V;

        bool converged = true;
        Eigen::MatrixXd R = AQ * V.leftCols(want) - X.leftCols(want) * theta.head(want).asDiagonal();
        for (int j = 0; j < want; ++j) {
            if (theta(j) <= 0.0 || R.col(j).norm() > tol * theta(j)) {
                converged = false;
                break;
            }
        }
        out.iterations = iter;
        if (converged) {
            out.vectors = X.leftCols(want);
            out.values = theta.head(want);
            return out;
        }
    }

    // Keep whatever prefix has converged; error when nothing has.
    int good = 0;
    Eigen::MatrixXd R = AQ * V - X * theta.asDiagonal();
    for (int j = 0; j < want; ++j) {
        if (theta(j) > 0.0 && R.col(j).norm() <= tol * theta(j))
            ++good;
        else
            break;
    }
    if (good == 0)
        fail("eigensolver did not converge within max_iterations=" + std::to_string(max_iterations));
    out.vectors = X.leftCols(good);
    out.values = theta.head(good);
    return out;
}

// Stretched central difference; walls contribute an exact zero at the cut
// distance.
double derivative(const Lattice& lat, const Eigen::VectorXd& psi, std::size_t c, int dplus,
                  int dminus) {
    const auto np = lat.topo[c].neighbor[dplus];
    const auto nm = lat.topo[c].neighbor[dminus];
    const double h = lat.h;
    if (np >= 0 && nm >= 0) return (psi(np) - psi(nm)) / (2.0 * h);
    if (np >= 0) return (psi(np) - 0.0) / (h + lat.topo[c].cut[dminus]);
    if (nm >= 0) return (0.0 - psi(nm)) / (h + lat.topo[c].cut[dplus]);
    return 0.0;
}

FieldGrid make_mode_grid(const Lattice& lat, const CavityGeometry& g, double eps_eff,
                         const Eigen::VectorXd& psi, double frequency,
                         const std::vector<SeamSpec>& seams) {
    FieldGrid grid;
    grid.dimensionality = 2;
    grid.shape = {lat.n, lat.n, 1};
    grid.spacing = {lat.h, lat.h, g.height};
    grid.origin = {lat.origin, lat.origin, 0.0};
    grid.regions.push_back({eps_eff == 1.0 ? "vacuum" : "gap_effective", eps_eff});
    grid.surface_names = lat.surfaces;
    grid.mode_frequency_hz = frequency;

    const std::size_t ncells = lat.cells.size();
    grid.coords.resize(ncells);
    grid.region.assign(ncells, 0);
    grid.measure.assign(ncells, lat.h * lat.h * g.height);
    grid.e_field.assign(ncells, Vec3c{});
    grid.h_field.assign(ncells, Vec3c{});

    const double omega = angular(frequency);
    const double hcoef = 1.0 / (omega * kMu0);
    for (std::size_t c = 0; c < ncells; ++c) {
        grid.coords[c] = {lat.cells[c][0], lat.cells[c][1], 0};
        grid.e_field[c][2] = Complex(psi(static_cast<Eigen::Index>(c)), 0.0);
        // H = (i / (omega mu0)) curl(psi z) = (i/(omega mu0)) (dpsi/dy, -dpsi/dx, 0)
        const double dpdx = derivative(lat, psi, c, 0, 1);
        const double dpdy = derivative(lat, psi, c, 2, 3);
        grid.h_field[c][0] = Complex(0.0, hcoef * dpdy);
        grid.h_field[c][1] = Complex(0.0, -hcoef * dpdx);
    }

    // Boundary samples: plates under every cell, plus the in-plane wall cuts.
    // Wall entries carry the true outward normal at the nearest wall point
    // and the staircase face area projected onto the wall, so surface sums
    // converge to the smooth integrals (divergence theorem).
    for (std::size_t c = 0; c < ncells; ++c) {
        const double plate_area = lat.h * lat.h;
        grid.boundary.push_back({static_cast<std::int64_t>(c), {0, 0, -1}, plate_area, 0});
        grid.boundary.push_back({static_cast<std::int64_t>(c), {0, 0, 1}, plate_area, 1});
        const double x = lat.x(lat.cells[c][0]);
        const double y = lat.x(lat.cells[c][1]);
        for (int d = 0; d < 4; ++d) {
            if (lat.topo[c].neighbor[d] >= 0) continue;
            const int surf = lat.topo[c].cut_surface[d];
            const double wx = x + lat.topo[c].cut[d] * kDx[d];
            const double wy = y + lat.topo[c].cut[d] * kDy[d];
            double nx, ny;
            if (surf == 2) {  // outer wall: radially outward
                const double r = std::hypot(wx, wy);
                nx = wx / r;
                ny = wy / r;
            } else {  // pillar wall: out of the cavity means toward the pillar axis
                const auto& pil = g.pillars[static_cast<std::size_t>(surf - 3)];
                const double r = std::hypot(pil.center.x - wx, pil.center.y - wy);
                nx = (pil.center.x - wx) / r;
                ny = (pil.center.y - wy) / r;
            }
            const double proj = nx * kDx[d] + ny * kDy[d];
            if (proj <= 1e-9) continue;  // grazing face, no projected extent
            BoundaryCell bc;
            bc.cell = static_cast<std::int64_t>(c);
            bc.normal = {nx, ny, 0.0};
            bc.area = lat.h * g.height * proj;
            bc.surface = static_cast<std::uint32_t>(surf);
            grid.boundary.push_back(bc);
        }
    }

    // Resolve seam declarations into ordered rings of boundary entries.
    for (const auto& spec : seams) {
        const bool glob = !spec.surface_selector.empty() && spec.surface_selector.back() == '*';
        const std::string prefix =
            glob ? spec.surface_selector.substr(0, spec.surface_selector.size() - 1)
                 : spec.surface_selector;
        bool matched = false;
        for (std::size_t s = 0; s < grid.surface_names.size(); ++s) {
            const std::string& name = grid.surface_names[s];
            const bool hit = glob ? name.rfind(prefix, 0) == 0 : name == prefix;
            if (!hit) continue;
            std::vector<std::int64_t> entries;
            double cx = 0.0, cy = 0.0;
            for (std::size_t b = 0; b < grid.boundary.size(); ++b) {
                if (grid.boundary[b].surface != s) continue;
                entries.push_back(static_cast<std::int64_t>(b));
                auto pos = grid.cell_position(static_cast<std::size_t>(grid.boundary[b].cell));
                cx += pos[0];
                cy += pos[1];
            }
            if (entries.empty()) continue;
            matched = true;
            cx /= static_cast<double>(entries.size());
            cy /= static_cast<double>(entries.size());
            std::sort(entries.begin(), entries.end(), [&](std::int64_t a, std::int64_t b) {
                auto pa = grid.cell_position(static_cast<std::size_t>(grid.boundary[a].cell));
                auto pb = grid.cell_position(static_cast<std::size_t>(grid.boundary[b].cell));
                const double aa = std::atan2(pa[1] - cy, pa[0] - cx);
                const double ab = std::atan2(pb[1] - cy, pb[0] - cx);
                if (aa != ab) return aa < ab;
                return a < b;
            });
            grid.seams.push_back({spec.name, true, std::move(entries)});
        }
        require(matched, "seam '" + spec.name + "' matches no boundary surface '" +
                             spec.surface_selector + "'");
    }
    return grid;
}

}  // namespace

ModeSpectrum solve_modes(const CavityGeometry& geometry, const MaterialTable& /*materials*/,
                         const SolverConfig& config, const std::vector<SeamSpec>& seams) {
    geometry.validate();
    config.validate();
    for (const auto& p : geometry.pillars)
        require(p.radius >= 4.0 * config.grid_spacing,
                "grid too coarse: pillar radius " + format_double(p.radius) +
                    " m needs spacing <= radius/4");

    const double eps_eff = geometry.effective_permittivity();
    Lattice lat = build_lattice(geometry, config.grid_spacing);
    require(lat.cells.size() >= static_cast<std::size_t>(config.num_modes),
            "grid resolves fewer cells than requested modes");

    Eigen::SparseMatrix<double> A = assemble(lat);

    const double h2 = config.grid_spacing * config.grid_spacing;
    double shift_theta = 0.0;
    if (config.shift_hz > 0.0) {
        const double k = angular(config.shift_hz) * std::sqrt(eps_eff) / kSpeedOfLight;
        shift_theta = k * k * h2;
    }
    EigenResult eig = lowest_eigenpairs(A, config.num_modes, shift_theta, config.tolerance,
                                        config.max_iterations);

    ModeSpectrum spectrum;
    spectrum.geometry = geometry;
    spectrum.config = config;
    spectrum.effective_permittivity = eps_eff;
    spectrum.model_ceiling_hz = geometry.model_ceiling_hz();
    spectrum.iterations = eig.iterations;

    const int found = static_cast<int>(eig.values.size());
    struct Staged {
        double frequency;
        Eigen::VectorXd psi;
        double mx, my;
    };
    std::vector<Staged> staged(found);
    for (int m = 0; m < found; ++m) {
        const double mu = eig.values(m) / h2;
        staged[m].frequency = kSpeedOfLight * std::sqrt(mu) / (2.0 * kPi * std::sqrt(eps_eff));
        Eigen::VectorXd psi = eig.vectors.col(m);
        // Deterministic sign: largest-magnitude sample positive.
        Eigen::Index imax = 0;
        psi.cwiseAbs().maxCoeff(&imax);
        if (psi(imax) < 0.0) psi = -psi;
        double mx = 0.0, my = 0.0;
        for (std::size_t c = 0; c < lat.cells.size(); ++c) {
            const double w = psi(static_cast<Eigen::Index>(c)) * psi(static_cast<Eigen::Index>(c));
            mx += w * lat.x(lat.cells[c][0]);
            my += w * lat.x(lat.cells[c][1]);
        }
        staged[m].psi = std::move(psi);
        staged[m].mx = mx;
        staged[m].my = my;
    }

    // Ascending frequency; inside near-degenerate clusters order by field
    // moments so reruns are reproducible.
    std::vector<int> order(staged.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    const double band = 10.0 * config.tolerance;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double fa = staged[a].frequency, fb = staged[b].frequency;
        if (std::abs(fa - fb) > band * std::max(fa, fb)) return fa < fb;
        if (staged[a].mx != staged[b].mx) return staged[a].mx < staged[b].mx;
        if (staged[a].my != staged[b].my) return staged[a].my < staged[b].my;
        return fa < fb;
    });

    spectrum.degenerate_group.resize(staged.size());
    int group = -1;
    double group_freq = -1.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const Staged& s = staged[order[rank]];
        if (group < 0 || std::abs(s.frequency - group_freq) > band * std::max(s.frequency, group_freq)) {
            ++group;
            group_freq = s.frequency;
        }
        spectrum.degenerate_group[rank] = group;

        ModeSolution mode;
        mode.frequency_hz = s.frequency;
        std::ostringstream label;
        label << "mode" << (rank < 10 ? "0" : "") << rank;
        mode.label = label.str();
        mode.field = make_mode_grid(lat, geometry, eps_eff, s.psi, s.frequency, seams);
        scale_to_energy(mode.field, 1.0);
        mode.stored_energy_j = total_energy(mode.field);
        spectrum.modes.push_back(std::move(mode));
    }
    return spectrum;
}

ModeReport mode_report(const ModeSpectrum& spectrum, const std::vector<FrequencyBand>& bands) {
    require(!spectrum.modes.empty(), "mode report needs a non-empty spectrum");
    for (std::size_t i = 0; i < bands.size(); ++i) {
        require(bands[i].low_hz < bands[i].high_hz,
                "band '" + bands[i].label + "' must have low < high");
        for (std::size_t j = i + 1; j < bands.size(); ++j) {
            const bool disjoint =
                bands[i].high_hz <= bands[j].low_hz || bands[j].high_hz <= bands[i].low_hz;
            require(disjoint, "bands '" + bands[i].label + "' and '" + bands[j].label +
                                  "' overlap");
        }
    }

    ModeReport report;
    report.model_ceiling_hz = spectrum.model_ceiling_hz;
    report.fundamental_hz = spectrum.modes.front().frequency_hz;
    double top = 0.0;
    for (const auto& b : bands) top = std::max(top, b.high_hz);
    report.clearance_hz = bands.empty() ? 0.0 : report.fundamental_hz - top;

    for (std::size_t m = 0; m < spectrum.modes.size(); ++m) {
        ModeReportRow row;
        row.index = static_cast<int>(m);
        row.label = spectrum.modes[m].label;
        row.frequency_hz = spectrum.modes[m].frequency_hz;
        row.group = spectrum.degenerate_group[m];
        for (const auto& b : bands) {
            if (row.frequency_hz >= b.low_hz && row.frequency_hz <= b.high_hz) {
                row.band_hit = b.label;
                ++report.collisions;
                break;
            }
        }
        report.rows.push_back(row);
    }
    return report;
}

void export_mode_field(const ModeSolution& mode, const std::string& path) {
    require(mode.stored_energy_j > 0.0, "mode is not normalized: stored energy unset");
    const double actual = total_energy(mode.field);
    require(std::abs(actual - mode.stored_energy_j) <= 1e-9 * mode.stored_energy_j,
            "mode is not normalized: stored energy disagrees with field content");
    save_field_grid(mode.field, path);
}

}  // namespace qpack

#include "goldstein/von_mises.hpp"

#include "goldstein/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace goldstein {

namespace {

// Three-point weights of (W_ζζ - W_ζ/ζ)/(4ζ²) at interior node i.
struct Stencil {
    std::vector<double> am, ap;  // coefficients of W_{i-1}, W_{i+1}; W_i gets -(am + ap)
};

Stencil make_stencil(const Grid& z) {
    const std::size_t n = z.size();
    Stencil s{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    // Exact on 1, ζ², ζ³: near the wall W = 2λζ² + Bζ³ + O(ζ⁴), and the
    // usual central stencil has an O(1) error on ζ³ at the first nodes.
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double a = z[i - 1], zi = z[i], c = z[i + 1];
        const double dm = zi * zi - a * a, dp = c * c - zi * zi;
        const double cm = zi * zi * zi - a * a * a, cp = c * c * c - zi * zi * zi;
        s.ap[i] = 0.75 / (zi * (cp - dp / dm * cm));
        s.am[i] = s.ap[i] * dp / dm;
    }
    return s;
}

double apply(const Stencil& st, const std::vector<double>& W, std::size_t i) {
    return st.am[i] * (W[i - 1] - W[i]) + st.ap[i] * (W[i + 1] - W[i]);
}

// Thomas algorithm; a = sub, b = diag, c = super, all of length n.
void solve_tridiagonal(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c,
                       std::vector<double>& d) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    d[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

double extrapolate_from(const std::vector<double>& f, const Grid& g, std::size_t first, std::size_t count) {
    const auto w = fd_weights(0.0, std::span<const double>(g.nodes().data() + first, count), 0);
    double acc = 0.0;
    for (std::size_t j = 0; j < count; ++j) acc += w[0][j] * f[first + j];
    return acc;
}

GridPtr squared(const GridPtr& z) {
    std::vector<double> p(z->size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = (*z)[i] * (*z)[i];
    return Grid::from_nodes(std::move(p));
}

}  // namespace

GridPtr default_zeta_grid(std::size_t n, double first_zeta, double phi_max) {
    return Grid::geometric(first_zeta, std::sqrt(phi_max), n);
}

GridPtr default_y_grid(std::size_t n, double first, double y_max) { return Grid::geometric(first, y_max, n); }

double wall_lambda(const Field& W, const GridPtr& zeta_grid) {
    std::vector<double> g(6, 0.0);
    for (std::size_t i = 1; i <= 5; ++i) g[i] = W[i] / ((*zeta_grid)[i] * (*zeta_grid)[i]);
    return 0.5 * extrapolate_from(g, *zeta_grid, 1, 5);
}

VMState to_von_mises(const Field& u, GridPtr zeta_grid, double x0, double gradient) {
    if (u[0] != 0.0) throw InvalidProfile("u(0) must vanish");
    for (std::size_t i = 1; i < u.size(); ++i)
        if (!(u[i] > 0.0) || u[i] < u[i - 1]) throw InvalidProfile("u must be positive and increasing");
    const Field phi = cumint(u);
    std::vector<double> z(u.size()), w(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        z[i] = std::sqrt(phi[i]);
        w[i] = u[i] * u[i];
    }
    const Field Wz(Grid::from_nodes(std::move(z)), std::move(w));
    VMState st;
    st.zeta_grid = zeta_grid;
    st.psi_grid = squared(zeta_grid);
    st.W = Field(st.psi_grid, interpolate(Wz, zeta_grid->nodes()));
    st.W[0] = 0.0;
    const auto& y = u.grid->nodes();
    const auto wts = fd_weights(0.0, std::span<const double>(y.data(), 5), 1);
    double slope = 0.0;
    for (int j = 0; j < 5; ++j) slope += wts[1][j] * u[j];
    st.lambda = slope;
    st.x0_pressure = x0;
    st.gradient = gradient;
    return st;
}

Field from_von_mises(const VMState& state) {
    const auto& z = *state.zeta_grid;
    const std::size_t n = z.size();
    for (std::size_t i = 1; i < n; ++i)
        if (!(state.W[i] > 0.0)) throw InvalidState("W must be positive away from the wall");
    const double lw = wall_lambda(state.W, state.zeta_grid);
    if (!(lw > 0.0)) throw InvalidState("non-positive wall slope");
    std::vector<double> g(n), y(n, 0.0), u(n, 0.0);
    g[0] = 2.0 / std::sqrt(2.0 * lw);
    for (std::size_t i = 1; i < n; ++i) {
        g[i] = 2.0 * z[i] / std::sqrt(state.W[i]);
        y[i] = y[i - 1] + 0.5 * (z[i] - z[i - 1]) * (g[i] + g[i - 1]);
        u[i] = std::sqrt(state.W[i]);
    }
    return Field(Grid::from_nodes(std::move(y)), std::move(u));
}

Field compute_F(const VMState& state) {
    const auto& z = *state.zeta_grid;
    const std::size_t n = z.size();
    const Stencil st = make_stencil(z);
    std::vector<double> F(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i)
        F[i] = std::sqrt(std::max(state.W[i], 0.0)) * apply(st, state.W.values, i) - 2.0 * state.gradient;
    F[0] = extrapolate_from(F, z, 1, 4);
    F[n - 1] = F[n - 2];
    return Field(state.psi_grid, std::move(F));
}

VMState march_step(const VMState& state, double dx, const MarchConfig& cfg) {
    const auto& z = *state.zeta_grid;
    const std::size_t n = z.size();
    const Stencil st = make_stencil(z);
    const double x1 = state.x + dx;
    const double far = state.far_value(x1);
    const double src = 2.0 * state.gradient * dx;
    const auto& Wn = state.W.values;

    std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double k = dx * std::sqrt(std::max(Wn[i], 0.0));
        a[i] = -k * st.am[i];
        c[i] = -k * st.ap[i];
        b[i] = 1.0 + k * (st.am[i] + st.ap[i]);
        d[i] = Wn[i] - src;
    }
    d[0] = 0.0;
    d[n - 1] = far;
    solve_tridiagonal(a, b, c, d);
    std::vector<double> W = std::move(d);

    if (cfg.scheme == Scheme::implicit_newton) {
        bool converged = false;
        for (int it = 0; it < cfg.newton_max_iter; ++it) {
            std::vector<double> ja(n, 0.0), jb(n, 1.0), jc(n, 0.0), r(n, 0.0);
            double wmax = 0.0;
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double sw = std::sqrt(std::max(W[i], 1e-300));
                const double op = apply(st, W, i);
                r[i] = -(W[i] - Wn[i] - dx * sw * op + src);
                ja[i] = -dx * sw * st.am[i];
                jc[i] = -dx * sw * st.ap[i];
                jb[i] = 1.0 - dx * (op / (2.0 * sw) - sw * (st.am[i] + st.ap[i]));
                wmax = std::max(wmax, std::abs(W[i]));
            }
            solve_tridiagonal(ja, jb, jc, r);
            double dmax = 0.0;
            for (std::size_t i = 1; i + 1 < n; ++i) {
                W[i] += r[i];
                dmax = std::max(dmax, std::abs(r[i]));
            }
            if (dmax <= cfg.newton_tol * std::max(wmax, 1e-300)) {
                converged = true;
                break;
            }
        }
        if (!converged) throw StepFailure("Newton iteration did not converge");
    }

    double wmax = 0.0;
    for (double v : W) wmax = std::max(wmax, std::abs(v));
    for (std::size_t i = 1; i < n; ++i) {
        if (!(W[i] > 0.0)) throw StepFailure("W lost positivity at node " + std::to_string(i));
        if (W[i] - W[i - 1] < -1e-12 * wmax) throw StepFailure("W lost monotonicity at node " + std::to_string(i));
    }
    VMState next = state;
    next.x = x1;
    next.W = Field(state.psi_grid, std::move(W));
    next.lambda = wall_lambda(next.W, next.zeta_grid);
    return next;
}

namespace {

TrajectorySample sample_of(const VMState& st, double s, double dx) {
    TrajectorySample t;
    t.x = st.x;
    t.s = s;
    t.lambda = st.lambda;
    t.dx = dx;
    const Field F = compute_F(st);
    t.F_max = -1e300;
    for (std::size_t i = 1; i + 1 < F.size(); ++i) t.F_max = std::max(t.F_max, F[i]);
    t.monotonicity_min = 1e300;
    for (std::size_t i = 1; i < st.W.size(); ++i) t.monotonicity_min = std::min(t.monotonicity_min, st.W[i] - st.W[i - 1]);
    return t;
}

}  // namespace

Trajectory solve_until_separation(const InitialData& u0, const MarchConfig& cfg, GridPtr zeta_grid, double gradient) {
    if (!(cfg.dx_min < cfg.dx_init)) throw ConfigError("dx_min must be below dx_init");
    if (!(cfg.lambda_stop > 0.0)) throw ConfigError("lambda_stop must be positive");
    if (!zeta_grid) zeta_grid = default_zeta_grid();
    VMState st = to_von_mises(u0.u0, zeta_grid, u0.x0, gradient);
    st.lambda = wall_lambda(st.W, zeta_grid);

    Trajectory tr;
    tr.zeta_grid = zeta_grid;
    tr.psi_grid = st.psi_grid;
    tr.s0 = u0.s0;
    tr.lambda0 = u0.lambda0;
    tr.x0_pressure = u0.x0;
    tr.gradient = gradient;

    double s = u0.s0;
    tr.samples.push_back(sample_of(st, s, 0.0));
    const double lambda_start = st.lambda;
    int next_snap = 0;
    auto threshold = [&](int k) { return lambda_start * std::pow(10.0, -static_cast<double>(k) / cfg.snapshots_per_decade); };
    std::optional<Snapshot> pending;
    auto maybe_snapshot = [&](const VMState& cur, double cur_s) {
        if (pending) {
            pending->x_next = cur.x;
            pending->s_next = cur_s;
            pending->lambda_next = cur.lambda;
            pending->W_next = cur.W;
            tr.snapshots.push_back(std::move(*pending));
            pending.reset();
        }
        if (cur.lambda <= threshold(next_snap) && cur.lambda > cfg.lambda_stop) {
            while (cur.lambda <= threshold(next_snap)) ++next_snap;
            pending = Snapshot{cur.x, cur_s, cur.lambda, cur.W, 0.0, 0.0, 0.0, {}};
        }
    };
    maybe_snapshot(st, s);

    for (std::size_t step = 0; step < cfg.max_steps; ++step) {
        if (st.lambda <= cfg.lambda_stop) {
            tr.separated = true;
            break;
        }
        if (st.x >= cfg.x_max) break;
        const double l4 = std::pow(st.lambda, 4);
        double dx = std::min({cfg.dx_init, cfg.cfl_safety * l4 * s, cfg.x_max - st.x});
        std::optional<VMState> next;
        while (!next) {
            try {
                next = march_step(st, dx, cfg);
                if (!(next->lambda > 0.0) || !std::isfinite(next->lambda)) {
                    next.reset();
                    throw StepFailure("wall slope not positive");
                }
            } catch (const StepFailure& e) {
                dx *= 0.5;
                if (dx < cfg.dx_min) {
                    tr.failed = true;
                    tr.failure = e.what();
                    return tr;
                }
            }
        }
        s += 0.5 * dx * (1.0 / l4 + 1.0 / std::pow(next->lambda, 4));
        st = std::move(*next);
        tr.samples.push_back(sample_of(st, s, dx));
        maybe_snapshot(st, s);
    }
    if (pending) pending.reset();
    return tr;
}

void write_trajectory_csv(const Trajectory& t, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw MissingInput("cannot open " + path.string());
    out << "x,s,lambda,dx,F_max,monotonicity_min\n" << std::setprecision(17);
    for (const auto& r : t.samples)
        out << r.x << ',' << r.s << ',' << r.lambda << ',' << r.dx << ',' << r.F_max << ',' << r.monotonicity_min
            << '\n';
}

void write_snapshots(const Trajectory& t, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream g(dir / "zeta_grid.csv");
        g << "zeta\n" << std::setprecision(17);
        for (double z : t.zeta_grid->nodes()) g << z << '\n';
    }
    std::ofstream idx(dir / "index.csv");
    idx << "id,x,s,lambda,x_next,s_next,lambda_next\n" << std::setprecision(17);
    for (std::size_t k = 0; k < t.snapshots.size(); ++k) {
        const auto& sn = t.snapshots[k];
        idx << k << ',' << sn.x << ',' << sn.s << ',' << sn.lambda << ',' << sn.x_next << ',' << sn.s_next << ','
            << sn.lambda_next << '\n';
        std::ostringstream name;
        name << "snap_" << std::setw(3) << std::setfill('0') << k << ".csv";
        std::ofstream f(dir / name.str());
        f << "phi,W,W_next\n" << std::setprecision(17);
        for (std::size_t i = 0; i < sn.W.size(); ++i)
            f << sn.W.node(i) << ',' << sn.W[i] << ',' << sn.W_next[i] << '\n';
    }
}

namespace {

std::vector<std::vector<double>> read_csv(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw MissingInput("missing file " + p.string());
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

Trajectory read_trajectory(const std::filesystem::path& dir) {
    Trajectory t;
    for (const auto& r : read_csv(dir / "trajectory.csv")) {
        if (r.size() < 6) throw MissingInput("malformed trajectory.csv");
        t.samples.push_back({r[0], r[1], r[2], r[3], r[4], r[5]});
    }
    const auto snapdir = dir / "snapshots";
    std::vector<double> z;
    for (const auto& r : read_csv(snapdir / "zeta_grid.csv")) z.push_back(r.at(0));
    t.zeta_grid = Grid::from_nodes(std::move(z));
    t.psi_grid = squared(t.zeta_grid);
    for (const auto& r : read_csv(snapdir / "index.csv")) {
        Snapshot sn;
        sn.x = r.at(1);
        sn.s = r.at(2);
        sn.lambda = r.at(3);
        sn.x_next = r.at(4);
        sn.s_next = r.at(5);
        sn.lambda_next = r.at(6);
        std::ostringstream name;
        name << "snap_" << std::setw(3) << std::setfill('0') << static_cast<int>(r.at(0)) << ".csv";
        std::vector<double> w, wn;
        for (const auto& row : read_csv(snapdir / name.str())) {
            w.push_back(row.at(1));
            wn.push_back(row.at(2));
        }
        sn.W = Field(t.psi_grid, std::move(w));
        sn.W_next = Field(t.psi_grid, std::move(wn));
        t.snapshots.push_back(std::move(sn));
    }
    if (t.samples.empty()) throw MissingInput("empty trajectory");
    t.lambda0 = t.samples.front().lambda;
    t.s0 = t.samples.front().s;
    return t;
}

}  // namespace goldstein

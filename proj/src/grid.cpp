#include "goldstein/grid.hpp"

#include "goldstein/errors.hpp"

#include <algorithm>
#include <cmath>

namespace goldstein {

std::string to_string(Stretching s) {
    switch (s) {
        case Stretching::uniform: return "uniform";
        case Stretching::geometric: return "geometric";
        case Stretching::tanh: return "tanh";
        case Stretching::custom: return "custom";
    }
    return "custom";
}

Grid::Grid(std::vector<double> nodes, Stretching kind) : nodes_(std::move(nodes)), kind_(kind) {
    if (nodes_.size() < kMinNodes)
        throw TooFewNodes("grid needs at least " + std::to_string(kMinNodes) + " nodes, got " +
                          std::to_string(nodes_.size()));
    if (nodes_.front() != 0.0) throw DomainError("grid must start at 0");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        if (!(nodes_[i] > nodes_[i - 1])) throw DomainError("grid nodes must be strictly increasing");
}

std::shared_ptr<const Grid> Grid::uniform(double length, std::size_t n) {
    std::vector<double> x(n + 1);
    for (std::size_t i = 0; i <= n; ++i) x[i] = length * static_cast<double>(i) / static_cast<double>(n);
    x[n] = length;
    return std::shared_ptr<const Grid>(new Grid(std::move(x), Stretching::uniform));
}

std::shared_ptr<const Grid> Grid::geometric(double first, double length, std::size_t n) {
    if (!(first > 0.0) || !(length > first)) throw DomainError("geometric grid needs 0 < first < length");
    // Ratio r with first * (r^n - 1)/(r - 1) = length, by bisection on log r.
    auto total = [&](double r) { return first * (std::pow(r, static_cast<double>(n)) - 1.0) / (r - 1.0); };
    double lo = 1.0 + 1e-12, hi = 2.0;
    while (total(hi) < length) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) < length ? lo : hi) = mid;
    }
    const double r = 0.5 * (lo + hi);
    std::vector<double> x(n + 1, 0.0);
    double h = first;
    for (std::size_t i = 1; i <= n; ++i) {
        x[i] = x[i - 1] + h;
        h *= r;
    }
    x[n] = length;
    return std::shared_ptr<const Grid>(new Grid(std::move(x), Stretching::geometric));
}

std::shared_ptr<const Grid> Grid::tanh_clustered(double length, std::size_t n, double beta) {
    std::vector<double> x(n + 1);
    const double tb = std::tanh(beta);
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n);
        x[i] = length * (1.0 - std::tanh(beta * (1.0 - t)) / tb);
    }
    x[0] = 0.0;
    x[n] = length;
    return std::shared_ptr<const Grid>(new Grid(std::move(x), Stretching::tanh));
}

std::shared_ptr<const Grid> Grid::from_nodes(std::vector<double> nodes) {
    return std::shared_ptr<const Grid>(new Grid(std::move(nodes), Stretching::custom));
}

double Grid::max_spacing() const {
    double h = 0.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) h = std::max(h, nodes_[i] - nodes_[i - 1]);
    return h;
}

std::size_t Grid::locate(double x) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    std::size_t i = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
    return std::min(i, nodes_.size() - 2);
}

Field::Field(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->size()) throw DomainError("field length does not match grid");
}

Field::Field(GridPtr g, double fill) : grid(std::move(g)), values(grid->size(), fill) {}

namespace {

template <class Op>
Field combine(const Field& a, const Field& b, Op op) {
    if (a.size() != b.size()) throw DomainError("field sizes differ");
    Field r(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) r.values[i] = op(a.values[i], b.values[i]);
    return r;
}

}  // namespace

Field operator+(const Field& a, const Field& b) { return combine(a, b, std::plus<>()); }
Field operator-(const Field& a, const Field& b) { return combine(a, b, std::minus<>()); }
Field operator*(const Field& a, const Field& b) { return combine(a, b, std::multiplies<>()); }
Field operator/(const Field& a, const Field& b) { return combine(a, b, std::divides<>()); }
Field operator*(double c, const Field& a) {
    Field r = a;
    for (auto& v : r.values) v *= c;
    return r;
}

std::vector<std::vector<double>> fd_weights(double x0, std::span<const double> xs, int m) {
    const int n = static_cast<int>(xs.size()) - 1;
    std::vector<std::vector<double>> c(m + 1, std::vector<double>(n + 1, 0.0));
    double c1 = 1.0, c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

Field diff(const Field& f, int order, std::size_t width) {
    if (order < 1 || order > 3) throw DomainError("derivative order must be 1, 2 or 3");
    const std::size_t n = f.size();
    if (n < static_cast<std::size_t>(order) + 3) throw TooFewNodes("too few nodes for derivative");
    if (width < static_cast<std::size_t>(order) + 2) throw DomainError("stencil too narrow");
    width = std::min(width, n);
    const auto& x = f.grid->nodes();
    Field r(f.grid);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t start = i >= width / 2 ? i - width / 2 : 0;
        start = std::min(start, n - width);
        const auto w = fd_weights(x[i], std::span<const double>(x.data() + start, width), order);
        double acc = 0.0;
        for (std::size_t j = 0; j < width; ++j) acc += w[order][j] * f.values[start + j];
        r.values[i] = acc;
    }
    return r;
}

Field cumint(const Field& f) {
    Field r(f.grid);
    const auto& x = f.grid->nodes();
    for (std::size_t i = 1; i < f.size(); ++i)
        r.values[i] = r.values[i - 1] + 0.5 * (x[i] - x[i - 1]) * (f.values[i] + f.values[i - 1]);
    return r;
}

double integrate(const Field& f) { return cumint(f).values.back(); }

double interpolate(const Field& f, double p) {
    const auto& g = *f.grid;
    const double span = g.back();
    const double slack = 1e-12 * std::max(1.0, span);
    if (p < -slack || p > span + slack)
        throw ExtrapolationError("interpolation point " + std::to_string(p) + " outside [0, " +
                                 std::to_string(span) + "]");
    p = std::clamp(p, 0.0, span);
    const std::size_t n = g.size();
    const std::size_t i = g.locate(p);
    std::size_t start = i >= 1 ? i - 1 : 0;
    start = std::min(start, n - 4);
    double acc = 0.0;
    for (std::size_t j = start; j < start + 4; ++j) {
        double l = 1.0;
        for (std::size_t k = start; k < start + 4; ++k)
            if (k != j) l *= (p - g[k]) / (g[j] - g[k]);
        acc += l * f.values[j];
    }
    return acc;
}

std::vector<double> interpolate(const Field& f, std::span<const double> points) {
    std::vector<double> out;
    out.reserve(points.size());
    for (double p : points) out.push_back(interpolate(f, p));
    return out;
}

Field resample(const Field& f, GridPtr target) {
    auto v = interpolate(f, target->nodes());
    return Field(std::move(target), std::move(v));
}

}  // namespace goldstein

#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace goldstein {

enum class Stretching { uniform, geometric, tanh, custom };

std::string to_string(Stretching s);

/// Strictly increasing nodes starting at 0, at least kMinNodes of them.
class Grid {
public:
    static constexpr std::size_t kMinNodes = 64;

    /// n equal cells on [0, length].
    static std::shared_ptr<const Grid> uniform(double length, std::size_t n);
    /// 0 followed by first, first*r, ... reaching length exactly after n cells.
    static std::shared_ptr<const Grid> geometric(double first, double length, std::size_t n);
    /// length * (1 - tanh(beta (1 - i/n)) / tanh(beta)); clustered at 0.
    static std::shared_ptr<const Grid> tanh_clustered(double length, std::size_t n, double beta = 3.0);
    static std::shared_ptr<const Grid> from_nodes(std::vector<double> nodes);

    std::size_t size() const { return nodes_.size(); }
    double operator[](std::size_t i) const { return nodes_[i]; }
    const std::vector<double>& nodes() const { return nodes_; }
    double back() const { return nodes_.back(); }
    Stretching stretching() const { return kind_; }

    /// Widest cell.
    double max_spacing() const;

    /// Index i with nodes[i] <= x < nodes[i+1] (clamped to valid cells).
    std::size_t locate(double x) const;

private:
    Grid(std::vector<double> nodes, Stretching kind);
    std::vector<double> nodes_;
    Stretching kind_;
};

using GridPtr = std::shared_ptr<const Grid>;

struct Field {
    GridPtr grid;
    std::vector<double> values;

    Field() = default;
    Field(GridPtr g, std::vector<double> v);
    explicit Field(GridPtr g, double fill = 0.0);

    template <class F>
    static Field sample(GridPtr g, F&& f) {
        std::vector<double> v(g->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f((*g)[i]);
        return Field(std::move(g), std::move(v));
    }

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    double node(std::size_t i) const { return (*grid)[i]; }
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(const Field& a, const Field& b);
Field operator/(const Field& a, const Field& b);
Field operator*(double c, const Field& a);

/// Finite-difference weights for derivatives 0..m at x0 over the points xs (Fornberg).
/// Returns w[k][j] for derivative k at point j.
std::vector<std::vector<double>> fd_weights(double x0, std::span<const double> xs, int m);

/// Derivative of the given order (1..3). Stencils of `width` points (five by
/// default), centered in the interior and one-sided at the ends.
Field diff(const Field& f, int order, std::size_t width = 5);

/// ∫_0^Y f by the trapezoid rule.
Field cumint(const Field& f);

/// ∫_0^{Y_max} f by the trapezoid rule.
double integrate(const Field& f);

/// Local cubic interpolation through the four nearest nodes.
std::vector<double> interpolate(const Field& f, std::span<const double> points);
double interpolate(const Field& f, double x);

/// Values of f resampled onto another grid.
Field resample(const Field& f, GridPtr target);

}  // namespace goldstein

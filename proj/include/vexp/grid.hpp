#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vexp/error.hpp"

namespace vexp {

using Point = std::array<double, 2>;

/// Box description handed to make_grid. Axis 1 is ignored in 1D.
struct DomainSpec {
    int dimension = 1;
    std::array<double, 2> lower{0.0, 0.0};
    std::array<double, 2> upper{1.0, 1.0};
    std::array<std::size_t, 2> nodes{129, 1};
};

/**
 * Uniform tensor grid on an interval or rectangle.
 *
 * Nodes are numbered x-fastest: k = i + nx * j. The outermost layer of nodes
 * is the Dirichlet boundary.
 */
class Grid {
public:
    explicit Grid(const DomainSpec& spec) : spec_(spec) {
        if (spec.dimension != 1 && spec.dimension != 2)
            throw ConfigError("grid dimension must be 1 or 2, got " + std::to_string(spec.dimension));
        for (int a = 0; a < spec.dimension; ++a) {
            if (!(std::isfinite(spec.lower[a]) && std::isfinite(spec.upper[a]) && spec.lower[a] < spec.upper[a]))
                throw ConfigError("grid axis " + std::to_string(a) + ": lower bound must be below upper bound");
            if (spec.nodes[a] < 3)
                throw ConfigError("grid axis " + std::to_string(a) + ": need at least 3 nodes, got " +
                                  std::to_string(spec.nodes[a]));
            h_[a] = (spec.upper[a] - spec.lower[a]) / static_cast<double>(spec.nodes[a] - 1);
        }
        if (spec.dimension == 1) {
            spec_.nodes[1] = 1;
            spec_.lower[1] = 0.0;
            spec_.upper[1] = 0.0;
            h_[1] = 0.0;
        }
    }

    int dimension() const { return spec_.dimension; }
    std::size_t nodes(int axis) const { return spec_.nodes[axis]; }
    double spacing(int axis) const { return h_[axis]; }
    double lower(int axis) const { return spec_.lower[axis]; }
    double upper(int axis) const { return spec_.upper[axis]; }
    std::size_t size() const { return spec_.nodes[0] * spec_.nodes[1]; }
    const DomainSpec& spec() const { return spec_; }

    double measure() const {
        double m = spec_.upper[0] - spec_.lower[0];
        if (spec_.dimension == 2) m *= spec_.upper[1] - spec_.lower[1];
        return m;
    }

    double max_spacing() const { return std::max(h_[0], h_[1]); }

    std::size_t index(std::size_t i, std::size_t j = 0) const { return i + spec_.nodes[0] * j; }

    std::array<std::size_t, 2> multi_index(std::size_t k) const {
        return {k % spec_.nodes[0], k / spec_.nodes[0]};
    }

    Point coordinates(std::size_t k) const {
        const auto [i, j] = multi_index(k);
        // lower + i*h reproduces the endpoints exactly only at i = 0; pin the last node too.
        auto coord = [&](int a, std::size_t idx) {
            if (idx + 1 == spec_.nodes[a]) return spec_.upper[a];
            return spec_.lower[a] + static_cast<double>(idx) * h_[a];
        };
        if (spec_.dimension == 1) return {coord(0, i), 0.0};
        return {coord(0, i), coord(1, j)};
    }

    bool on_boundary(std::size_t k) const {
        const auto [i, j] = multi_index(k);
        if (i == 0 || i + 1 == spec_.nodes[0]) return true;
        return spec_.dimension == 2 && (j == 0 || j + 1 == spec_.nodes[1]);
    }

    std::vector<std::size_t> boundary_nodes() const {
        std::vector<std::size_t> out;
        for (std::size_t k = 0; k < size(); ++k)
            if (on_boundary(k)) out.push_back(k);
        return out;
    }

    std::vector<std::size_t> interior_nodes() const {
        std::vector<std::size_t> out;
        for (std::size_t k = 0; k < size(); ++k)
            if (!on_boundary(k)) out.push_back(k);
        return out;
    }

    bool operator==(const Grid& o) const {
        return spec_.dimension == o.spec_.dimension && spec_.nodes == o.spec_.nodes &&
               spec_.lower == o.spec_.lower && spec_.upper == o.spec_.upper;
    }

private:
    DomainSpec spec_;
    std::array<double, 2> h_{0.0, 0.0};
};

inline Grid make_grid(const DomainSpec& spec) { return Grid(spec); }

inline Grid make_grid_1d(std::size_t n, double lo = 0.0, double hi = 1.0) {
    DomainSpec s;
    s.dimension = 1;
    s.lower = {lo, 0.0};
    s.upper = {hi, 0.0};
    s.nodes = {n, 1};
    return Grid(s);
}

inline Grid make_grid_2d(std::size_t nx, std::size_t ny, Point lo = {0.0, 0.0}, Point hi = {1.0, 1.0}) {
    DomainSpec s;
    s.dimension = 2;
    s.lower = lo;
    s.upper = hi;
    s.nodes = {nx, ny};
    return Grid(s);
}

inline void require_size(const Grid& g, std::size_t n, const char* what) {
    if (n != g.size())
        throw ShapeError(std::string(what) + ": expected " + std::to_string(g.size()) + " samples, got " +
                         std::to_string(n));
}

/**
 * Nodal samples of a scalar field with zero Dirichlet trace.
 *
 * Construction rejects non-finite values and nonzero boundary values; the
 * sampling factory zeroes the boundary instead.
 */
class GridFunction {
public:
    GridFunction(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
        require_size(grid_, values_.size(), "GridFunction");
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (!std::isfinite(values_[k]))
                throw DataError("GridFunction: non-finite value at node " + std::to_string(k));
            if (grid_.on_boundary(k) && values_[k] != 0.0)
                throw DataError("GridFunction: nonzero boundary value at node " + std::to_string(k));
        }
    }

    static GridFunction zero(const Grid& grid) { return GridFunction(grid, std::vector<double>(grid.size(), 0.0)); }

    /// Samples f at interior nodes; boundary nodes are set to zero.
    template <class F>
    static GridFunction sample(const Grid& grid, F&& f) {
        std::vector<double> vals(grid.size(), 0.0);
        for (std::size_t k = 0; k < grid.size(); ++k)
            if (!grid.on_boundary(k)) vals[k] = f(grid.coordinates(k));
        return GridFunction(grid, std::move(vals));
    }

    const Grid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::span<const double> span() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }

    double sup_norm() const {
        double m = 0.0;
        for (double x : values_) m = std::max(m, std::fabs(x));
        return m;
    }

    bool is_zero() const { return sup_norm() == 0.0; }

    friend GridFunction operator+(const GridFunction& a, const GridFunction& b) { return combine(a, b, 1.0); }
    friend GridFunction operator-(const GridFunction& a, const GridFunction& b) { return combine(a, b, -1.0); }
    friend GridFunction operator-(const GridFunction& a) { return a * -1.0; }
    friend GridFunction operator*(double c, const GridFunction& a) { return a * c; }
    friend GridFunction operator*(const GridFunction& a, double c) {
        std::vector<double> out(a.values_);
        for (double& x : out) x *= c;
        return GridFunction(a.grid_, std::move(out));
    }

    /// Pointwise product; zero boundary is preserved.
    friend GridFunction operator*(const GridFunction& a, const GridFunction& b) {
        check_same(a, b);
        std::vector<double> out(a.values_);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] *= b.values_[k];
        return GridFunction(a.grid_, std::move(out));
    }

private:
    static void check_same(const GridFunction& a, const GridFunction& b) {
        if (!(a.grid_ == b.grid_)) throw ShapeError("GridFunction operands live on different grids");
    }

    static GridFunction combine(const GridFunction& a, const GridFunction& b, double sign) {
        check_same(a, b);
        std::vector<double> out(a.values_);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += sign * b.values_[k];
        return GridFunction(a.grid_, std::move(out));
    }

    Grid grid_;
    std::vector<double> values_;
};

/// Per-node gradient vectors; component 1 is unused in 1D.
class VectorField {
public:
    VectorField(Grid grid, std::vector<std::array<double, 2>> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        require_size(grid_, values_.size(), "VectorField");
        for (const auto& g : values_)
            if (!std::isfinite(g[0]) || !std::isfinite(g[1])) throw DataError("VectorField: non-finite entry");
    }

    const Grid& grid() const { return grid_; }
    const std::array<double, 2>& operator[](std::size_t k) const { return values_[k]; }
    std::size_t size() const { return values_.size(); }

    std::vector<double> magnitude() const {
        std::vector<double> out(values_.size());
        for (std::size_t k = 0; k < values_.size(); ++k) out[k] = std::hypot(values_[k][0], values_[k][1]);
        return out;
    }

private:
    Grid grid_;
    std::vector<std::array<double, 2>> values_;
};

} // namespace vexp

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "vexp/expression.hpp"
#include "vexp/grid.hpp"

namespace vexp {

/**
 * Variable exponent sampled on a grid, together with the formula it came from.
 *
 * Samples must exceed 1 everywhere. Between nodes the exponent is evaluated
 * through the formula, never interpolated, so monotonicity and extrema probes
 * see the true profile.
 */
class ExponentField {
public:
    ExponentField(Grid grid, Expression descriptor, std::string name = "p")
        : grid_(std::move(grid)), descriptor_(std::move(descriptor)), name_(std::move(name)) {
        if (descriptor_.depends_on(Variable::u) || descriptor_.depends_on(Variable::v))
            throw ConfigError("exponent " + name_ + " may depend on x and y only");
        values_.resize(grid_.size());
        for (std::size_t k = 0; k < grid_.size(); ++k) {
            const Point x = grid_.coordinates(k);
            values_[k] = descriptor_(x[0], x[1]);
            if (!std::isfinite(values_[k]))
                throw DataError("exponent " + name_ + ": non-finite sample at node " + std::to_string(k));
            if (!(values_[k] > 1.0))
                throw DomainError("exponent " + name_ + " must exceed 1; sample " + std::to_string(values_[k]) +
                                  " at node " + std::to_string(k));
        }
    }

    ExponentField(Grid grid, const std::string& formula, std::string name = "p")
        : ExponentField(std::move(grid), Expression::parse(formula), std::move(name)) {}

    static ExponentField constant(const Grid& grid, double value, std::string name = "p") {
        return ExponentField(grid, Expression::constant(value), std::move(name));
    }

    const Grid& grid() const { return grid_; }
    const Expression& descriptor() const { return descriptor_; }
    const std::string& name() const { return name_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t k) const { return values_[k]; }
    std::size_t size() const { return values_.size(); }

    double at(const Point& x) const { return descriptor_(x[0], x[1]); }

    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }

    bool is_constant() const { return descriptor_.is_constant(); }

    /**
     * Checks that the descriptor restricted to every grid line along `axis`
     * is monotone (non-strictly), probing `refine` points per cell.
     */
    bool monotone_along(int axis, int refine = 4, double tol = 1e-12) const {
        if (axis >= grid_.dimension()) return false;
        const int other = 1 - axis;
        const std::size_t lines = grid_.dimension() == 2 ? grid_.nodes(other) : 1;
        const std::size_t cells = grid_.nodes(axis) - 1;
        for (std::size_t l = 0; l < lines; ++l) {
            bool up = true, down = true;
            double prev = 0.0;
            for (std::size_t c = 0; c <= cells * static_cast<std::size_t>(refine); ++c) {
                Point x{0.0, 0.0};
                const double t = static_cast<double>(c) / static_cast<double>(cells * refine);
                x[axis] = grid_.lower(axis) + t * (grid_.upper(axis) - grid_.lower(axis));
                if (grid_.dimension() == 2)
                    x[other] = grid_.lower(other) + static_cast<double>(l) * grid_.spacing(other);
                const double val = at(x);
                if (c > 0) {
                    const double d = val - prev;
                    if (d < -tol) up = false;
                    if (d > tol) down = false;
                }
                prev = val;
            }
            if (!up && !down) return false;
        }
        return true;
    }

private:
    Grid grid_;
    Expression descriptor_;
    std::string name_;
    std::vector<double> values_;
};

/// (min, max) over the samples.
inline std::pair<double, double> field_extrema(const ExponentField& p) {
    if (p.size() == 0) throw DataError("field_extrema: empty exponent field");
    return {p.min(), p.max()};
}

/// Nodewise p/(p-1), keeping the symbolic descriptor p/(p-1).
inline ExponentField conjugate_exponent(const ExponentField& p) {
    for (std::size_t k = 0; k < p.size(); ++k)
        if (!(p[k] > 1.0)) throw DomainError("conjugate_exponent: sample must exceed 1");
    const Expression& d = p.descriptor();
    return ExponentField(p.grid(), d / (d - Expression::constant(1.0)), p.name() + "'");
}

} // namespace vexp

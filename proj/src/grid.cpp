#include "spde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spde/error.hpp"

namespace spde {

TimeGrid::TimeGrid(double t_max, std::size_t n_steps) : t_max_(t_max), n_steps_(n_steps) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("TimeGrid: t_max must be > 0");
    if (n_steps < 1) throw DomainError("TimeGrid: n_steps must be >= 1");
}

SpaceTimeGrid::SpaceTimeGrid(TimeGrid time, double half_width, std::size_t n_cells,
                             std::size_t dim)
    : time_(time), half_width_(half_width), n_cells_(n_cells), dim_(dim) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw DomainError("SpaceTimeGrid: half width L must be > 0");
    }
    if (n_cells < 1) throw DomainError("SpaceTimeGrid: n_cells must be >= 1");
    if (dim < 1 || dim > 3) throw DomainError("SpaceTimeGrid: dimension must be 1, 2 or 3");
    const double total = static_cast<double>(time.n_steps()) *
                         std::pow(static_cast<double>(n_cells), static_cast<double>(dim));
    if (total > 1e10) throw DomainError("SpaceTimeGrid: node count too large");
}

double SpaceTimeGrid::cell_volume() const noexcept {
    return std::pow(dx(), static_cast<double>(dim_));
}

std::size_t SpaceTimeGrid::spatial_size() const noexcept {
    std::size_t n = 1;
    for (std::size_t a = 0; a < dim_; ++a) n *= n_cells_;
    return n;
}

std::vector<std::size_t> SpaceTimeGrid::unflatten(std::size_t flat) const {
    std::vector<std::size_t> idx(dim_);
    for (std::size_t a = dim_; a-- > 0;) {
        idx[a] = flat % n_cells_;
        flat /= n_cells_;
    }
    return idx;
}

Field::Field(SpaceTimeGrid grid, Layout layout) : grid_(grid), layout_(layout) {
    const std::size_t rows =
        layout == Layout::cells ? grid.time().n_steps() : grid.time().n_steps() + 1;
    steps_.resize(rows);
    std::iota(steps_.begin(), steps_.end(), std::size_t{0});
    values_.assign(rows * grid.spatial_size(), 0.0);
}

Field::Field(SpaceTimeGrid grid, std::vector<std::size_t> steps)
    : grid_(grid), layout_(Layout::nodes), steps_(std::move(steps)) {
    for (std::size_t k : steps_) {
        if (k > grid.time().n_steps()) throw ShapeError("Field: time step beyond grid");
    }
    values_.assign(steps_.size() * grid.spatial_size(), 0.0);
}

std::size_t Field::row_of_step(std::size_t k) const noexcept {
    auto it = std::find(steps_.begin(), steps_.end(), k);
    return static_cast<std::size_t>(it - steps_.begin());
}

double Field::row_time(std::size_t r) const noexcept {
    const double dt = grid_.time().dt();
    const double t = static_cast<double>(steps_[r]) * dt;
    return layout_ == Layout::cells ? t + 0.5 * dt : t;
}

} // namespace spde

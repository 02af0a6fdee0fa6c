#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spde {

// Uniform partition of [0, t_max] into n_steps slabs.
class TimeGrid {
  public:
    TimeGrid(double t_max, std::size_t n_steps);

    double t_max() const noexcept { return t_max_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    double dt() const noexcept { return t_max_ / static_cast<double>(n_steps_); }
    double node(std::size_t k) const noexcept { return static_cast<double>(k) * dt(); }

  private:
    double t_max_;
    std::size_t n_steps_;
};

// Uniform lattice over [0,T] x [-L,L]^d. Spatial cells are indexed
// row-major (last axis fastest); a spatial node is a cell center.
class SpaceTimeGrid {
  public:
    SpaceTimeGrid(TimeGrid time, double half_width, std::size_t n_cells, std::size_t dim = 1);

    const TimeGrid& time() const noexcept { return time_; }
    double half_width() const noexcept { return half_width_; }
    std::size_t n_cells() const noexcept { return n_cells_; }
    std::size_t dim() const noexcept { return dim_; }
    double dx() const noexcept { return 2.0 * half_width_ / static_cast<double>(n_cells_); }
    double cell_volume() const noexcept;
    std::size_t spatial_size() const noexcept; // n_cells^d
    std::size_t cell_count() const noexcept { return time_.n_steps() * spatial_size(); }

    // Center coordinate of cell index i along one axis.
    double center(std::size_t i) const noexcept {
        return -half_width_ + (static_cast<double>(i) + 0.5) * dx();
    }
    // Axis indices of flat spatial index.
    std::vector<std::size_t> unflatten(std::size_t flat) const;

  private:
    TimeGrid time_;
    double half_width_;
    std::size_t n_cells_;
    std::size_t dim_;
};

// Values over a space-time grid. Two layouts share the container:
//   cells - one value per space-time cell (noise increments); row k is the
//           time slab [t_k, t_{k+1}).
//   nodes - solution values; row r holds time node t_{steps[r]} at the
//           spatial cell centers.
// Storage is row-major with time outermost.
class Field {
  public:
    enum class Layout { cells, nodes };

    // All slabs (cells layout) or all nodes 0..n_steps (nodes layout), zeroed.
    Field(SpaceTimeGrid grid, Layout layout);
    // Nodes layout restricted to the listed time steps.
    Field(SpaceTimeGrid grid, std::vector<std::size_t> steps);

    const SpaceTimeGrid& grid() const noexcept { return grid_; }
    Layout layout() const noexcept { return layout_; }
    const std::vector<std::size_t>& steps() const noexcept { return steps_; }
    std::size_t rows() const noexcept { return steps_.size(); }
    std::size_t row_size() const noexcept { return grid_.spatial_size(); }

    std::span<double> row(std::size_t r) noexcept {
        return {values_.data() + r * row_size(), row_size()};
    }
    std::span<const double> row(std::size_t r) const noexcept {
        return {values_.data() + r * row_size(), row_size()};
    }
    double& at(std::size_t r, std::size_t cell) noexcept { return values_[r * row_size() + cell]; }
    double at(std::size_t r, std::size_t cell) const noexcept { return values_[r * row_size() + cell]; }

    // Row index holding time step k, or rows() when absent.
    std::size_t row_of_step(std::size_t k) const noexcept;
    // Time coordinate of row r (slab center for cells layout).
    double row_time(std::size_t r) const noexcept;

    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

  private:
    SpaceTimeGrid grid_;
    Layout layout_;
    std::vector<std::size_t> steps_;
    std::vector<double> values_;
};

// Process values at the nodes t_0..t_n of a TimeGrid.
struct Path {
    TimeGrid grid;
    std::vector<double> values;
};

} // namespace spde

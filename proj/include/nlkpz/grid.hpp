#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "nlkpz/kernel.hpp"

namespace nlkpz {

/// Axis-aligned box prod (lo_i, hi_i); only the first `dim` entries are used.
struct Box {
    int dim = 1;
    Point lo{0.0, 0.0};
    Point hi{0.0, 0.0};

    double measure() const noexcept;
};

enum class NodeKind : std::uint8_t { interior, collar };

/// Uniform lattice covering the closed box plus a collar of whole layers at
/// least one kernel radius wide. Nodes are stored row-major, x fastest.
class Grid {
public:
    int dim() const noexcept { return box_.dim; }
    double h() const noexcept { return h_; }
    const Box& box() const noexcept { return box_; }
    int collar_layers() const noexcept { return layers_; }
    double collar_width() const noexcept { return layers_ * h_; }
    double cell_volume() const noexcept { return cell_volume_; }

    /// Lattice extent along each axis, collar included.
    std::array<std::size_t, 2> shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return kinds_.size(); }
    /// Offset in flat storage of one step along `axis`.
    std::ptrdiff_t stride(int axis) const noexcept { return axis == 0 ? 1 : static_cast<std::ptrdiff_t>(shape_[0]); }
    std::size_t index(std::size_t ix, std::size_t iy = 0) const noexcept { return ix + shape_[0] * iy; }

    NodeKind kind(std::size_t node) const noexcept { return kinds_[node]; }
    Point point(std::size_t node) const noexcept;

    std::span<const std::size_t> interior() const noexcept { return interior_; }
    std::span<const std::size_t> collar() const noexcept { return collar_; }

    /// Interior nodes within `layers` lattice steps of the box faces.
    std::vector<std::size_t> edge_ring(int layers) const;

    /// Flat offset of a lattice displacement.
    std::ptrdiff_t flat_offset(const std::array<int, 2>& o) const noexcept {
        return o[0] + (dim() == 2 ? static_cast<std::ptrdiff_t>(o[1]) * stride(1) : 0);
    }

private:
    friend Grid build_grid(const Box&, double, double);
    Grid() = default;

    Box box_;
    double h_ = 0.0;
    double cell_volume_ = 0.0;
    int layers_ = 0;
    std::array<std::size_t, 2> shape_{1, 1};
    std::array<std::size_t, 2> interior_count_{1, 1};
    std::vector<NodeKind> kinds_;
    std::vector<std::size_t> interior_;
    std::vector<std::size_t> collar_;
};

/// The box must be an integer number of spacings wide along every axis.
/// Collar width is ceil(kernel_radius / h) h.
Grid build_grid(const Box& box, double h, double kernel_radius);

/// Nodal values of a solution at one time. Collar entries carry the
/// exterior data (Dirichlet values, or zeros for a truncated Cauchy box).
class Field {
public:
    Field() = default;
    Field(std::shared_ptr<const Grid> grid, double t = 0.0);
    Field(std::shared_ptr<const Grid> grid, std::vector<double> values, double t);

    const Grid& grid() const noexcept { return *grid_; }
    const std::shared_ptr<const Grid>& grid_ptr() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }
    std::size_t size() const noexcept { return values_.size(); }
    double t() const noexcept { return t_; }
    void set_t(double t) noexcept { t_ = t; }

    /// Values at interior nodes, in grid().interior() order.
    std::vector<double> interior_values() const;

private:
    std::shared_ptr<const Grid> grid_;
    std::vector<double> values_;
    double t_ = 0.0;
};

/// Snapshot CSV: coordinates, node kind, value.
void write_csv(std::ostream& os, const Field& f);

}  // namespace nlkpz

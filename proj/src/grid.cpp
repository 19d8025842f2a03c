#include "nlkpz/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "nlkpz/error.hpp"

namespace nlkpz {

double Box::measure() const noexcept {
    double m = hi[0] - lo[0];
    if (dim == 2) m *= hi[1] - lo[1];
    return m;
}

Point Grid::point(std::size_t node) const noexcept {
    const std::size_t ix = node % shape_[0];
    const std::size_t iy = node / shape_[0];
    Point p{box_.lo[0] + (static_cast<double>(ix) - layers_) * h_, 0.0};
    if (dim() == 2) p[1] = box_.lo[1] + (static_cast<double>(iy) - layers_) * h_;
    return p;
}

std::vector<std::size_t> Grid::edge_ring(int layers) const {
    std::vector<std::size_t> ring;
    const auto lim = static_cast<std::size_t>(std::max(layers, 0));
    for (std::size_t node : interior_) {
        const std::size_t ix = node % shape_[0] - layers_;
        const std::size_t iy = node / shape_[0];
        bool near = ix < lim || ix + lim >= interior_count_[0];
        if (dim() == 2) {
            const std::size_t jy = iy - layers_;
            near = near || jy < lim || jy + lim >= interior_count_[1];
        }
        if (near) ring.push_back(node);
    }
    return ring;
}

Grid build_grid(const Box& box, double h, double kernel_radius) {
    if (box.dim != 1 && box.dim != 2) throw ConfigError("grid dimension must be 1 or 2");
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("grid spacing must be positive");
    if (!(kernel_radius >= h * (1.0 - 1e-12))) {
        throw ResolutionError("kernel radius " + std::to_string(kernel_radius) + " is below the grid spacing", kernel_radius);
    }
    Grid g;
    g.box_ = box;
    g.h_ = h;
    g.cell_volume_ = std::pow(h, box.dim);
    g.layers_ = static_cast<int>(std::ceil(kernel_radius / h - 1e-9));
    for (int a = 0; a < box.dim; ++a) {
        const double width = box.hi[a] - box.lo[a];
        if (!(width > 0.0)) throw ConfigError("degenerate box");
        const double cells = width / h;
        const double rounded = std::round(cells);
        if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells)) {
            throw ConfigError("box width " + std::to_string(width) + " is not a multiple of h = " + std::to_string(h));
        }
        g.interior_count_[a] = static_cast<std::size_t>(rounded) + 1;
        g.shape_[a] = g.interior_count_[a] + 2 * static_cast<std::size_t>(g.layers_);
    }
    if (box.dim == 1) g.shape_[1] = g.interior_count_[1] = 1;

    const std::size_t n = g.shape_[0] * g.shape_[1];
    g.kinds_.assign(n, NodeKind::collar);
    const auto L = static_cast<std::size_t>(g.layers_);
    for (std::size_t iy = 0; iy < g.shape_[1]; ++iy) {
        for (std::size_t ix = 0; ix < g.shape_[0]; ++ix) {
            bool inside = ix >= L && ix < L + g.interior_count_[0];
            if (box.dim == 2) inside = inside && iy >= L && iy < L + g.interior_count_[1];
            const std::size_t node = g.index(ix, iy);
            if (inside) {
                g.kinds_[node] = NodeKind::interior;
                g.interior_.push_back(node);
            } else {
                g.collar_.push_back(node);
            }
        }
    }
    return g;
}

Field::Field(std::shared_ptr<const Grid> grid, double t) : grid_(std::move(grid)), t_(t) {
    values_.assign(grid_->size(), 0.0);
}

Field::Field(std::shared_ptr<const Grid> grid, std::vector<double> values, double t)
    : grid_(std::move(grid)), values_(std::move(values)), t_(t) {
    if (values_.size() != grid_->size()) throw ConfigError("field size does not match grid node count");
}

std::vector<double> Field::interior_values() const {
    std::vector<double> out;
    out.reserve(grid_->interior().size());
    for (std::size_t node : grid_->interior()) out.push_back(values_[node]);
    return out;
}

void write_csv(std::ostream& os, const Field& f) {
    const Grid& g = f.grid();
    const auto prec = os.precision(17);
    os << (g.dim() == 1 ? "x,kind,value\n" : "x,y,kind,value\n");
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point p = g.point(i);
        os << p[0] << ',';
        if (g.dim() == 2) os << p[1] << ',';
        os << (g.kind(i) == NodeKind::interior ? "interior" : "collar") << ',' << f[i] << '\n';
    }
    os.precision(prec);
}

}  // namespace nlkpz

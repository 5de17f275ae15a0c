#include "inslab/planning/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace inslab::planning {

Grid::Grid(std::vector<GridDim> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("Grid: no dimensions");
    size_ = 1;
    for (const auto& d : dims_) {
        if (!(d.lo < d.hi)) throw std::invalid_argument("Grid: require lo < hi");
        if (d.n_cells < 2) throw std::invalid_argument("Grid: require n_cells >= 2");
        size_ *= d.n_cells;
    }
    strides_.assign(dims_.size(), 1);
    for (int d = static_cast<int>(dims_.size()) - 2; d >= 0; --d)
        strides_[static_cast<std::size_t>(d)] =
            strides_[static_cast<std::size_t>(d + 1)] * dims_[static_cast<std::size_t>(d + 1)].n_cells;
}

int Grid::cell_of(int d, double x, std::uint64_t* clamp_count) const {
    const auto& gd = dims_[static_cast<std::size_t>(d)];
    const double t = (x - gd.lo) / (gd.hi - gd.lo) * gd.n_cells;
    int c = static_cast<int>(std::floor(t));
    if (c < 0 || c >= gd.n_cells) {
        if (clamp_count) ++*clamp_count;
        c = c < 0 ? 0 : gd.n_cells - 1;
    }
    return c;
}

int Grid::index(const StateVec& s, std::uint64_t* clamp_count) const {
    if (static_cast<int>(s.size()) != dims())
        throw std::invalid_argument("Grid::index: state dimension mismatch");
    int idx = 0;
    for (int d = 0; d < dims(); ++d)
        idx += cell_of(d, s[static_cast<std::size_t>(d)], clamp_count) *
               strides_[static_cast<std::size_t>(d)];
    return idx;
}

std::vector<int> Grid::coords(int index) const {
    if (index < 0 || index >= size_) throw std::out_of_range("Grid::coords: bad index");
    std::vector<int> c(dims_.size());
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        c[d] = index / strides_[d];
        index -= c[d] * strides_[d];
    }
    return c;
}

int Grid::from_coords(const std::vector<int>& coords) const {
    if (static_cast<int>(coords.size()) != dims())
        throw std::invalid_argument("Grid::from_coords: dimension mismatch");
    int idx = 0;
    for (std::size_t d = 0; d < coords.size(); ++d) {
        if (coords[d] < 0 || coords[d] >= dims_[d].n_cells)
            throw std::out_of_range("Grid::from_coords: coordinate out of range");
        idx += coords[d] * strides_[d];
    }
    return idx;
}

double Grid::center_of(int d, int cell) const {
    const auto& gd = dims_[static_cast<std::size_t>(d)];
    return gd.lo + (cell + 0.5) * (gd.hi - gd.lo) / gd.n_cells;
}

StateVec Grid::center(int index) const {
    const auto c = coords(index);
    StateVec s(dims_.size());
    for (int d = 0; d < dims(); ++d) s[static_cast<std::size_t>(d)] = center_of(d, c[static_cast<std::size_t>(d)]);
    return s;
}

double Grid::cell_width(int d) const {
    const auto& gd = dims_[static_cast<std::size_t>(d)];
    return (gd.hi - gd.lo) / gd.n_cells;
}

}  // namespace inslab::planning

#pragma once

#include "inslab/types.hpp"

#include <cstdint>
#include <vector>

namespace inslab::planning {

struct GridDim {
    double lo = 0.0;
    double hi = 1.0;
    int n_cells = 2;
};

// Uniform product grid mapping states to flat cell indices (row-major, last
// dimension fastest). Out-of-range states clamp to edge cells; pass a counter
// to record clamps.
class Grid {
public:
    explicit Grid(std::vector<GridDim> dims);

    int dims() const { return static_cast<int>(dims_.size()); }
    int size() const { return size_; }
    int dim_cells(int d) const { return dims_[static_cast<std::size_t>(d)].n_cells; }
    int stride(int d) const { return strides_[static_cast<std::size_t>(d)]; }
    const GridDim& dim(int d) const { return dims_[static_cast<std::size_t>(d)]; }

    int cell_of(int d, double x, std::uint64_t* clamp_count = nullptr) const;
    int index(const StateVec& s, std::uint64_t* clamp_count = nullptr) const;

    std::vector<int> coords(int index) const;
    int from_coords(const std::vector<int>& coords) const;

    double center_of(int d, int cell) const;
    StateVec center(int index) const;

    double cell_width(int d) const;

private:
    std::vector<GridDim> dims_;
    std::vector<int> strides_;
    int size_ = 0;
};

}  // namespace inslab::planning

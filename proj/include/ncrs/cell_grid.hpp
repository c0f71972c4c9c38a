#pragma once

#include <compare>
#include <cstddef>
#include <vector>

#include "ncrs/task.hpp"

namespace ncrs {

struct Cell {
    int row = 0;
    int col = 0;
    constexpr auto operator<=>(const Cell&) const = default;
};

struct GridDims {
    int height = 5;
    int width = 5;
    constexpr bool operator==(const GridDims&) const = default;
    constexpr int area() const { return height * width; }
    constexpr bool contains(Cell c) const { return c.row >= 0 && c.row < height && c.col >= 0 && c.col < width; }
    constexpr Cell center() const { return {height / 2, width / 2}; }
};

/// Dense H x W x n cellular state, channel-innermost.
class CellGrid {
public:
    static constexpr double kMinValue = -5.0;
    static constexpr double kMaxValue = 5.0;

    CellGrid() = default;
    CellGrid(GridDims dims, ChannelLayout layout)
        : dims_(dims), layout_(layout),
          values_(static_cast<std::size_t>(dims.area() * layout.n_total()), 0.0) {}

    GridDims dims() const { return dims_; }
    int height() const { return dims_.height; }
    int width() const { return dims_.width; }
    int channels() const { return layout_.n_total(); }
    const ChannelLayout& layout() const { return layout_; }

    double& at(int row, int col, int channel) { return values_[index(row, col, channel)]; }
    double at(int row, int col, int channel) const { return values_[index(row, col, channel)]; }
    double& at(Cell c, int channel) { return at(c.row, c.col, channel); }
    double at(Cell c, int channel) const { return at(c.row, c.col, channel); }

    /// Pointer to the n_total contiguous channel values of a cell.
    double* cell_data(int row, int col) { return values_.data() + index(row, col, 0); }
    const double* cell_data(int row, int col) const { return values_.data() + index(row, col, 0); }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool operator==(const CellGrid&) const = default;

private:
    std::size_t index(int row, int col, int channel) const {
        return static_cast<std::size_t>((row * dims_.width + col) * layout_.n_total() + channel);
    }

    GridDims dims_;
    ChannelLayout layout_;
    std::vector<double> values_;
};

} // namespace ncrs

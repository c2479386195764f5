// Copyright (C) 2026 ObjectAdd contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace objectadd {

/// Dense row-major (rows, cols, channels) grid. Channels are innermost, so a
/// cell's channel vector is contiguous.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int rows, int cols, int channels = 1, T fill = T{})
        : rows_(rows), cols_(cols), channels_(channels),
          data_(static_cast<std::size_t>(rows) * cols * channels, fill) {
        assert(rows >= 0 && cols >= 0 && channels >= 1);
    }

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    int channels() const noexcept { return channels_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t cells() const noexcept { return static_cast<std::size_t>(rows_) * cols_; }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int r, int c, int ch = 0) noexcept { return data_[index(r, c, ch)]; }
    const T& operator()(int r, int c, int ch = 0) const noexcept { return data_[index(r, c, ch)]; }

    std::span<T> cell(int r, int c) noexcept {
        return {data_.data() + index(r, c, 0), static_cast<std::size_t>(channels_)};
    }
    std::span<const T> cell(int r, int c) const noexcept {
        return {data_.data() + index(r, c, 0), static_cast<std::size_t>(channels_)};
    }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    bool in_bounds(int r, int c) const noexcept { return r >= 0 && c >= 0 && r < rows_ && c < cols_; }

    template <typename U>
    bool same_shape(const Grid<U>& other) const noexcept {
        return rows_ == other.rows() && cols_ == other.cols() && channels_ == other.channels();
    }
    template <typename U>
    bool same_extent(const Grid<U>& other) const noexcept {
        return rows_ == other.rows() && cols_ == other.cols();
    }

    friend bool operator==(const Grid& a, const Grid& b) = default;

private:
    std::size_t index(int r, int c, int ch) const noexcept {
        assert(in_bounds(r, c) && ch >= 0 && ch < channels_);
        return (static_cast<std::size_t>(r) * cols_ + c) * channels_ + ch;
    }

    int rows_ = 0;
    int cols_ = 0;
    int channels_ = 1;
    std::vector<T> data_;
};

struct Cell {
    int row = 0;
    int col = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

}  // namespace objectadd

#include "gridcpd/grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace gridcpd {

namespace {

// floor(log2(x)) for x >= 1.
int floor_log2(std::int64_t x) {
    int k = -1;
    while (x > 0) {
        x >>= 1;
        ++k;
    }
    return k;
}

}  // namespace

std::vector<std::int64_t> dynamic_grid(std::int64_t t) {
    if (t < 2) throw std::domain_error("dynamic_grid: t must be >= 2");
    const std::int64_t n = t - 1;
    std::vector<std::int64_t> grid{1};

    // Left contributions: j = 1, ..., floor(log2((t-1)/3)) + 1. Since j ranges
    // over integers and 2^k <= (t-1)/3 iff 3*2^k <= t-1, integer division is
    // exact here.
    if (n >= 3) {
        const int j_left = floor_log2(n / 3) + 1;
        for (int j = 1; j <= j_left; ++j) {
            const std::int64_t half = std::int64_t{1} << (j - 1);
            grid.push_back((std::int64_t{1} << j) + (n % half));
        }
    }
    // Right contributions: j = 1, ..., floor(log2(t-1)) - 1.
    const int j_right = floor_log2(n) - 1;
    for (int j = 1; j <= j_right; ++j) {
        const std::int64_t half = std::int64_t{1} << (j - 1);
        grid.push_back((std::int64_t{1} << j) + (n % half) + half);
    }

    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

std::vector<std::int64_t> static_grid(std::int64_t t) {
    if (t < 2) throw std::domain_error("static_grid: t must be >= 2");
    std::vector<std::int64_t> grid;
    for (std::int64_t g = 1; g <= t - 1; g <<= 1) grid.push_back(g);
    return grid;
}

GridState make_grid_state(std::int64_t t) {
    return GridState{t, dynamic_grid(t)};
}

std::vector<std::int64_t> summary_indices(const GridState& state) {
    std::vector<std::int64_t> idx(state.elements.size());
    for (std::size_t i = 0; i < state.elements.size(); ++i) {
        idx[i] = state.t - state.elements[state.elements.size() - 1 - i];
    }
    return idx;
}

std::pair<GridState, GridDelta> advance(const GridState& state) {
    GridState next = make_grid_state(state.t + 1);

    const std::vector<std::int64_t> prev_idx = summary_indices(state);
    std::vector<std::int64_t> next_idx = summary_indices(next);

    GridDelta delta;
    delta.added = state.t;  // index of g = 1 in the new grid
    for (std::int64_t j : prev_idx) {
        if (std::binary_search(next_idx.begin(), next_idx.end(), j)) {
            delta.retained.push_back(j);
        } else {
            delta.evicted.push_back(j);
        }
    }
    return {std::move(next), std::move(delta)};
}

}  // namespace gridcpd

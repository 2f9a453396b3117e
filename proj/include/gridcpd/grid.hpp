#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace gridcpd {

// Candidate-lag grids for online changepoint scanning. All construction is
// integer arithmetic; powers of two come from bit shifts, so the grids are
// exact at every t (including t-1 a power of two).

// Dynamic geometric grid G^(t): {1} plus two elements per dyadic interval
// [2^j, 2^{j+1}-1], with the left/right contributions shifting cyclically as
// t increments so that the reversed indices t - G^(t) stay in place.
std::vector<std::int64_t> dynamic_grid(std::int64_t t);

// Static geometric grid {1, 2, 4, ..., 2^floor(log2(t-1))}.
std::vector<std::int64_t> static_grid(std::int64_t t);

struct GridState {
    std::int64_t t = 2;
    std::vector<std::int64_t> elements;  // strictly increasing, in [1, t-1]
};

// Bookkeeping handed to the summary store when t increments. Indices are
// absolute positions j = t - g of stored cumulative sums.
struct GridDelta {
    std::vector<std::int64_t> retained;  // still needed at t+1
    std::vector<std::int64_t> evicted;   // never requested by any future grid
    std::int64_t added = 0;              // the new index t
};

GridState make_grid_state(std::int64_t t);

// Reversed grid t - G^(t), ascending.
std::vector<std::int64_t> summary_indices(const GridState& state);

// Step from t to t+1. The new index set equals retained ∪ {added} exactly.
std::pair<GridState, GridDelta> advance(const GridState& state);

}  // namespace gridcpd

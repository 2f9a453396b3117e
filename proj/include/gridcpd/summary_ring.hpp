#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "gridcpd/grid.hpp"

namespace gridcpd {

// Prefix and suffix sums of the summary map around a candidate changepoint:
// prefix = sum_{i <= t-g} h(Y_i), suffix = sum_{i > t-g} h(Y_i).
struct SegmentSums {
    std::vector<double> prefix;
    std::vector<double> suffix;
    std::int64_t g = 0;
    std::int64_t t = 0;
};

// Recyclable store of cumulative summary statistics. After t pushes it holds
// exactly {S_j : j in t - G^(t)} plus the running total S_t, so the stored
// scalar count is at most dim * (|G^(t)| + 1). Raw observations are never
// retained. Accumulation is plain sequential double summation, giving a
// single canonical accumulation order.
class SummaryRing {
public:
    explicit SummaryRing(std::size_t dim);

    void push(std::span<const double> h_value);
    SegmentSums segment_sums(std::int64_t g) const;

    std::int64_t time() const { return t_; }
    std::size_t dim() const { return dim_; }
    const std::vector<double>& total() const { return total_; }

    // Current grid G^(t); only meaningful once t >= 2.
    const std::vector<std::int64_t>& grid() const { return grid_.elements; }

    std::size_t stored_scalars() const;
    void clear();

private:
    std::size_t dim_;
    std::int64_t t_ = 0;
    std::vector<double> total_;
    GridState grid_;
    std::unordered_map<std::int64_t, std::vector<double>> slots_;
};

// Dense store of all prefix sums S_1, ..., S_t. Reference counterpart of
// SummaryRing for the static-grid and full-scan detectors; storage grows
// linearly, so callers must cap the horizon.
class DensePrefixStore {
public:
    explicit DensePrefixStore(std::size_t dim);

    void push(std::span<const double> h_value);
    SegmentSums segment_sums(std::int64_t g) const;

    std::int64_t time() const { return t_; }
    std::size_t dim() const { return dim_; }
    const std::vector<double>& total() const { return total_; }
    std::size_t stored_scalars() const { return sums_.size() + total_.size(); }
    void clear();

private:
    std::size_t dim_;
    std::int64_t t_ = 0;
    std::vector<double> total_;
    std::vector<double> sums_;  // S_j at offset (j-1)*dim
};

}  // namespace gridcpd

#include "gridcpd/summary_ring.hpp"

#include <stdexcept>

namespace gridcpd {

SummaryRing::SummaryRing(std::size_t dim) : dim_(dim), total_(dim, 0.0) {
    if (dim == 0) throw std::domain_error("SummaryRing: dim must be >= 1");
}

void SummaryRing::push(std::span<const double> h_value) {
    if (h_value.size() != dim_) {
        throw std::invalid_argument("SummaryRing::push: dimension mismatch");
    }
    // Freeze S_t before advancing; index t becomes the newest slot.
    if (t_ >= 1) slots_.emplace(t_, total_);
    ++t_;
    for (std::size_t i = 0; i < dim_; ++i) total_[i] += h_value[i];

    if (t_ == 2) {
        grid_ = make_grid_state(2);  // reversed grid {1}; slot 1 is present
    } else if (t_ > 2) {
        auto [next, delta] = advance(grid_);
        grid_ = std::move(next);
        for (std::int64_t j : delta.evicted) slots_.erase(j);
    }
}

SegmentSums SummaryRing::segment_sums(std::int64_t g) const {
    const auto it = slots_.find(t_ - g);
    if (it == slots_.end()) {
        throw std::out_of_range("SummaryRing::segment_sums: g not in current grid");
    }
    SegmentSums out;
    out.g = g;
    out.t = t_;
    out.prefix = it->second;
    out.suffix.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out.suffix[i] = total_[i] - out.prefix[i];
    return out;
}

std::size_t SummaryRing::stored_scalars() const {
    return (slots_.size() + 1) * dim_;
}

void SummaryRing::clear() {
    t_ = 0;
    total_.assign(dim_, 0.0);
    slots_.clear();
    grid_ = GridState{};
}

DensePrefixStore::DensePrefixStore(std::size_t dim) : dim_(dim), total_(dim, 0.0) {
    if (dim == 0) throw std::domain_error("DensePrefixStore: dim must be >= 1");
}

void DensePrefixStore::push(std::span<const double> h_value) {
    if (h_value.size() != dim_) {
        throw std::invalid_argument("DensePrefixStore::push: dimension mismatch");
    }
    ++t_;
    for (std::size_t i = 0; i < dim_; ++i) total_[i] += h_value[i];
    sums_.insert(sums_.end(), total_.begin(), total_.end());
}

SegmentSums DensePrefixStore::segment_sums(std::int64_t g) const {
    if (g < 1 || g >= t_) {
        throw std::out_of_range("DensePrefixStore::segment_sums: g out of range");
    }
    const std::size_t off = static_cast<std::size_t>(t_ - g - 1) * dim_;
    SegmentSums out;
    out.g = g;
    out.t = t_;
    out.prefix.assign(sums_.begin() + off, sums_.begin() + off + dim_);
    out.suffix.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out.suffix[i] = total_[i] - out.prefix[i];
    return out;
}

void DensePrefixStore::clear() {
    t_ = 0;
    total_.assign(dim_, 0.0);
    sums_.clear();
}

}  // namespace gridcpd

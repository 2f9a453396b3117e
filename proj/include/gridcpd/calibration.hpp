#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gridcpd/detector.hpp"
#include "gridcpd/streams.hpp"

namespace gridcpd {

struct CalibrationSpec {
    DetectorConfig config;     // kind + fixed skeleton; lambda fields ignored
    StreamSpec null_model;     // no changepoint
    std::int64_t n = 0;        // horizon N
    std::int64_t replications = 0;  // K, >= 100
    double alpha = 0.05;       // target finite-horizon false-alarm probability
    std::uint64_t seed = 1;
    int threads = 1;
};

struct CalibrationReport {
    double lambda = 0.0;                  // leading constant (dense one for chad)
    std::optional<double> lambda_sparse;  // chad calibrated mode only
    std::vector<double> samples;          // per-replication max scores, ascending
    std::vector<double> sparse_samples;
    std::int64_t quantile_index = 0;  // 1-based order statistic ceil((1-share)K)
    bool degenerate = false;          // all-equal samples, or nonpositive quantile
    bool sparse_branch_empty = false;
    std::uint64_t seed = 0;
    double runtime_seconds = 0.0;
};

// Monte Carlo selection of the leading constant: for each of K seeded null
// streams, record the max over t in [2,N] and g in G^(t) (and sparsity s for
// chad) of statistic/shape, then take the upper-alpha empirical quantile as
// the k-th order statistic with k = ceil((1-alpha)K). Chad in calibrated
// mode splits alpha evenly between its dense and sparse branches.
// Deterministic given (spec, seed) for any thread count.
CalibrationReport calibrate(const CalibrationSpec& spec);

// Chad-specific wrapper returning the (lambda_dense, lambda_sparse) pair.
CalibrationReport calibrate_chad(const CalibrationSpec& spec);

}  // namespace gridcpd

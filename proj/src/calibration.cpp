#include "gridcpd/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gridcpd/parallel.hpp"

namespace gridcpd {

namespace {

// 1-based order statistic index for the upper-alpha empirical quantile.
std::int64_t quantile_index(double alpha_share, std::int64_t k) {
    return static_cast<std::int64_t>(
        std::ceil((1.0 - alpha_share) * static_cast<double>(k)));
}

double order_statistic(std::vector<double>& samples, std::int64_t idx) {
    std::sort(samples.begin(), samples.end());
    return samples[static_cast<std::size_t>(idx - 1)];
}

}  // namespace

CalibrationReport calibrate(const CalibrationSpec& spec) {
    if (spec.replications < 100) {
        throw std::invalid_argument("calibrate: K must be >= 100");
    }
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) {
        throw std::invalid_argument("calibrate: alpha must be in (0,1)");
    }
    if (spec.n < 2) throw std::invalid_argument("calibrate: N must be >= 2");
    if (spec.null_model.tau) {
        throw std::invalid_argument("calibrate: null model must have no changepoint");
    }
    const auto start = std::chrono::steady_clock::now();

    const bool split = spec.config.kind == DetectorKind::chad_mean &&
                       spec.config.mode == ThresholdMode::calibrated;

    // Scan with alarms disabled: the scores divide the leading constant out.
    DetectorConfig scan_cfg = spec.config;
    scan_cfg.lambda = scan_cfg.lambda_dense = scan_cfg.lambda_sparse = 1e300;

    StreamSpec null_model = spec.null_model;
    null_model.n = spec.n;

    const std::int64_t k = spec.replications;
    std::vector<double> primary(static_cast<std::size_t>(k));
    std::vector<double> sparse(static_cast<std::size_t>(k),
                               -std::numeric_limits<double>::infinity());

    parallel_for(k, spec.threads, [&](std::int64_t r) {
        StreamSampler sampler(null_model, spec.seed + static_cast<std::uint64_t>(r));
        Detector detector(scan_cfg);
        std::vector<double> y;
        double best = -std::numeric_limits<double>::infinity();
        double best_sparse = -std::numeric_limits<double>::infinity();
        bool any_sparse = false;
        while (sampler.next(y)) {
            detector.step(y);
            if (detector.time() < 2) continue;
            const CalibrationScores s = detector.calibration_scores();
            best = std::max(best, s.primary);
            if (s.sparse) {
                best_sparse = std::max(best_sparse, *s.sparse);
                any_sparse = true;
            }
        }
        primary[static_cast<std::size_t>(r)] = best;
        if (any_sparse) sparse[static_cast<std::size_t>(r)] = best_sparse;
    });
    const bool saw_sparse =
        std::any_of(sparse.begin(), sparse.end(),
                    [](double v) { return std::isfinite(v); });

    CalibrationReport report;
    report.seed = spec.seed;
    const double share = split && saw_sparse ? spec.alpha / 2.0 : spec.alpha;
    report.quantile_index = quantile_index(share, k);
    report.lambda = order_statistic(primary, report.quantile_index);
    report.samples = primary;  // sorted by order_statistic
    if (split) {
        if (saw_sparse) {
            report.lambda_sparse = order_statistic(sparse, report.quantile_index);
            report.sparse_samples = sparse;
        } else {
            report.sparse_branch_empty = true;
            report.lambda_sparse = report.lambda;
        }
    }

    if (report.samples.front() == report.samples.back()) report.degenerate = true;
    if (!(report.lambda > 0.0) ||
        (report.lambda_sparse && !(*report.lambda_sparse > 0.0))) {
        report.degenerate = true;
    }
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

CalibrationReport calibrate_chad(const CalibrationSpec& spec) {
    if (spec.config.kind != DetectorKind::chad_mean ||
        spec.config.mode != ThresholdMode::calibrated) {
        throw std::invalid_argument(
            "calibrate_chad: requires chad_mean in calibrated mode");
    }
    return calibrate(spec);
}

}  // namespace gridcpd

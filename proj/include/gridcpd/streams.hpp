#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridcpd/detector.hpp"
#include "gridcpd/rng.hpp"

namespace gridcpd {

enum class StreamKind { gauss_mean, gauss_cov, poisson };

StreamKind parse_stream_kind(const std::string& s);
std::string to_string(StreamKind kind);

// Generative model for simulation and calibration. Observations are i.i.d.
// from the pre-change model for i <= tau and from the post-change model
// after; tau absent means no change.
struct StreamSpec {
    StreamKind kind = StreamKind::gauss_mean;
    std::int64_t p = 1;
    std::optional<std::int64_t> tau;
    std::int64_t n = 0;  // horizon N

    // gauss_mean: pre-change mean mu1 (zeros when empty), post-change mean
    // mu1 + phi * k^{-1/2} * (1_k, 0_{p-k}), noise N(0, sigma^2 I).
    std::vector<double> mu1;
    double phi = 0.0;
    std::int64_t k = 1;
    double sigma = 1.0;

    // gauss_cov: N(0, Sigma). Empty matrices mean the identity; cov_scale
    // applies Sigma2 = cov_scale * Sigma1 when sigma2 is empty.
    std::vector<double> sigma1;  // row-major p*p, PSD
    std::vector<double> sigma2;
    double cov_scale = 1.0;

    // poisson
    double rate1 = 1.0;
    double rate2 = 1.0;
};

// Draws one observation per next() call; deterministic given (spec, seed).
class StreamSampler {
public:
    StreamSampler(const StreamSpec& spec, std::uint64_t seed);
    bool next(std::vector<double>& y);  // false past the horizon
    std::int64_t position() const { return i_; }

private:
    StreamSpec spec_;
    Rng rng_;
    std::int64_t i_ = 0;
    std::vector<double> mu2_;
    std::vector<double> chol1_, chol2_;  // lower factors for gauss_cov
    std::vector<double> z_;
};

std::vector<std::vector<double>> gen_stream(const StreamSpec& spec, std::uint64_t seed);

struct DelayReport {
    std::int64_t runs = 0;
    std::int64_t detected = 0;      // tau_hat in (tau, N]
    std::int64_t premature = 0;     // tau_hat <= tau
    std::int64_t no_detection = 0;  // no alarm by N
    bool delay_defined = false;
    // E(tau_hat ^ N - tau | tau_hat > tau): no-alarm runs contribute N - tau,
    // premature runs are excluded.
    double mean_conditional_delay = 0.0;
    double false_alarm_rate = 0.0;  // premature/runs with a change, alarms/runs on null
    std::vector<std::optional<std::int64_t>> alarm_times;
};

DelayReport estimate_delay(const DetectorConfig& config, const StreamSpec& spec,
                           std::int64_t runs, std::uint64_t seed, int threads = 1);

struct CostPoint {
    std::int64_t t = 0;
    double update_seconds = 0.0;  // mean over the trailing 200 updates
    std::size_t stored_scalars = 0;
};

// Streams null data through the detector (alarms suppressed) and samples
// per-update wall time and stored-scalar counts at each checkpoint.
std::vector<CostPoint> benchmark_costs(const DetectorConfig& config,
                                       const StreamSpec& null_model,
                                       const std::vector<std::int64_t>& checkpoints,
                                       int repetitions, std::uint64_t seed);

}  // namespace gridcpd

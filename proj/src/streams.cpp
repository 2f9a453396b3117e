#include "gridcpd/streams.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "gridcpd/kernels.hpp"
#include "gridcpd/parallel.hpp"

namespace gridcpd {

StreamKind parse_stream_kind(const std::string& s) {
    if (s == "gauss_mean") return StreamKind::gauss_mean;
    if (s == "gauss_cov") return StreamKind::gauss_cov;
    if (s == "poisson") return StreamKind::poisson;
    throw std::invalid_argument("unknown stream kind: " + s);
}

std::string to_string(StreamKind kind) {
    switch (kind) {
        case StreamKind::gauss_mean: return "gauss_mean";
        case StreamKind::gauss_cov: return "gauss_cov";
        case StreamKind::poisson: return "poisson";
    }
    return "?";
}

namespace {

std::vector<double> chol_or_identity(const std::vector<double>& flat, std::int64_t p) {
    const std::size_t sp = static_cast<std::size_t>(p);
    if (flat.empty()) {
        std::vector<double> eye(sp * sp, 0.0);
        for (std::size_t i = 0; i < sp; ++i) eye[i * sp + i] = 1.0;
        return eye;
    }
    return cholesky_lower(SymMatrix::from_flat(sp, flat));
}

}  // namespace

StreamSampler::StreamSampler(const StreamSpec& spec, std::uint64_t seed)
    : spec_(spec), rng_(seed) {
    if (spec_.p < 1) throw std::invalid_argument("StreamSpec: p must be >= 1");
    if (spec_.tau && *spec_.tau >= spec_.n) {
        throw std::invalid_argument("StreamSpec: tau must be < N");
    }
    const std::size_t p = static_cast<std::size_t>(spec_.p);
    switch (spec_.kind) {
        case StreamKind::gauss_mean: {
            if (spec_.k < 1 || spec_.k > spec_.p) {
                throw std::invalid_argument("StreamSpec: k must be in [1, p]");
            }
            if (spec_.phi < 0.0) throw std::invalid_argument("StreamSpec: phi must be >= 0");
            mu2_ = spec_.mu1.empty() ? std::vector<double>(p, 0.0) : spec_.mu1;
            if (mu2_.size() != p) throw std::invalid_argument("StreamSpec: mu1 size mismatch");
            const double bump = spec_.phi / std::sqrt(static_cast<double>(spec_.k));
            for (std::int64_t j = 0; j < spec_.k; ++j) mu2_[j] += bump;
            break;
        }
        case StreamKind::gauss_cov: {
            chol1_ = chol_or_identity(spec_.sigma1, spec_.p);
            if (spec_.sigma2.empty()) {
                chol2_ = chol1_;
                const double c = std::sqrt(spec_.cov_scale);
                for (double& v : chol2_) v *= c;
            } else {
                chol2_ = chol_or_identity(spec_.sigma2, spec_.p);
            }
            z_.resize(p);
            break;
        }
        case StreamKind::poisson:
            if (spec_.p != 1) throw std::invalid_argument("StreamSpec: poisson requires p = 1");
            break;
    }
}

bool StreamSampler::next(std::vector<double>& y) {
    if (i_ >= spec_.n) return false;
    ++i_;
    const bool post = spec_.tau && i_ > *spec_.tau;
    const std::size_t p = static_cast<std::size_t>(spec_.p);
    y.resize(p);
    switch (spec_.kind) {
        case StreamKind::gauss_mean: {
            for (std::size_t j = 0; j < p; ++j) {
                const double mean = post ? mu2_[j] : (spec_.mu1.empty() ? 0.0 : spec_.mu1[j]);
                y[j] = mean + spec_.sigma * rng_.gaussian();
            }
            break;
        }
        case StreamKind::gauss_cov: {
            const std::vector<double>& l = post ? chol2_ : chol1_;
            for (std::size_t j = 0; j < p; ++j) z_[j] = rng_.gaussian();
            for (std::size_t i = 0; i < p; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j <= i; ++j) s += l[i * p + j] * z_[j];
                y[i] = s;
            }
            break;
        }
        case StreamKind::poisson:
            y[0] = static_cast<double>(rng_.poisson(post ? spec_.rate2 : spec_.rate1));
            break;
    }
    return true;
}

std::vector<std::vector<double>> gen_stream(const StreamSpec& spec, std::uint64_t seed) {
    StreamSampler sampler(spec, seed);
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(spec.n));
    std::vector<double> y;
    while (sampler.next(y)) out.push_back(y);
    return out;
}

DelayReport estimate_delay(const DetectorConfig& config, const StreamSpec& spec,
                           std::int64_t runs, std::uint64_t seed, int threads) {
    if (runs < 1) throw std::invalid_argument("estimate_delay: runs must be >= 1");
    DelayReport report;
    report.runs = runs;
    report.alarm_times.resize(static_cast<std::size_t>(runs));

    parallel_for(runs, threads, [&](std::int64_t r) {
        StreamSampler sampler(spec, seed + static_cast<std::uint64_t>(r));
        Detector detector(config);
        report.alarm_times[static_cast<std::size_t>(r)] = run_to_alarm(
            detector, [&](std::vector<double>& y) { return sampler.next(y); }, spec.n);
    });

    std::int64_t alarms = 0;
    double delay_sum = 0.0;
    std::int64_t delay_count = 0;
    for (const auto& at : report.alarm_times) {
        if (at) ++alarms;
        if (!spec.tau) continue;
        const std::int64_t tau = *spec.tau;
        if (at && *at <= tau) {
            ++report.premature;
        } else {
            const std::int64_t stop = at ? *at : spec.n;
            if (at) {
                ++report.detected;
            } else {
                ++report.no_detection;
            }
            delay_sum += static_cast<double>(stop - tau);
            ++delay_count;
        }
    }
    report.false_alarm_rate =
        static_cast<double>(spec.tau ? report.premature : alarms) / static_cast<double>(runs);
    if (spec.tau && delay_count > 0) {
        report.delay_defined = true;
        report.mean_conditional_delay = delay_sum / static_cast<double>(delay_count);
    }
    return report;
}

std::vector<CostPoint> benchmark_costs(const DetectorConfig& config,
                                       const StreamSpec& null_model,
                                       const std::vector<std::int64_t>& checkpoints,
                                       int repetitions, std::uint64_t seed) {
    if (checkpoints.empty()) return {};
    for (std::size_t i = 1; i < checkpoints.size(); ++i) {
        if (checkpoints[i] <= checkpoints[i - 1]) {
            throw std::invalid_argument("benchmark_costs: checkpoints must be ascending");
        }
    }
    constexpr std::int64_t kWindow = 200;

    // Alarms would truncate the run, so they are disabled outright.
    DetectorConfig cfg = config;
    cfg.lambda = cfg.lambda_dense = cfg.lambda_sparse = 1e300;

    std::vector<CostPoint> points(checkpoints.size());
    for (std::size_t c = 0; c < checkpoints.size(); ++c) points[c].t = checkpoints[c];

    StreamSpec spec = null_model;
    spec.n = checkpoints.back();

    for (int rep = 0; rep < repetitions; ++rep) {
        StreamSampler sampler(spec, seed + static_cast<std::uint64_t>(rep));
        Detector detector(cfg);
        std::vector<double> y;
        std::size_t next_cp = 0;
        double window_seconds = 0.0;
        while (sampler.next(y)) {
            const auto start = std::chrono::steady_clock::now();
            detector.step(y);
            const auto end = std::chrono::steady_clock::now();
            const std::int64_t t = detector.time();
            if (t > checkpoints[next_cp] - kWindow) {
                window_seconds += std::chrono::duration<double>(end - start).count();
            }
            if (t == checkpoints[next_cp]) {
                const std::int64_t w = std::min(kWindow, t);
                points[next_cp].update_seconds +=
                    window_seconds / (static_cast<double>(w) * repetitions);
                points[next_cp].stored_scalars = detector.stored_scalars();
                window_seconds = 0.0;
                if (++next_cp == checkpoints.size()) break;
            }
        }
    }
    return points;
}

}  // namespace gridcpd

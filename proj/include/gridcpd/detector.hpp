#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridcpd/expfam.hpp"
#include "gridcpd/summary_ring.hpp"

namespace gridcpd {

enum class DetectorKind { uni_mean, chad_mean, cov_opnorm, poisson_rate, expfam_lr };
enum class GridKind { dynamic, static_geometric, full_scan };
enum class ThresholdMode { theory, calibrated };

DetectorKind parse_detector_kind(const std::string& s);
std::string to_string(DetectorKind kind);

struct DetectorConfig {
    DetectorKind kind = DetectorKind::uni_mean;
    std::int64_t p = 1;
    double delta = 0.05;          // target false-alarm probability
    double lambda = 1.0;          // leading threshold constant
    double lambda_dense = 1.0;    // chad calibrated mode, dense branch
    double lambda_sparse = 1.0;   // chad calibrated mode, sparse branch
    double sigma = 1.0;           // known noise scale (uni/chad)
    ThresholdMode mode = ThresholdMode::theory;
    bool known_pre_mean = false;
    GridKind grid_kind = GridKind::dynamic;
    // Pre-estimated noise level replacing the running opnorm estimate in the
    // covariance detector; this is sigma^2 = ||Cov(Y)||_op.
    std::optional<double> sigma_cov_fixed;
    // Required for non-dynamic grids, which store all prefix sums.
    std::int64_t horizon_cap = 0;
    std::shared_ptr<const ExpFamModel> model;  // expfam_lr only
    std::string id;
};

struct Decision {
    std::int64_t t = 0;
    bool alarmed = false;
    std::int64_t trigger_g = 0;  // maximizing lag; meaningful once t >= 2
    double statistic = 0.0;
    double threshold = 0.0;
    std::string detector_id;
};

// Per-step scores with the leading constants divided out, used by Monte
// Carlo calibration. `sparse` is only populated by the chad detector, whose
// dense/sparse branches are calibrated separately.
struct CalibrationScores {
    double primary = 0.0;
    std::optional<double> sparse;
};

// Single-changepoint online detector. step() pushes one observation and
// scans the current candidate grid; after an alarm further steps are
// rejected until reset(). Auto-restart policies live in the CLI.
class Detector {
public:
    explicit Detector(DetectorConfig cfg);

    Decision step(std::span<const double> y);
    void reset();

    std::int64_t time() const { return t_; }
    const DetectorConfig& config() const { return cfg_; }
    std::optional<std::int64_t> alarmed_at() const { return alarmed_at_; }
    std::size_t stored_scalars() const;

    std::vector<std::int64_t> current_grid() const;

    // Statistic and threshold at one lag of the current grid; exposed for
    // oracle tests and the calibration scan.
    std::pair<double, double> stat_and_threshold(std::int64_t g) const;

    // Max over the current grid (and sparsity levels) of statistic/shape.
    CalibrationScores calibration_scores() const;

private:
    SegmentSums sums_at(std::int64_t g) const;
    std::vector<double> observation_summary(std::span<const double> y) const;

    DetectorConfig cfg_;
    std::size_t summary_dim_;
    std::optional<SummaryRing> ring_;
    std::optional<DensePrefixStore> dense_;
    std::int64_t t_ = 0;
    std::optional<std::int64_t> alarmed_at_;
};

// Statistic kernels shared by Detector and the test oracles. Each takes the
// segment sums around the candidate split; t and g are carried inside.
double uni_mean_stat(const SegmentSums& ss, const DetectorConfig& cfg);
double uni_mean_threshold(std::int64_t t, const DetectorConfig& cfg);

struct ChadStat {
    double statistic = 0.0;   // max_s A_{s,g} / xi_s; alarm threshold is 1
    std::int64_t s_star = 0;  // maximizing sparsity level
};
ChadStat chad_mean_stat(const SegmentSums& ss, const DetectorConfig& cfg);

double cov_stat(const SegmentSums& ss, const DetectorConfig& cfg);
double poisson_stat(const SegmentSums& ss);
double expfam_lr_stat(const SegmentSums& ss, const ExpFamModel& model);

// Feed observations until the first alarm or the horizon. `next` fills the
// observation for the coming step and returns false on end of stream.
std::optional<std::int64_t> run_to_alarm(
    Detector& detector,
    const std::function<bool(std::vector<double>&)>& next,
    std::int64_t horizon);

}  // namespace gridcpd

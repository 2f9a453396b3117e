#include "gridcpd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gridcpd/kernels.hpp"

namespace gridcpd {

namespace {

constexpr std::int64_t kMaxDenseHorizon = 100000;

void validate(const DetectorConfig& cfg) {
    if (cfg.p < 1) throw std::invalid_argument("DetectorConfig: p must be >= 1");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
        throw std::invalid_argument("DetectorConfig: delta must be in (0,1)");
    }
    if (!(cfg.lambda > 0.0 && cfg.lambda_dense > 0.0 && cfg.lambda_sparse > 0.0)) {
        throw std::invalid_argument("DetectorConfig: lambda constants must be > 0");
    }
    if (!(cfg.sigma > 0.0)) throw std::invalid_argument("DetectorConfig: sigma must be > 0");
    if (cfg.grid_kind != GridKind::dynamic &&
        (cfg.horizon_cap < 2 || cfg.horizon_cap > kMaxDenseHorizon)) {
        throw std::invalid_argument(
            "DetectorConfig: static/full grids need horizon_cap in [2, 1e5]");
    }
    if (cfg.kind == DetectorKind::expfam_lr && !cfg.model) {
        throw std::invalid_argument("DetectorConfig: expfam_lr requires a model");
    }
}

std::vector<double> cusum_vector(const SegmentSums& ss, const DetectorConfig& cfg) {
    if (cfg.known_pre_mean) return cusum_known_mean(ss.suffix, ss.g);
    std::vector<double> total(ss.prefix.size());
    for (std::size_t i = 0; i < total.size(); ++i) total[i] = ss.prefix[i] + ss.suffix[i];
    return cusum(ss.prefix, total, ss.t, ss.g);
}

// Per-t tables for the sparsity-adaptive mean statistic. Calibrated mode
// freezes everything at t = 2 so the critical value is flat in t.
struct ChadTables {
    std::vector<std::int64_t> s;
    std::vector<double> a;       // truncation level a(s, .)
    std::vector<double> nu_a;    // centering E[Z^2 | |Z| > a]
    std::vector<double> shape;   // z(s,p,t) or z~(s,p,2)
    std::vector<double> xi;      // lambda * shape
    std::vector<bool> sparse;    // branch flag for split calibration
};

ChadTables make_chad_tables(std::int64_t t, const DetectorConfig& cfg) {
    ChadTables tab;
    const bool calibrated = cfg.mode == ThresholdMode::calibrated;
    const std::int64_t t_eff = calibrated ? 2 : t;
    const double ln_t = std::log(static_cast<double>(t_eff));
    const double boundary = std::sqrt(static_cast<double>(cfg.p) * ln_t);
    tab.s = sparsity_grid(cfg.p, t_eff);
    for (std::int64_t s : tab.s) {
        const double a = threshold_a(s, cfg.p, t_eff);
        const bool is_sparse = static_cast<double>(s) <= boundary;
        tab.a.push_back(a);
        tab.nu_a.push_back(nu(a));
        const double shape = calibrated ? rate_z_tilde(s, cfg.p, 2) : rate_z(s, cfg.p, t_eff);
        tab.shape.push_back(shape);
        const double lambda = calibrated
                                  ? (is_sparse ? cfg.lambda_sparse : cfg.lambda_dense)
                                  : cfg.lambda;
        tab.xi.push_back(lambda * shape);
        tab.sparse.push_back(is_sparse);
    }
    return tab;
}

// A_{s,g} for every s at once: sort |C_j|/sigma descending, then each level
// is a prefix of the sorted coordinates.
std::vector<double> chad_a_values(const SegmentSums& ss, const DetectorConfig& cfg,
                                  const ChadTables& tab) {
    std::vector<double> c = cusum_vector(ss, cfg);
    for (double& x : c) x = std::abs(x) / cfg.sigma;
    std::sort(c.begin(), c.end(), std::greater<>());
    std::vector<double> sumsq(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) sumsq[i + 1] = sumsq[i] + c[i] * c[i];

    std::vector<double> a_values(tab.s.size());
    for (std::size_t k = 0; k < tab.s.size(); ++k) {
        // strict |C_j|/sigma > a per the indicator
        const std::size_t m =
            std::upper_bound(c.begin(), c.end(), tab.a[k], std::greater<>()) - c.begin();
        a_values[k] = sumsq[m] - static_cast<double>(m) * tab.nu_a[k];
    }
    return a_values;
}

ChadStat chad_stat_with_tables(const SegmentSums& ss, const DetectorConfig& cfg,
                               const ChadTables& tab) {
    const std::vector<double> a_values = chad_a_values(ss, cfg, tab);
    ChadStat best{-std::numeric_limits<double>::infinity(), tab.s.front()};
    for (std::size_t k = 0; k < tab.s.size(); ++k) {
        const double r = a_values[k] / tab.xi[k];
        if (r > best.statistic) best = ChadStat{r, tab.s[k]};
    }
    return best;
}

SymMatrix second_moment(std::span<const double> flat_sum, std::int64_t n, std::int64_t p) {
    SymMatrix m = SymMatrix::from_flat(static_cast<std::size_t>(p), flat_sum);
    m *= 1.0 / static_cast<double>(n);
    return m;
}

}  // namespace

DetectorKind parse_detector_kind(const std::string& s) {
    if (s == "uni_mean") return DetectorKind::uni_mean;
    if (s == "chad_mean") return DetectorKind::chad_mean;
    if (s == "cov_opnorm") return DetectorKind::cov_opnorm;
    if (s == "poisson_rate") return DetectorKind::poisson_rate;
    if (s == "expfam_lr") return DetectorKind::expfam_lr;
    throw std::invalid_argument("unknown detector kind: " + s);
}

std::string to_string(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::uni_mean: return "uni_mean";
        case DetectorKind::chad_mean: return "chad_mean";
        case DetectorKind::cov_opnorm: return "cov_opnorm";
        case DetectorKind::poisson_rate: return "poisson_rate";
        case DetectorKind::expfam_lr: return "expfam_lr";
    }
    return "?";
}

double uni_mean_stat(const SegmentSums& ss, const DetectorConfig& cfg) {
    const std::vector<double> c = cusum_vector(ss, cfg);
    return c[0] * c[0];
}

double uni_mean_threshold(std::int64_t t, const DetectorConfig& cfg) {
    const double s2 = cfg.sigma * cfg.sigma;
    const double l = std::log(static_cast<double>(t) / cfg.delta);
    if (cfg.mode == ThresholdMode::theory) return cfg.lambda * s2 * l;
    // Finite-horizon form 1 + lambda*(log(t/delta) + sqrt(log(t/delta))),
    // scaled by sigma^2 so the comparison stays scale equivariant.
    return s2 * (1.0 + cfg.lambda * (l + std::sqrt(l)));
}

ChadStat chad_mean_stat(const SegmentSums& ss, const DetectorConfig& cfg) {
    return chad_stat_with_tables(ss, cfg, make_chad_tables(ss.t, cfg));
}

double cov_stat(const SegmentSums& ss, const DetectorConfig& cfg) {
    const SymMatrix sigma1 = second_moment(ss.prefix, ss.t - ss.g, cfg.p);
    const SymMatrix sigma2 = second_moment(ss.suffix, ss.g, cfg.p);
    const double noise =
        cfg.sigma_cov_fixed ? *cfg.sigma_cov_fixed : sym_opnorm(sigma1);
    if (!(noise > 0.0)) {
        throw std::domain_error("cov_stat: degenerate pre-change noise estimate");
    }
    SymMatrix diff = sigma1;
    diff -= sigma2;
    return sym_opnorm(diff) / noise;
}

double poisson_stat(const SegmentSums& ss) {
    const auto xlogx_over = [](double x, double n) {
        return x == 0.0 ? 0.0 : x * std::log(x / n);
    };
    const double left = ss.prefix[0];
    const double right = ss.suffix[0];
    return xlogx_over(left, static_cast<double>(ss.t - ss.g)) +
           xlogx_over(right, static_cast<double>(ss.g)) -
           xlogx_over(left + right, static_cast<double>(ss.t));
}

double expfam_lr_stat(const SegmentSums& ss, const ExpFamModel& model) {
    const double n1 = static_cast<double>(ss.t - ss.g);
    const double n2 = static_cast<double>(ss.g);
    std::vector<double> m1(ss.prefix.size()), m2(ss.prefix.size()), m0(ss.prefix.size());
    for (std::size_t i = 0; i < ss.prefix.size(); ++i) {
        m1[i] = ss.prefix[i] / n1;
        m2[i] = ss.suffix[i] / n2;
        m0[i] = (ss.prefix[i] + ss.suffix[i]) / (n1 + n2);
    }
    return n1 * model.conjugate(m1) + n2 * model.conjugate(m2) -
           (n1 + n2) * model.conjugate(m0);
}

Detector::Detector(DetectorConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    switch (cfg_.kind) {
        case DetectorKind::uni_mean:
            if (cfg_.p != 1) throw std::invalid_argument("uni_mean requires p = 1");
            summary_dim_ = 1;
            break;
        case DetectorKind::chad_mean:
            summary_dim_ = static_cast<std::size_t>(cfg_.p);
            break;
        case DetectorKind::cov_opnorm:
            summary_dim_ = static_cast<std::size_t>(cfg_.p * cfg_.p);
            break;
        case DetectorKind::poisson_rate:
            if (cfg_.p != 1) throw std::invalid_argument("poisson_rate requires p = 1");
            summary_dim_ = 1;
            break;
        case DetectorKind::expfam_lr:
            summary_dim_ = cfg_.model->dim;
            break;
    }
    if (cfg_.grid_kind == GridKind::dynamic) {
        ring_.emplace(summary_dim_);
    } else {
        dense_.emplace(summary_dim_);
    }
}

std::vector<double> Detector::observation_summary(std::span<const double> y) const {
    switch (cfg_.kind) {
        case DetectorKind::uni_mean:
        case DetectorKind::chad_mean:
            return {y.begin(), y.end()};
        case DetectorKind::cov_opnorm: {
            const std::size_t p = static_cast<std::size_t>(cfg_.p);
            std::vector<double> h(p * p);
            for (std::size_t i = 0; i < p; ++i) {
                for (std::size_t j = 0; j < p; ++j) h[i * p + j] = y[i] * y[j];
            }
            return h;
        }
        case DetectorKind::poisson_rate: {
            if (y[0] < 0.0 || y[0] != std::floor(y[0])) {
                throw std::domain_error("poisson_rate: observations must be counts");
            }
            return {y[0]};
        }
        case DetectorKind::expfam_lr: {
            std::vector<double> h(cfg_.model->dim);
            cfg_.model->h(y, h);
            return h;
        }
    }
    throw std::logic_error("unreachable");
}

SegmentSums Detector::sums_at(std::int64_t g) const {
    return ring_ ? ring_->segment_sums(g) : dense_->segment_sums(g);
}

std::vector<std::int64_t> Detector::current_grid() const {
    if (t_ < 2) return {};
    switch (cfg_.grid_kind) {
        case GridKind::dynamic: return ring_->grid();
        case GridKind::static_geometric: return static_grid(t_);
        case GridKind::full_scan: {
            std::vector<std::int64_t> all(static_cast<std::size_t>(t_ - 1));
            for (std::int64_t g = 1; g < t_; ++g) all[g - 1] = g;
            return all;
        }
    }
    throw std::logic_error("unreachable");
}

std::pair<double, double> Detector::stat_and_threshold(std::int64_t g) const {
    const SegmentSums ss = sums_at(g);
    switch (cfg_.kind) {
        case DetectorKind::uni_mean:
            return {uni_mean_stat(ss, cfg_), uni_mean_threshold(t_, cfg_)};
        case DetectorKind::chad_mean:
            return {chad_mean_stat(ss, cfg_).statistic, 1.0};
        case DetectorKind::cov_opnorm:
            return {cov_stat(ss, cfg_), xi_cov(g, t_, cfg_.p, cfg_.lambda)};
        case DetectorKind::poisson_rate:
            return {poisson_stat(ss), cfg_.lambda};
        case DetectorKind::expfam_lr:
            return {expfam_lr_stat(ss, *cfg_.model), cfg_.lambda};
    }
    throw std::logic_error("unreachable");
}

Decision Detector::step(std::span<const double> y) {
    if (alarmed_at_) throw std::logic_error("Detector::step: detector already alarmed");
    if (y.size() != static_cast<std::size_t>(cfg_.p)) {
        throw std::invalid_argument("Detector::step: dimension mismatch");
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw std::domain_error("Detector::step: non-finite input");
    }
    if (cfg_.grid_kind != GridKind::dynamic && t_ >= cfg_.horizon_cap) {
        throw std::logic_error("Detector::step: horizon cap reached for dense grid");
    }

    const std::vector<double> h = observation_summary(y);
    if (ring_) {
        ring_->push(h);
        t_ = ring_->time();
    } else {
        dense_->push(h);
        t_ = dense_->time();
    }

    Decision d;
    d.t = t_;
    d.detector_id = cfg_.id;
    if (t_ < 2) return d;

    // chad tables depend only on t; build them once per step.
    std::optional<ChadTables> tables;
    if (cfg_.kind == DetectorKind::chad_mean) tables = make_chad_tables(t_, cfg_);

    double best_ratio = -std::numeric_limits<double>::infinity();
    for (std::int64_t g : current_grid()) {
        double stat, thr;
        if (tables) {
            stat = chad_stat_with_tables(sums_at(g), cfg_, *tables).statistic;
            thr = 1.0;
        } else {
            std::tie(stat, thr) = stat_and_threshold(g);
        }
        const double ratio = stat / thr;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            d.trigger_g = g;
            d.statistic = stat;
            d.threshold = thr;
        }
    }
    if (d.statistic > d.threshold) {  // strict: ties do not fire
        d.alarmed = true;
        alarmed_at_ = t_;
    }
    return d;
}

CalibrationScores Detector::calibration_scores() const {
    CalibrationScores out;
    out.primary = -std::numeric_limits<double>::infinity();
    if (t_ < 2) {
        out.primary = 0.0;
        return out;
    }

    if (cfg_.kind == DetectorKind::chad_mean) {
        const ChadTables tab = make_chad_tables(t_, cfg_);
        const bool split = cfg_.mode == ThresholdMode::calibrated;
        double sparse_best = -std::numeric_limits<double>::infinity();
        bool saw_sparse = false;
        for (std::int64_t g : current_grid()) {
            const std::vector<double> a_values = chad_a_values(sums_at(g), cfg_, tab);
            for (std::size_t k = 0; k < tab.s.size(); ++k) {
                const double score = a_values[k] / tab.shape[k];
                if (split && tab.sparse[k]) {
                    sparse_best = std::max(sparse_best, score);
                    saw_sparse = true;
                } else {
                    out.primary = std::max(out.primary, score);
                }
            }
        }
        if (saw_sparse) out.sparse = sparse_best;
        return out;
    }

    for (std::int64_t g : current_grid()) {
        const SegmentSums ss = sums_at(g);
        double score = 0.0;
        switch (cfg_.kind) {
            case DetectorKind::uni_mean: {
                const double c2 = uni_mean_stat(ss, cfg_) / (cfg_.sigma * cfg_.sigma);
                const double l = std::log(static_cast<double>(t_) / cfg_.delta);
                score = cfg_.mode == ThresholdMode::theory
                            ? c2 / l
                            : (c2 - 1.0) / (l + std::sqrt(l));
                break;
            }
            case DetectorKind::cov_opnorm:
                score = cov_stat(ss, cfg_) / xi_cov(g, t_, cfg_.p, 1.0);
                break;
            case DetectorKind::poisson_rate:
                score = poisson_stat(ss);
                break;
            case DetectorKind::expfam_lr:
                score = expfam_lr_stat(ss, *cfg_.model);
                break;
            case DetectorKind::chad_mean:
                break;  // handled above
        }
        out.primary = std::max(out.primary, score);
    }
    return out;
}

void Detector::reset() {
    if (ring_) ring_->clear();
    if (dense_) dense_->clear();
    t_ = 0;
    alarmed_at_.reset();
}

std::size_t Detector::stored_scalars() const {
    return ring_ ? ring_->stored_scalars() : dense_->stored_scalars();
}

std::optional<std::int64_t> run_to_alarm(
    Detector& detector,
    const std::function<bool(std::vector<double>&)>& next,
    std::int64_t horizon) {
    if (horizon < 1) throw std::invalid_argument("run_to_alarm: horizon must be >= 1");
    std::vector<double> y(static_cast<std::size_t>(detector.config().p));
    for (std::int64_t i = detector.time(); i < horizon; ++i) {
        if (!next(y)) return std::nullopt;
        if (detector.step(y).alarmed) return detector.time();
    }
    return std::nullopt;
}

}  // namespace gridcpd

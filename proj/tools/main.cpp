#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gridcpd/calibration.hpp"
#include "gridcpd/detector.hpp"
#include "gridcpd/grid.hpp"
#include "gridcpd/io.hpp"
#include "gridcpd/kernels.hpp"
#include "gridcpd/streams.hpp"

namespace {

using nlohmann::json;
using namespace gridcpd;

struct DetectorFlags {
    std::string kind = "uni_mean";
    std::int64_t p = 1;
    double delta = 0.05;
    double lambda = 1.0;
    double lambda1 = 1.0;  // chad dense
    double lambda2 = 1.0;  // chad sparse
    double sigma = 1.0;
    std::string mode = "calibrated";
    bool known_pre_mean = false;
    std::string grid = "dynamic";
    std::int64_t horizon_cap = 0;
    double sigma_cov_fixed = 0.0;  // 0 means unset
};

void add_detector_flags(CLI::App* cmd, DetectorFlags& f) {
    cmd->add_option("--kind", f.kind,
                    "uni_mean|chad_mean|cov_opnorm|poisson_rate|expfam_lr");
    cmd->add_option("--p", f.p, "data dimension");
    cmd->add_option("--delta", f.delta, "target false-alarm probability");
    cmd->add_option("--lambda", f.lambda, "leading threshold constant");
    cmd->add_option("--lambda1", f.lambda1, "chad dense-branch constant");
    cmd->add_option("--lambda2", f.lambda2, "chad sparse-branch constant");
    cmd->add_option("--sigma", f.sigma, "known noise scale");
    cmd->add_option("--mode", f.mode, "theory|calibrated");
    cmd->add_flag("--known-pre-mean", f.known_pre_mean, "pre-change mean is known zero");
    cmd->add_option("--grid", f.grid, "dynamic|static|full");
    cmd->add_option("--horizon-cap", f.horizon_cap, "required for static/full grids");
    cmd->add_option("--sigma-cov-fixed", f.sigma_cov_fixed,
                    "pre-estimated noise level (covariance detector)");
}

// Flat key=value config file; CLI flags override file values.
void load_config_file(const std::string& path, const CLI::App* cmd, DetectorFlags& f) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    const auto set_if_default = [&](const char* flag, auto& target, const std::string& v) {
        if (cmd->count(flag) == 0) {
            std::istringstream iss(v);
            iss >> target;
            if (iss.fail()) throw InputError("bad config value for " + std::string(flag));
        }
    };
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InputError("bad config line: " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "kind") set_if_default("--kind", f.kind, value);
        else if (key == "p") set_if_default("--p", f.p, value);
        else if (key == "delta") set_if_default("--delta", f.delta, value);
        else if (key == "lambda") set_if_default("--lambda", f.lambda, value);
        else if (key == "lambda1") set_if_default("--lambda1", f.lambda1, value);
        else if (key == "lambda2") set_if_default("--lambda2", f.lambda2, value);
        else if (key == "sigma") set_if_default("--sigma", f.sigma, value);
        else if (key == "mode") set_if_default("--mode", f.mode, value);
        else if (key == "known_pre_mean") set_if_default("--known-pre-mean", f.known_pre_mean, value);
        else if (key == "grid") set_if_default("--grid", f.grid, value);
        else if (key == "horizon_cap") set_if_default("--horizon-cap", f.horizon_cap, value);
        else if (key == "sigma_cov_fixed") set_if_default("--sigma-cov-fixed", f.sigma_cov_fixed, value);
        else throw InputError("unknown config key: " + key);
    }
}

DetectorConfig to_config(const DetectorFlags& f) {
    DetectorConfig cfg;
    cfg.kind = parse_detector_kind(f.kind);
    cfg.p = f.p;
    cfg.delta = f.delta;
    cfg.lambda = f.lambda;
    cfg.lambda_dense = f.lambda1;
    cfg.lambda_sparse = f.lambda2;
    cfg.sigma = f.sigma;
    if (f.mode == "theory") cfg.mode = ThresholdMode::theory;
    else if (f.mode == "calibrated") cfg.mode = ThresholdMode::calibrated;
    else throw InputError("unknown mode: " + f.mode);
    cfg.known_pre_mean = f.known_pre_mean;
    if (f.grid == "dynamic") cfg.grid_kind = GridKind::dynamic;
    else if (f.grid == "static") cfg.grid_kind = GridKind::static_geometric;
    else if (f.grid == "full") cfg.grid_kind = GridKind::full_scan;
    else throw InputError("unknown grid kind: " + f.grid);
    cfg.horizon_cap = f.horizon_cap;
    if (f.sigma_cov_fixed > 0.0) cfg.sigma_cov_fixed = f.sigma_cov_fixed;
    if (cfg.kind == DetectorKind::expfam_lr) {
        cfg.model = std::make_shared<ExpFamModel>(poisson_model());
        cfg.p = 1;
    }
    cfg.id = f.kind;
    return cfg;
}

StreamSpec null_stream_for(const DetectorConfig& cfg, double rate1) {
    StreamSpec spec;
    spec.p = cfg.p;
    switch (cfg.kind) {
        case DetectorKind::uni_mean:
        case DetectorKind::chad_mean:
            spec.kind = StreamKind::gauss_mean;
            spec.sigma = cfg.sigma;
            break;
        case DetectorKind::cov_opnorm:
            spec.kind = StreamKind::gauss_cov;
            break;
        case DetectorKind::poisson_rate:
        case DetectorKind::expfam_lr:
            spec.kind = StreamKind::poisson;
            spec.rate1 = spec.rate2 = rate1;
            break;
    }
    return spec;
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    return file;
}

int cmd_grid(std::int64_t t, bool use_static) {
    for (std::int64_t g : use_static ? static_grid(t) : dynamic_grid(t)) {
        std::cout << g << "\n";
    }
    return 0;
}

int cmd_calibrate(const DetectorFlags& flags, std::int64_t n, std::int64_t k,
                  double alpha, std::uint64_t seed, int threads, double rate1,
                  const std::string& out_path) {
    CalibrationSpec spec;
    spec.config = to_config(flags);
    spec.null_model = null_stream_for(spec.config, rate1);
    spec.n = n;
    spec.replications = k;
    spec.alpha = alpha;
    spec.seed = seed;
    spec.threads = threads;
    const CalibrationReport report = calibrate(spec);

    json doc;
    doc["kind"] = flags.kind;
    doc["mode"] = flags.mode;
    doc["p"] = flags.p;
    doc["N"] = n;
    doc["K"] = k;
    doc["alpha"] = alpha;
    doc["seed"] = seed;
    doc["lambda"] = report.lambda;
    if (report.lambda_sparse) {
        doc["lambda1"] = report.lambda;
        doc["lambda2"] = *report.lambda_sparse;
        doc["sparse_branch_empty"] = report.sparse_branch_empty;
    }
    doc["quantile_index"] = report.quantile_index;
    doc["degenerate"] = report.degenerate;
    doc["runtime_seconds"] = report.runtime_seconds;
    doc["sample_summary"] = {
        {"min", report.samples.front()},
        {"median", report.samples[report.samples.size() / 2]},
        {"max", report.samples.back()},
    };
    std::ofstream file;
    open_output(file, out_path) << doc.dump(2) << "\n";
    return 0;
}

int cmd_simulate(const DetectorFlags& flags, const std::string& stream_kind,
                 std::int64_t n, std::int64_t tau, std::int64_t runs,
                 const std::vector<double>& magnitudes, std::int64_t k_sparsity,
                 double rate1, std::uint64_t seed, int threads,
                 const std::string& out_path, const std::string& csv_path) {
    const DetectorConfig cfg = to_config(flags);
    json results = json::array();
    std::ofstream csv_file;
    std::ostream* csv = nullptr;
    if (!csv_path.empty()) {
        csv_file.open(csv_path);
        if (!csv_file) throw std::runtime_error("cannot open csv file: " + csv_path);
        csv = &csv_file;
    }

    for (double magnitude : magnitudes) {
        StreamSpec spec;
        spec.kind = parse_stream_kind(stream_kind);
        spec.p = cfg.p;
        spec.n = n;
        if (tau > 0) spec.tau = tau;
        spec.sigma = flags.sigma;
        spec.k = k_sparsity;
        switch (spec.kind) {
            case StreamKind::gauss_mean: spec.phi = magnitude; break;
            case StreamKind::gauss_cov: spec.cov_scale = magnitude; break;
            case StreamKind::poisson:
                spec.rate1 = rate1;
                spec.rate2 = magnitude;
                break;
        }
        const DelayReport report = estimate_delay(cfg, spec, runs, seed, threads);
        json entry;
        entry["magnitude"] = magnitude;
        entry["runs"] = report.runs;
        entry["detected"] = report.detected;
        entry["premature"] = report.premature;
        entry["no_detection"] = report.no_detection;
        entry["false_alarm_rate"] = report.false_alarm_rate;
        if (report.delay_defined) entry["mean_conditional_delay"] = report.mean_conditional_delay;
        results.push_back(entry);
        if (csv && report.delay_defined) {
            (*csv) << magnitude << "," << report.mean_conditional_delay << "\n";
        }
    }
    json doc;
    doc["detector"] = flags.kind;
    doc["stream"] = stream_kind;
    doc["N"] = n;
    doc["tau"] = tau;
    doc["seed"] = seed;
    doc["results"] = results;
    std::ofstream file;
    open_output(file, out_path) << doc.dump(2) << "\n";
    return 0;
}

int cmd_bench(const DetectorFlags& flags, const std::vector<std::int64_t>& checkpoints,
              int reps, double rate1, std::uint64_t seed,
              const std::string& out_path, const std::string& csv_path) {
    const DetectorConfig cfg = to_config(flags);
    const auto points = benchmark_costs(cfg, null_stream_for(cfg, rate1),
                                        checkpoints, reps, seed);
    json doc;
    doc["detector"] = flags.kind;
    doc["repetitions"] = reps;
    doc["points"] = json::array();
    for (const auto& pt : points) {
        doc["points"].push_back({{"t", pt.t},
                                 {"update_seconds", pt.update_seconds},
                                 {"stored_scalars", pt.stored_scalars}});
    }
    std::ofstream file;
    open_output(file, out_path) << doc.dump(2) << "\n";
    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw std::runtime_error("cannot open csv file: " + csv_path);
        for (const auto& pt : points) {
            csv << pt.t << "," << pt.update_seconds << "," << pt.stored_scalars << "\n";
        }
    }
    return 0;
}

int cmd_monitor(const DetectorFlags& flags, const std::string& input_path,
                char delimiter, bool header, const std::string& preprocess,
                std::int64_t training_prefix, bool auto_reset,
                std::int64_t id_col, const std::string& out_path) {
    std::ifstream input_file;
    std::istream* input = &std::cin;
    if (!input_path.empty() && input_path != "-") {
        input_file.open(input_path);
        if (!input_file) throw InputError("cannot open input file: " + input_path);
        input = &input_file;
    }
    std::ofstream out_file;
    std::ostream& out = open_output(out_file, out_path);

    RowReaderOptions opts;
    opts.delimiter = delimiter;
    opts.header = header;
    if (id_col >= 0) opts.id_col = static_cast<std::size_t>(id_col);
    RowReader reader(*input, opts);
    Preprocessor pre(parse_preprocess_steps(preprocess));

    DetectorConfig cfg = to_config(flags);

    // Training prefix: estimate the nominal noise level as the operator norm
    // of the centered second-moment matrix of the first rows, then monitor
    // only the remainder.
    std::vector<Row> training;
    if (training_prefix > 0) {
        while (static_cast<std::int64_t>(training.size()) < training_prefix) {
            auto raw = reader.next();
            if (!raw) throw InputError("training prefix longer than the stream");
            auto row = pre.apply(std::move(*raw));
            if (row) training.push_back(std::move(*row));
        }
        const std::size_t p = training.front().values.size();
        std::vector<double> mean(p, 0.0);
        for (const Row& r : training) {
            for (std::size_t j = 0; j < p; ++j) mean[j] += r.values[j];
        }
        for (double& m : mean) m /= static_cast<double>(training.size());
        SymMatrix cov(p);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i; j < p; ++j) {
                double s = 0.0;
                for (const Row& r : training) {
                    s += (r.values[i] - mean[i]) * (r.values[j] - mean[j]);
                }
                cov.set(i, j, s / static_cast<double>(training.size()));
            }
        }
        cfg.sigma_cov_fixed = sym_opnorm(cov);
        cfg.p = static_cast<std::int64_t>(p);
    }

    Detector detector(cfg);
    while (auto raw = reader.next()) {
        auto row = pre.apply(std::move(*raw));
        if (!row) continue;
        if (row->values.size() != static_cast<std::size_t>(cfg.p)) {
            throw InputError("row dimension " + std::to_string(row->values.size()) +
                             " does not match detector dimension " + std::to_string(cfg.p));
        }
        const Decision d = detector.step(row->values);
        if (d.alarmed) {
            json line;
            line["t"] = d.t;
            line["row"] = row->source_row;
            line["g"] = d.trigger_g;
            line["stat"] = d.statistic;
            line["threshold"] = d.threshold;
            line["detector"] = d.detector_id;
            if (!row->id.empty()) line["id"] = row->id;
            out << line.dump() << "\n";
            if (!auto_reset) break;
            detector.reset();
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming changepoint detection over geometric candidate grids"};
    app.require_subcommand(1);

    // grid
    auto* grid_cmd = app.add_subcommand("grid", "print a candidate grid");
    std::int64_t grid_t = 2;
    bool grid_static = false;
    grid_cmd->add_option("--t", grid_t, "time index")->required();
    grid_cmd->add_flag("--static", grid_static, "static geometric grid");

    // calibrate
    auto* cal_cmd = app.add_subcommand("calibrate", "Monte Carlo threshold calibration");
    DetectorFlags cal_flags;
    add_detector_flags(cal_cmd, cal_flags);
    std::string cal_config_file;
    std::int64_t cal_n = 1000, cal_k = 1000;
    double cal_alpha = 0.05, cal_rate1 = 1.0;
    std::uint64_t cal_seed = 1;
    int cal_threads = 1;
    std::string cal_out;
    cal_cmd->add_option("--config", cal_config_file, "detector config file");
    cal_cmd->add_option("--N", cal_n, "null-stream horizon");
    cal_cmd->add_option("--K", cal_k, "Monte Carlo replications (>= 100)");
    cal_cmd->add_option("--alpha", cal_alpha, "target false-alarm probability");
    cal_cmd->add_option("--seed", cal_seed, "master seed");
    cal_cmd->add_option("--threads", cal_threads, "parallel replications");
    cal_cmd->add_option("--rate1", cal_rate1, "poisson null rate");
    cal_cmd->add_option("--out", cal_out, "report path (stdout if omitted)");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "detection-delay experiments");
    DetectorFlags sim_flags;
    add_detector_flags(sim_cmd, sim_flags);
    std::string sim_config_file, sim_stream = "gauss_mean", sim_out, sim_csv;
    std::int64_t sim_n = 1000, sim_tau = 0, sim_m = 100, sim_k = 1;
    std::vector<double> sim_mags;
    double sim_rate1 = 1.0;
    std::uint64_t sim_seed = 1;
    int sim_threads = 1;
    sim_cmd->add_option("--config", sim_config_file, "detector config file");
    sim_cmd->add_option("--stream", sim_stream, "gauss_mean|gauss_cov|poisson");
    sim_cmd->add_option("--N", sim_n, "stream horizon");
    sim_cmd->add_option("--tau", sim_tau, "changepoint location (0 = none)");
    sim_cmd->add_option("--M", sim_m, "runs per magnitude");
    sim_cmd->add_option("--magnitude", sim_mags,
                        "change magnitudes: phi, covariance scale, or post rate");
    sim_cmd->add_option("--k", sim_k, "mean-change sparsity");
    sim_cmd->add_option("--rate1", sim_rate1, "poisson pre-change rate");
    sim_cmd->add_option("--seed", sim_seed, "master seed");
    sim_cmd->add_option("--threads", sim_threads, "parallel runs");
    sim_cmd->add_option("--out", sim_out, "report path (stdout if omitted)");
    sim_cmd->add_option("--emit-csv", sim_csv, "write (magnitude, mean delay) pairs");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "update-time and storage scaling");
    DetectorFlags bench_flags;
    add_detector_flags(bench_cmd, bench_flags);
    std::vector<std::int64_t> bench_checkpoints{1000, 10000, 100000};
    int bench_reps = 3;
    double bench_rate1 = 1.0;
    std::uint64_t bench_seed = 1;
    std::string bench_out, bench_csv;
    bench_cmd->add_option("--checkpoints", bench_checkpoints, "ascending t checkpoints");
    bench_cmd->add_option("--reps", bench_reps, "repetitions");
    bench_cmd->add_option("--rate1", bench_rate1, "poisson null rate");
    bench_cmd->add_option("--seed", bench_seed, "master seed");
    bench_cmd->add_option("--out", bench_out, "report path (stdout if omitted)");
    bench_cmd->add_option("--emit-csv", bench_csv, "write (t, seconds, scalars) rows");

    // monitor
    auto* mon_cmd = app.add_subcommand("monitor", "stream a delimited file");
    DetectorFlags mon_flags;
    add_detector_flags(mon_cmd, mon_flags);
    std::string mon_input, mon_config_file, mon_preprocess = "none", mon_out;
    std::string mon_delimiter = ",";
    bool mon_header = false, mon_auto_reset = false;
    std::int64_t mon_training = 0, mon_id_col = -1;
    mon_cmd->add_option("--input", mon_input, "input path (stdin if omitted or '-')");
    mon_cmd->add_option("--config", mon_config_file, "detector config file");
    mon_cmd->add_option("--delimiter", mon_delimiter, "field delimiter");
    mon_cmd->add_flag("--header", mon_header, "skip the first line");
    mon_cmd->add_option("--preprocess", mon_preprocess,
                        "comma list of none|normalize|difference, applied in order");
    mon_cmd->add_option("--training-prefix", mon_training,
                        "rows used to pre-estimate the covariance noise level");
    mon_cmd->add_flag("--auto-reset", mon_auto_reset, "reset and continue after alarms");
    mon_cmd->add_option("--id-col", mon_id_col, "0-based passthrough id column");
    mon_cmd->add_option("--out", mon_out, "alarm output path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (grid_cmd->parsed()) return cmd_grid(grid_t, grid_static);
        if (cal_cmd->parsed()) {
            if (!cal_config_file.empty()) load_config_file(cal_config_file, cal_cmd, cal_flags);
            return cmd_calibrate(cal_flags, cal_n, cal_k, cal_alpha, cal_seed,
                                 cal_threads, cal_rate1, cal_out);
        }
        if (sim_cmd->parsed()) {
            if (!sim_config_file.empty()) load_config_file(sim_config_file, sim_cmd, sim_flags);
            if (sim_mags.empty()) sim_mags = {1.0};
            return cmd_simulate(sim_flags, sim_stream, sim_n, sim_tau, sim_m, sim_mags,
                                sim_k, sim_rate1, sim_seed, sim_threads, sim_out, sim_csv);
        }
        if (bench_cmd->parsed()) {
            return cmd_bench(bench_flags, bench_checkpoints, bench_reps, bench_rate1,
                             bench_seed, bench_out, bench_csv);
        }
        if (mon_cmd->parsed()) {
            if (!mon_config_file.empty()) load_config_file(mon_config_file, mon_cmd, mon_flags);
            if (mon_delimiter.size() != 1) throw InputError("delimiter must be one character");
            return cmd_monitor(mon_flags, mon_input, mon_delimiter[0], mon_header,
                               mon_preprocess, mon_training, mon_auto_reset,
                               mon_id_col, mon_out);
        }
    } catch (const gridcpd::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

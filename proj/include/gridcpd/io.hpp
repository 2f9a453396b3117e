#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridcpd {

// Bad input data (malformed rows, dimension changes, zero baselines).
// The CLI maps this to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Row {
    std::int64_t source_row = 0;  // 1-based over data lines (header excluded)
    std::string id;               // passthrough of the id column, if any
    std::vector<double> values;
};

struct RowReaderOptions {
    char delimiter = ',';
    bool header = false;
    std::optional<std::size_t> id_col;  // 0-based column passed through verbatim
};

// Streams delimited numeric rows. Parsing is locale-independent
// (std::from_chars); a trailing newline is tolerated.
class RowReader {
public:
    RowReader(std::istream& in, RowReaderOptions options);
    std::optional<Row> next();  // nullopt at end of stream

private:
    std::istream& in_;
    RowReaderOptions options_;
    std::int64_t line_ = 0;
    std::int64_t data_row_ = 0;
    std::optional<std::size_t> dim_;
};

enum class PreprocessStep { baseline_normalize, first_difference };

// Parses a comma-separated step list, e.g. "normalize,difference".
std::vector<PreprocessStep> parse_preprocess_steps(const std::string& s);

// Applies the configured steps in declared order. baseline_normalize divides
// each column by its first observed value; first_difference emits
// y_t - y_{t-1} from the second row on (the stream shortens by one).
class Preprocessor {
public:
    explicit Preprocessor(std::vector<PreprocessStep> steps);
    // Row indices and ids are carried through; a differenced row keeps the
    // source row of the later input.
    std::optional<Row> apply(Row row);

private:
    std::vector<PreprocessStep> steps_;
    std::vector<std::vector<double>> baselines_;  // per normalize step
    std::vector<std::optional<std::vector<double>>> previous_;  // per difference step
};

}  // namespace gridcpd

#include "gridcpd/io.hpp"

#include <charconv>

namespace gridcpd {

RowReader::RowReader(std::istream& in, RowReaderOptions options)
    : in_(in), options_(options) {}

std::optional<Row> RowReader::next() {
    std::string line;
    for (;;) {
        if (!std::getline(in_, line)) return std::nullopt;
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_ == 1 && options_.header) continue;
        if (line.empty()) {
            // A final empty line is a trailing newline; blank lines elsewhere
            // are malformed input.
            if (in_.peek() == std::char_traits<char>::eof()) return std::nullopt;
            throw InputError("blank line at input line " + std::to_string(line_));
        }
        break;
    }

    Row row;
    row.source_row = ++data_row_;
    std::size_t col = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t end = line.find(options_.delimiter, pos);
        if (end == std::string::npos) end = line.size();
        const std::string_view field(line.data() + pos, end - pos);
        if (options_.id_col && col == *options_.id_col) {
            row.id = std::string(field);
        } else {
            double v = 0.0;
            const auto [ptr, ec] =
                std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc{} || ptr != field.data() + field.size()) {
                throw InputError("non-numeric field at line " + std::to_string(line_) +
                                 ", column " + std::to_string(col + 1));
            }
            row.values.push_back(v);
        }
        ++col;
        pos = end + 1;
        if (end == line.size()) break;
    }

    if (dim_ && row.values.size() != *dim_) {
        throw InputError("dimension change at line " + std::to_string(line_) +
                         ": expected " + std::to_string(*dim_) + " fields, got " +
                         std::to_string(row.values.size()));
    }
    dim_ = row.values.size();
    return row;
}

std::vector<PreprocessStep> parse_preprocess_steps(const std::string& s) {
    std::vector<PreprocessStep> steps;
    std::size_t pos = 0;
    while (pos <= s.size() && !s.empty()) {
        std::size_t end = s.find(',', pos);
        if (end == std::string::npos) end = s.size();
        const std::string name = s.substr(pos, end - pos);
        if (name == "normalize" || name == "baseline_normalize") {
            steps.push_back(PreprocessStep::baseline_normalize);
        } else if (name == "difference" || name == "first_difference") {
            steps.push_back(PreprocessStep::first_difference);
        } else if (name != "none" && !name.empty()) {
            throw InputError("unknown preprocessing step: " + name);
        }
        if (end == s.size()) break;
        pos = end + 1;
    }
    return steps;
}

Preprocessor::Preprocessor(std::vector<PreprocessStep> steps)
    : steps_(std::move(steps)),
      baselines_(steps_.size()),
      previous_(steps_.size()) {}

std::optional<Row> Preprocessor::apply(Row row) {
    for (std::size_t k = 0; k < steps_.size(); ++k) {
        switch (steps_[k]) {
            case PreprocessStep::baseline_normalize: {
                if (baselines_[k].empty()) {
                    for (double v : row.values) {
                        if (v == 0.0) {
                            throw InputError("zero baseline value at row " +
                                             std::to_string(row.source_row));
                        }
                    }
                    baselines_[k] = row.values;
                }
                for (std::size_t j = 0; j < row.values.size(); ++j) {
                    row.values[j] /= baselines_[k][j];
                }
                break;
            }
            case PreprocessStep::first_difference: {
                if (!previous_[k]) {
                    previous_[k] = row.values;
                    return std::nullopt;
                }
                std::vector<double> diff(row.values.size());
                for (std::size_t j = 0; j < row.values.size(); ++j) {
                    diff[j] = row.values[j] - (*previous_[k])[j];
                }
                previous_[k] = row.values;
                row.values = std::move(diff);
                break;
            }
        }
    }
    return row;
}

}  // namespace gridcpd

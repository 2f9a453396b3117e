#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gridcpd/io.hpp"

using namespace gridcpd;

namespace {

std::vector<Row> read_all(const std::string& text, RowReaderOptions opts = {}) {
    std::istringstream in(text);
    RowReader reader(in, opts);
    std::vector<Row> rows;
    while (auto r = reader.next()) rows.push_back(std::move(*r));
    return rows;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Integration helpers: run the installed CLI binary.
int run_cli(const std::string& args, const std::string& out_file) {
    const std::string cmd = std::string(GRIDCPD_CLI) + " " + args + " >" + out_file + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("row reader parses plain numeric rows") {
    const auto rows = read_all("1.0,2.0\n3.0,4.0");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].values == std::vector<double>{1.0, 2.0});
    CHECK(rows[1].values == std::vector<double>{3.0, 4.0});
    CHECK(rows[0].source_row == 1);
    CHECK(rows[1].source_row == 2);
}

TEST_CASE("row reader: header, trailing newline, CRLF, id column") {
    RowReaderOptions opts;
    opts.header = true;
    const auto rows = read_all("a,b\r\n1,2\r\n3,4\n", opts);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].values == std::vector<double>{1.0, 2.0});

    RowReaderOptions id_opts;
    id_opts.id_col = 0;
    const auto with_id = read_all("2000-01-03,1.5,2.5\n2000-01-04,3.5,4.5", id_opts);
    REQUIRE(with_id.size() == 2);
    CHECK(with_id[0].id == "2000-01-03");
    CHECK(with_id[0].values == std::vector<double>{1.5, 2.5});
    CHECK(with_id[1].id == "2000-01-04");
}

TEST_CASE("row reader rejects malformed input with location info") {
    try {
        read_all("1.0,2.0\n1.0,oops\n");
        FAIL("expected InputError");
    } catch (const InputError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2") != std::string::npos);  // line number
    }
    CHECK_THROWS_AS(read_all("1.0,2.0\n1.0\n"), InputError);      // dim change
    CHECK_THROWS_AS(read_all("1.0,2.0\n\n3.0,4.0\n"), InputError);  // blank line
}

TEST_CASE("preprocess steps parse and reject unknown names") {
    CHECK(parse_preprocess_steps("none").empty());
    CHECK(parse_preprocess_steps("").empty());
    const auto steps = parse_preprocess_steps("normalize,difference");
    REQUIRE(steps.size() == 2);
    CHECK(steps[0] == PreprocessStep::baseline_normalize);
    CHECK(steps[1] == PreprocessStep::first_difference);
    CHECK(parse_preprocess_steps("baseline_normalize,first_difference") == steps);
    CHECK_THROWS_AS(parse_preprocess_steps("smooth"), InputError);
}

TEST_CASE("baseline normalize divides by the first row") {
    // [TRIVIAL] [2,4],[4,8] -> [1,1],[2,2].
    Preprocessor pre(parse_preprocess_steps("normalize"));
    auto r1 = pre.apply(Row{1, "", {2.0, 4.0}});
    auto r2 = pre.apply(Row{2, "", {4.0, 8.0}});
    REQUIRE(r1);
    REQUIRE(r2);
    CHECK(r1->values == std::vector<double>{1.0, 1.0});
    CHECK(r2->values == std::vector<double>{2.0, 2.0});

    Preprocessor zero(parse_preprocess_steps("normalize"));
    CHECK_THROWS_AS(zero.apply(Row{1, "", {0.0, 1.0}}), InputError);
}

TEST_CASE("first difference shortens the stream by one") {
    // [TRIVIAL] [1],[3],[6] -> [2],[3].
    Preprocessor pre(parse_preprocess_steps("difference"));
    CHECK(!pre.apply(Row{1, "", {1.0}}));
    auto r2 = pre.apply(Row{2, "", {3.0}});
    auto r3 = pre.apply(Row{3, "", {6.0}});
    REQUIRE(r2);
    REQUIRE(r3);
    CHECK(r2->values == std::vector<double>{2.0});
    CHECK(r3->values == std::vector<double>{3.0});
    CHECK(r2->source_row == 2);  // differenced row keeps the later source row
}

TEST_CASE("normalize then difference matches hand computation") {
    // [DERIVED: hand-checked fixture] rows 4, 6, 9 with baseline 4:
    // normalized 1, 1.5, 2.25; differences 0.5, 0.75.
    Preprocessor pre(parse_preprocess_steps("normalize,difference"));
    CHECK(!pre.apply(Row{1, "", {4.0}}));
    auto r2 = pre.apply(Row{2, "", {6.0}});
    auto r3 = pre.apply(Row{3, "", {9.0}});
    REQUIRE(r2);
    REQUIRE(r3);
    CHECK(r2->values == std::vector<double>{0.5});
    CHECK(r3->values == std::vector<double>{0.75});
}

TEST_CASE("cli: grid subcommand prints the dynamic grid") {
    const std::string out = "cli_grid_out.txt";
    REQUIRE(run_cli("grid --t 17", out) == 0);
    CHECK(slurp(out) == "1\n2\n3\n4\n6\n8\n12\n");
    REQUIRE(run_cli("grid --t 17 --static", out) == 0);
    CHECK(slurp(out) == "1\n2\n4\n8\n16\n");
    std::remove(out.c_str());
}

TEST_CASE("cli: monitor emits exactly one alarm line on a single jump") {
    const std::string data = "cli_jump.csv";
    {
        std::ofstream f(data);
        for (int i = 0; i < 60; ++i) f << (i < 30 ? 0.0 : 8.0) << "\n";
    }
    const std::string out = "cli_jump_out.txt";
    const int rc = run_cli(
        "monitor --input " + data +
            " --kind uni_mean --p 1 --mode calibrated --lambda 2 --delta 0.05",
        out);
    CHECK(rc == 0);
    const std::string text = slurp(out);
    // Exactly one line, and it is an alarm record.
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);
    CHECK(text.find("\"detector\":\"uni_mean\"") != std::string::npos);
    CHECK(text.find("\"g\":") != std::string::npos);

    // Byte-identical rerun.
    const std::string out2 = "cli_jump_out2.txt";
    REQUIRE(run_cli("monitor --input " + data +
                        " --kind uni_mean --p 1 --mode calibrated --lambda 2 --delta 0.05",
                    out2) == 0);
    CHECK(slurp(out2) == text);
    std::remove(data.c_str());
    std::remove(out.c_str());
    std::remove(out2.c_str());
}

TEST_CASE("cli: constant input produces no alarms") {
    const std::string data = "cli_const.csv";
    {
        std::ofstream f(data);
        for (int i = 0; i < 100; ++i) f << "5.0\n";
    }
    const std::string out = "cli_const_out.txt";
    CHECK(run_cli("monitor --input " + data + " --kind uni_mean --p 1 --lambda 1", out) == 0);
    CHECK(slurp(out).empty());
    std::remove(data.c_str());
    std::remove(out.c_str());
}

TEST_CASE("cli: exit codes 2 for bad input, 2 for bad flags") {
    const std::string data = "cli_bad.csv";
    {
        std::ofstream f(data);
        f << "1.0\nnot_a_number\n";
    }
    const std::string out = "cli_bad_out.txt";
    CHECK(run_cli("monitor --input " + data + " --kind uni_mean --p 1", out) == 2);
    CHECK(run_cli("monitor --no-such-flag", out) == 2);
    CHECK(run_cli("monitor --input does_not_exist.csv --kind uni_mean --p 1", out) == 2);
    std::remove(data.c_str());
    std::remove(out.c_str());
}

TEST_CASE("cli: config file provides defaults and flags win") {
    const std::string cfg = "cli_cfg.txt";
    {
        std::ofstream f(cfg);
        f << "kind=uni_mean\nlambda=1e300\np=1\n";
    }
    const std::string data = "cli_cfg_data.csv";
    {
        std::ofstream f(data);
        for (int i = 0; i < 40; ++i) f << (i < 20 ? 0.0 : 9.0) << "\n";
    }
    const std::string out = "cli_cfg_out.txt";
    // Config lambda=1e300 suppresses the alarm.
    REQUIRE(run_cli("monitor --input " + data + " --config " + cfg, out) == 0);
    CHECK(slurp(out).empty());
    // Flag overrides config: alarm fires.
    REQUIRE(run_cli("monitor --input " + data + " --config " + cfg + " --lambda 2 --mode calibrated", out) == 0);
    CHECK(!slurp(out).empty());
    std::remove(cfg.c_str());
    std::remove(data.c_str());
    std::remove(out.c_str());
}

TEST_CASE("cli: id column is passed through to alarm records") {
    const std::string data = "cli_id.csv";
    {
        std::ofstream f(data);
        for (int i = 0; i < 40; ++i) {
            f << "day" << i << "," << (i < 20 ? 0.0 : 9.0) << "\n";
        }
    }
    const std::string out = "cli_id_out.txt";
    REQUIRE(run_cli("monitor --input " + data +
                        " --id-col 0 --kind uni_mean --p 1 --mode calibrated --lambda 2",
                    out) == 0);
    CHECK(slurp(out).find("\"id\":\"day") != std::string::npos);
    std::remove(data.c_str());
    std::remove(out.c_str());
}

TEST_CASE("cli: auto-reset on concatenated streams equals separate runs") {
    // Reset-boundary invariant: first stream's alarm lands on its final row.
    std::vector<double> first;
    for (int i = 0; i < 30; ++i) first.push_back(i < 15 ? 0.0 : 9.0);
    // Find the alarm row of the first stream alone.
    const std::string f1 = "cli_cat1.csv";
    {
        std::ofstream f(f1);
        for (double v : first) f << v << "\n";
    }
    const std::string flags =
        " --kind uni_mean --p 1 --mode calibrated --lambda 2 --delta 0.05";
    const std::string out = "cli_cat_out.txt";
    REQUIRE(run_cli("monitor --input " + f1 + flags, out) == 0);
    const std::string alarm1 = slurp(out);
    REQUIRE(!alarm1.empty());
    const auto pos = alarm1.find("\"row\":");
    REQUIRE(pos != std::string::npos);
    const int alarm_row = std::atoi(alarm1.c_str() + pos + 6);
    REQUIRE(alarm_row >= 1);

    // Truncate the first stream at its alarm row, then concatenate a second.
    std::vector<double> second;
    for (int i = 0; i < 30; ++i) second.push_back(i < 15 ? 9.0 : 30.0);
    const std::string f2 = "cli_cat2.csv";
    const std::string cat = "cli_cat12.csv";
    {
        std::ofstream a(f2), b(cat);
        for (double v : second) a << v << "\n";
        for (int i = 0; i < alarm_row; ++i) b << first[static_cast<std::size_t>(i)] << "\n";
        for (double v : second) b << v << "\n";
    }
    REQUIRE(run_cli("monitor --input " + f2 + flags, out) == 0);
    const std::string alarm2 = slurp(out);
    REQUIRE(run_cli("monitor --input " + cat + flags + " --auto-reset", out) == 0);
    const std::string both = slurp(out);

    // The concatenated run must alarm at the same detector times: alarm1's
    // line plus alarm2's line with its row shifted by alarm_row.
    std::istringstream lines(both);
    std::string l1, l2, extra;
    REQUIRE(std::getline(lines, l1));
    REQUIRE(std::getline(lines, l2));
    CHECK(!std::getline(lines, extra));
    // Check detector time t of the second alarm matches the standalone run.
    const auto t_of = [](const std::string& s) {
        const auto p = s.find("\"t\":");
        return std::atoi(s.c_str() + p + 4);
    };
    CHECK(l1 == alarm1.substr(0, alarm1.size() - 1));
    CHECK(t_of(l2) == t_of(alarm2));

    for (const auto* f : {&f1, &f2, &cat}) std::remove(f->c_str());
    std::remove(out.c_str());
}

TEST_CASE("cli: simulate and bench emit JSON and CSV") {
    const std::string out = "cli_sim_out.json";
    const std::string csv = "cli_sim.csv";
    REQUIRE(run_cli("simulate --kind uni_mean --N 200 --tau 80 --M 20 "
                    "--magnitude 2 --magnitude 4 --lambda 2 --mode calibrated "
                    "--seed 5 --emit-csv " + csv,
                    out) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("\"results\"") != std::string::npos);
    CHECK(text.find("\"mean_conditional_delay\"") != std::string::npos);
    const std::string csv_text = slurp(csv);
    CHECK(std::count(csv_text.begin(), csv_text.end(), '\n') == 2);

    REQUIRE(run_cli("bench --kind uni_mean --checkpoints 500 1000 --reps 1", out) == 0);
    CHECK(slurp(out).find("\"stored_scalars\"") != std::string::npos);

    REQUIRE(run_cli("calibrate --kind uni_mean --N 100 --K 120 --alpha 0.1 --seed 2", out) == 0);
    CHECK(slurp(out).find("\"lambda\"") != std::string::npos);

    std::remove(out.c_str());
    std::remove(csv.c_str());
}

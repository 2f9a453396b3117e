#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "gridcpd/grid.hpp"

using namespace gridcpd;

namespace {

std::vector<std::int64_t> reversed(std::int64_t t, const std::vector<std::int64_t>& grid) {
    std::vector<std::int64_t> out;
    for (std::int64_t g : grid) out.push_back(t - g);
    std::sort(out.begin(), out.end());
    return out;
}

// Spacing: every d <= t/2 has some grid element in [d/2, d].
bool spacing_holds(std::int64_t t, const std::vector<std::int64_t>& grid) {
    std::size_t idx = 0;
    std::int64_t best = 0;  // largest grid element <= d
    for (std::int64_t d = 1; 2 * d <= t; ++d) {
        while (idx < grid.size() && grid[idx] <= d) best = grid[idx++];
        if (best == 0 || 2 * best < d) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("dynamic grid matches the published rows for t=17..20") {
    // [DERIVED: direct formula evaluation, cross-checked by hand]
    CHECK(dynamic_grid(17) == std::vector<std::int64_t>{1, 2, 3, 4, 6, 8, 12});
    CHECK(dynamic_grid(18) == std::vector<std::int64_t>{1, 2, 3, 5, 7, 9, 13});
    CHECK(dynamic_grid(19) == std::vector<std::int64_t>{1, 2, 3, 4, 6, 10, 14});
    CHECK(dynamic_grid(20) == std::vector<std::int64_t>{1, 2, 3, 5, 7, 11, 15});
}

TEST_CASE("dynamic grid small cases") {
    CHECK(dynamic_grid(2) == std::vector<std::int64_t>{1});
    CHECK(dynamic_grid(3) == std::vector<std::int64_t>{1});
    CHECK(dynamic_grid(4) == std::vector<std::int64_t>{1, 2});
    CHECK(dynamic_grid(5) == std::vector<std::int64_t>{1, 2, 3});
    CHECK(dynamic_grid(10) == std::vector<std::int64_t>{1, 2, 3, 5, 7});
    CHECK(dynamic_grid(11) == std::vector<std::int64_t>{1, 2, 3, 4, 6});
}

TEST_CASE("static grid is the powers of two up to t-1") {
    CHECK(static_grid(17) == std::vector<std::int64_t>{1, 2, 4, 8, 16});
    CHECK(static_grid(9) == std::vector<std::int64_t>{1, 2, 4, 8});
    CHECK(static_grid(2) == std::vector<std::int64_t>{1});
}

TEST_CASE("reversed static grids drift for t=9..12") {
    // [DERIVED: hand evaluation of t - {1,2,4,...}], showing why the static
    // grid cannot recycle stored sums.
    CHECK(reversed(9, static_grid(9)) == std::vector<std::int64_t>{1, 5, 7, 8});
    CHECK(reversed(10, static_grid(10)) == std::vector<std::int64_t>{2, 6, 8, 9});
    CHECK(reversed(11, static_grid(11)) == std::vector<std::int64_t>{3, 7, 9, 10});
    CHECK(reversed(12, static_grid(12)) == std::vector<std::int64_t>{4, 8, 10, 11});
}

TEST_CASE("grid elements are strictly increasing in [1, t-1] and contain 1") {
    for (std::int64_t t = 2; t <= 2000; ++t) {
        const auto g = dynamic_grid(t);
        REQUIRE(!g.empty());
        CHECK(g.front() == 1);
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(g[i] >= 1);
            CHECK(g[i] <= t - 1);
            if (i > 0) CHECK(g[i] > g[i - 1]);
        }
    }
}

TEST_CASE("spacing, cardinality and recycling for all t <= 3000") {
    auto prev = dynamic_grid(2);
    for (std::int64_t t = 2; t <= 3000; ++t) {
        const auto grid = (t == 2) ? prev : dynamic_grid(t);
        CHECK(spacing_holds(t, grid));
        CHECK(static_cast<double>(grid.size()) < 3.0 * std::log(static_cast<double>(t)));
        if (t > 2) {
            // (t) - G^(t) must be contained in ((t-1) - G^(t-1)) union {t-1}.
            std::set<std::int64_t> old_idx;
            for (std::int64_t g : prev) old_idx.insert(t - 1 - g);
            old_idx.insert(t - 1);
            for (std::int64_t g : grid) CHECK(old_idx.count(t - g) == 1);
        }
        prev = grid;
    }
}

TEST_CASE("advance matches direct construction and reports an exact delta") {
    GridState state = make_grid_state(2);
    for (std::int64_t t = 2; t <= 1500; ++t) {
        CHECK(state.t == t);
        CHECK(state.elements == dynamic_grid(t));
        auto [next, delta] = advance(state);
        CHECK(next.t == t + 1);
        CHECK(next.elements == dynamic_grid(t + 1));
        CHECK(delta.added == t);

        // retained ∪ {added} is exactly the new index set; evicted is the rest.
        std::set<std::int64_t> new_idx;
        for (std::int64_t g : next.elements) new_idx.insert(next.t - g);
        std::set<std::int64_t> rebuilt(delta.retained.begin(), delta.retained.end());
        rebuilt.insert(delta.added);
        CHECK(rebuilt == new_idx);

        std::set<std::int64_t> old_idx;
        for (std::int64_t g : state.elements) old_idx.insert(state.t - g);
        for (std::int64_t j : delta.evicted) {
            CHECK(old_idx.count(j) == 1);
            CHECK(new_idx.count(j) == 0);
        }
        for (std::int64_t j : delta.retained) CHECK(old_idx.count(j) == 1);
        CHECK(delta.retained.size() + delta.evicted.size() == old_idx.size());
        state = next;
    }
}

TEST_CASE("advance from t=10 evicts index 3 and keeps the rest") {
    // [DERIVED: hand evaluation] G^(10) = {1,2,3,5,7} reversed {3,5,7,8,9};
    // G^(11) = {1,2,3,4,6} reversed {5,7,8,9,10} = retained + {10}.
    GridState s10 = make_grid_state(10);
    CHECK(summary_indices(s10) == std::vector<std::int64_t>{3, 5, 7, 8, 9});
    auto [s11, delta] = advance(s10);
    CHECK(summary_indices(s11) == std::vector<std::int64_t>{5, 7, 8, 9, 10});
    CHECK(delta.evicted == std::vector<std::int64_t>{3});
    CHECK(delta.added == 10);
}

TEST_CASE("dynamic grid rejects t < 2") {
    CHECK_THROWS(dynamic_grid(1));
    CHECK_THROWS(static_grid(1));
}

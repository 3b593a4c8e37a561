#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "simalign/errors.hpp"
#include "simalign/pphpc.hpp"

using namespace simalign;
using namespace simalign::pphpc;

namespace {

// A small, quiet state for hand-checked step examples.
State tiny_state(int grid) {
    Params p;
    p.grid_size = grid;
    p.init_prey = 0;
    p.init_pred = 0;
    p.iterations = 10;
    p.prey.reproduce_prob_percent = 0;
    p.predator.reproduce_prob_percent = 0;
    State s = init(p, seed_for_replication(1));
    return s;
}

void check_invariants(const State& s) {
    const int c_r = s.params.effective_c_r();
    for (int c : s.cells) REQUIRE((c >= 0 && c <= c_r));
    for (const auto& a : s.agents) REQUIRE(a.energy >= 1);
    const auto out = s.outputs();
    const auto zero = std::count(s.cells.begin(), s.cells.end(), 0);
    REQUIRE(out[2] == static_cast<double>(zero));
    double sum = 0;
    for (int c : s.cells) sum += c;
    REQUIRE(out[5] == sum / static_cast<double>(s.cells.size()));
    REQUIRE(out[0] >= 0.0);
    REQUIRE(out[1] >= 0.0);
}

}  // namespace

TEST_CASE("replication seeds are MD5 digests", "[pphpc]") {
    CHECK(seed_for_replication(1).hex() == "c4ca4238a0b923820dcc509a6f75849b");
    CHECK(seed_for_replication(2).hex() == "c81e728d9d4c2f636f067f89cc14862c");
    CHECK(seed_for_replication(1).words() == std::array<std::uint32_t, 4>{0xc4ca4238u, 0xa0b92382u, 0x0dcc509au, 0x6f75849bu});
    CHECK(seed_for_replication(1).words() != seed_for_replication(2).words());
}

TEST_CASE("model sizes and parameter sets", "[pphpc]") {
    const auto p100 = Params::for_size(100, 1);
    CHECK(p100.init_prey == 400);
    CHECK(p100.init_pred == 200);
    CHECK(p100.c_r == 10);
    const auto p200 = Params::for_size(200, 1);
    CHECK(p200.init_prey == 1600);
    CHECK(p200.init_pred == 800);
    CHECK(Params::for_size(100, 2).c_r == 15);
    CHECK_THROWS_AS(Params::for_size(100, 3), ValidationError);

    auto cr = p100;
    cr.variant = Variant::cr_minus_one;
    CHECK(cr.effective_c_r() == 9);
    cr = Params::for_size(100, 2);
    cr.variant = Variant::cr_minus_one;
    CHECK(cr.effective_c_r() == 14);

    auto bad = p100;
    bad.prey.reproduce_prob_percent = 101;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = p100;
    bad.iterations = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK(variant_from_string("no_shuffle_sorted") == Variant::no_shuffle_sorted);
    CHECK(to_string(Variant::cr_minus_one) == "cr-minus-one");
    CHECK_THROWS_AS(variant_from_string("other"), ValidationError);
}

TEST_CASE("init", "[pphpc]") {
    const auto p = Params::for_size(100, 1);
    const State s = init(p, seed_for_replication(1));
    CHECK(s.iteration == 0);
    CHECK(s.cells.size() == 10000u);
    const auto out = s.outputs();
    CHECK(out[0] == 400.0);
    CHECK(out[1] == 200.0);
    for (const auto& a : s.agents) {
        const int gain = a.species == Species::prey ? 4 : 20;
        CHECK((a.energy >= 1 && a.energy <= 2 * gain));
        CHECK(a.cell < 10000u);
    }
    check_invariants(s);

    const State big = init(Params::for_size(200, 1), seed_for_replication(1));
    CHECK(big.outputs()[0] == 1600.0);
    CHECK(big.outputs()[1] == 800.0);

    SECTION("mean initial food count matches the binomial expectation") {
        double sum = 0;
        const int trials = 1000;
        for (int r = 1; r <= trials; ++r) sum += init(p, seed_for_replication(static_cast<std::uint64_t>(r))).outputs()[2];
        const double mean = sum / trials;
        const double expected = 10000.0 / 11.0;
        const double sigma = std::sqrt(10000.0 * (1.0 / 11.0) * (10.0 / 11.0) / trials);
        CHECK(std::abs(mean - expected) < 3.0 * sigma);
    }
}

TEST_CASE("step examples", "[pphpc]") {
    SECTION("countdown reaching zero makes food available") {
        State s = tiny_state(3);
        std::fill(s.cells.begin(), s.cells.end(), 1);
        s.cells[4] = 5;
        step(s);
        CHECK(s.cells[0] == 0);
        CHECK(s.cells[4] == 4);
        CHECK(s.iteration == 1);
    }
    SECTION("an agent whose energy runs out is removed before acting") {
        State s = tiny_state(3);
        std::fill(s.cells.begin(), s.cells.end(), 1);
        s.agents.push_back({Species::prey, 1, 4});
        step(s);
        CHECK(s.agents.empty());
        CHECK(std::count(s.cells.begin(), s.cells.end(), 0) == 9);
    }
    SECTION("a prey eating resets its cell to c_r") {
        State s = tiny_state(3);
        std::fill(s.cells.begin(), s.cells.end(), 1);
        s.agents.push_back({Species::prey, 5, 4});
        step(s);
        REQUIRE(s.agents.size() == 1u);
        CHECK(s.agents[0].energy == 5 - 1 + 4);
        CHECK(s.cells[s.agents[0].cell] == 10);
        CHECK(std::count(s.cells.begin(), s.cells.end(), 0) == 8);
    }
    SECTION("a predator eats one prey on its cell") {
        State s = tiny_state(1);
        s.cells[0] = 3;
        s.agents.push_back({Species::prey, 5, 0});
        s.agents.push_back({Species::prey, 5, 0});
        s.agents.push_back({Species::predator, 5, 0});
        step(s);
        REQUIRE(s.agents.size() == 2u);
        const auto pred = std::find_if(s.agents.begin(), s.agents.end(),
                                       [](const Agent& a) { return a.species == Species::predator; });
        REQUIRE(pred != s.agents.end());
        CHECK(pred->energy == 5 - 1 + 20);
    }
    SECTION("reproduction splits energy") {
        State s = tiny_state(1);
        s.params.prey.reproduce_prob_percent = 100;
        s.cells[0] = 3;
        s.agents.push_back({Species::prey, 8, 0});
        step(s);
        REQUIRE(s.agents.size() == 2u);
        CHECK(s.agents[0].energy == 4);
        CHECK(s.agents[1].energy == 3);
    }
}

TEST_CASE("run properties", "[pphpc]") {
    auto p = Params::for_size(30, 1);
    p.iterations = 300;

    const auto a = run(p, 1);
    const auto b = run(p, 1);
    CHECK(a == b);
    for (const auto& series : a) CHECK(series.size() == 301u);
    CHECK(run(p, 2) != a);

    SECTION("invariants hold at every iteration") {
        State s = init(p, seed_for_replication(3));
        for (int i = 0; i < p.iterations; ++i) {
            step(s);
            check_invariants(s);
        }
    }
    SECTION("variants share iteration-0 outputs") {
        auto sorted = p;
        sorted.variant = Variant::no_shuffle_sorted;
        const auto c = run(sorted, 1);
        for (std::size_t k = 0; k < kOutputCount; ++k) CHECK(c[k][0] == a[k][0]);
        CHECK(c != a);
    }
    SECTION("no predators ever") {
        auto q = p;
        q.init_pred = 0;
        const auto r = run(q, 5);
        for (double v : r[1]) CHECK(v == 0.0);
        for (double v : r[4]) CHECK(v == 0.0);
    }
    SECTION("experiment rows follow the replication index") {
        const auto e = run_experiment(p, 3, 4);
        const auto r7 = run(p, 7);
        for (std::size_t k = 0; k < kOutputCount; ++k) {
            CHECK(e[k].rows() == 3);
            for (Eigen::Index c = 0; c < e[k].cols(); ++c) REQUIRE(e[k](2, c) == r7[k][static_cast<std::size_t>(c)]);
        }
        CHECK_THROWS_AS(run_experiment(p, 1, 0), ValidationError);
    }
}

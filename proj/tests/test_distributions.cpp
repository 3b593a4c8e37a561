#include <catch_amalgamated.hpp>

#include "simalign/distributions.hpp"

using namespace simalign::dist;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

// Reference values computed with scipy.stats (tests/oracles/generate.py).

TEST_CASE("normal distribution", "[distributions]") {
    CHECK_THAT(normal_sf(1.3), WithinRel(0.096800484585610358, 1e-12));
    CHECK_THAT(normal_sf(-0.4), WithinRel(0.65542174161032418, 1e-12));
    CHECK_THAT(normal_sf(8.5), WithinRel(9.4795348222032499e-18, 1e-10));
    CHECK_THAT(normal_cdf(1.3) + normal_sf(1.3), WithinAbs(1.0, 1e-15));
    CHECK_THAT(normal_quantile(0.025), WithinRel(-1.9599639845400545, 1e-12));
    CHECK_THAT(normal_quantile(1e-10), WithinRel(-6.3613409024040557, 1e-10));
    CHECK(normal_sf(0.0) == 0.5);
}

TEST_CASE("t, F and chi-square tails", "[distributions]") {
    CHECK_THAT(t_sf(2.2, 7.5), WithinRel(0.030599732953058022, 1e-10));
    CHECK_THAT(t_sf(0.3, 58), WithinRel(0.38262487263249056, 1e-10));
    CHECK_THAT(f_sf(3.1, 2, 27), WithinRel(0.061382798739902072, 1e-10));
    CHECK_THAT(f_sf(0.8, 6.5, 40.25), WithinRel(0.58417091923584497, 1e-10));
    CHECK_THAT(chi2_sf(7.2, 3), WithinRel(0.065789052685070987, 1e-10));
    CHECK_THAT(chi2_sf(40, 10.5), WithinRel(2.4780804085004526e-05, 1e-9));
    CHECK(f_sf(0.0, 3, 4) == 1.0);
    CHECK(chi2_sf(0.0, 2) == 1.0);
}

TEST_CASE("Kolmogorov limiting distribution", "[distributions]") {
    CHECK_THAT(kolmogorov_sf(0.5), WithinRel(0.96394524366487511, 1e-10));
    CHECK_THAT(kolmogorov_sf(1.0), WithinRel(0.26999967167735456, 1e-10));
    CHECK_THAT(kolmogorov_sf(1.36), WithinRel(0.049485876755377876, 1e-10));
    CHECK_THAT(kolmogorov_sf(2.5), WithinRel(7.4533063441573419e-06, 1e-8));
    CHECK(kolmogorov_sf(0.0) == 1.0);
}

TEST_CASE("binomial 99% envelope", "[distributions]") {
    using P = std::pair<std::size_t, std::size_t>;
    CHECK(binomial_envelope(59, 0.05, 0.99) == P{0, 8});
    CHECK(binomial_envelope(36, 0.05, 0.99) == P{0, 6});
    CHECK(binomial_envelope(200, 0.05, 0.99) == P{3, 19});
    CHECK(binomial_envelope(118, 0.05, 0.99) == P{1, 13});
}

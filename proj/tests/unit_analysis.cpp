#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pxp/analysis.hpp"

using namespace pxp;

TEST_CASE("escape_time") {
    CHECK(escape_time(0.006, 0.01) == doctest::Approx(std::log(100.0) / 0.006).epsilon(1e-14));
    CHECK(escape_time(0.006, 0.01) == doctest::Approx(767.5).epsilon(1e-3));
    CHECK(escape_time(0.006, 0.999999) < 1e-3); // delta -> 1: no gap to grow across
    CHECK(escape_time(0.012, 0.01) == doctest::Approx(0.5 * escape_time(0.006, 0.01)));
    CHECK_THROWS_AS(escape_time(0.0, 0.01), DomainError);
    CHECK_THROWS_AS(escape_time(0.006, 1.5), DomainError);
    CHECK_THROWS_AS(escape_time(0.006, 0.0), DomainError);
}

TEST_CASE("escape_rate") {
    CHECK(escape_rate(0.006, 0.01) == doctest::Approx(0.006 / std::log(100.0)).epsilon(1e-14));
    CHECK(escape_rate(0.006, 0.01) == doctest::Approx(0.00130).epsilon(3e-3));
    CHECK(escape_rate(0.012, 0.01) == doctest::Approx(0.00261).epsilon(2e-3));
    for (double h : {0.004, 0.009})
        for (double d : {0.01, 0.2})
            CHECK(escape_rate(h, d) * escape_time(h, d) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("build_report") {
    const std::map<std::string, RateEntry> paper_rates = {
        {"density", {0.025, 0.002}}, {"entropy", {0.022, 0.001}}, {"echo", {0.024, 0.003}}};
    SUBCASE("paper-scale values pass") {
        const auto r = build_report(0.006, 0.006, 0.01, paper_rates);
        CHECK(r.lambda == doctest::Approx(0.0013).epsilon(3e-3));
        CHECK(r.ratio == doctest::Approx(0.025 / r.lambda).epsilon(1e-12));
        CHECK(r.ratio > 18.0);
        CHECK(r.pass);
        CHECK(r.t_star == doctest::Approx(1.0 / r.lambda).epsilon(1e-14));
    }
    SUBCASE("equal rates fail") {
        const double lam = escape_rate(0.006, 0.01);
        const std::map<std::string, RateEntry> eq = {
            {"density", {lam, 0.0}}, {"entropy", {lam, 0.0}}, {"echo", {lam, 0.0}}};
        const auto r = build_report(0.006, 0.006, 0.01, eq);
        CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-12));
        CHECK_FALSE(r.pass);
    }
    SUBCASE("missing series reported") {
        std::map<std::string, RateEntry> partial = paper_rates;
        partial.erase("entropy");
        CHECK_THROWS_WITH_AS(build_report(0.006, 0.006, 0.01, partial),
                             doctest::Contains("entropy"), MissingInput);
    }
}

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"

#include "bpvei/law.hpp"
#include "bpvei/limitlab.hpp"
#include "bpvei/rng.hpp"

using namespace bpvei;

namespace {

std::vector<LawInstance> sample_laws() {
    return {LawInstance::make(Family::bernoulli_shift, 0.3), LawInstance::make(Family::geometric, 0.5),
            LawInstance::make(Family::geometric, 0.8),       LawInstance::make(Family::linear_fractional, 1.7),
            LawInstance::make(Family::poisson, 1.0),         LawInstance::make(Family::poisson, 4.5),
            LawInstance::make(Family::finite_pmf, 0.0, {0.2, 0.5, 0.0, 0.3})};
}

}  // namespace

TEST_CASE("bernoulli shift closed forms") {
    const auto b = LawInstance::make(Family::bernoulli_shift, 0.25);
    CHECK(b.pgf(0.0) == doctest::Approx(0.75));
    CHECK(b.pgf(0.5) == doctest::Approx(0.875));
    CHECK(b.mean() == doctest::Approx(0.25));
    CHECK(b.variance() == doctest::Approx(0.1875));
    CHECK(b.nu() == 0.0);
    CHECK(b.excess(0.3) == 0.0);
    CHECK(*b.support_max() == 1);
    CHECK_FALSE(b.degenerate());
    CHECK(LawInstance::make(Family::bernoulli_shift, 1.0).degenerate());
}

TEST_CASE("geometric and linear fractional") {
    const auto g = LawInstance::make(Family::geometric, 0.5);
    CHECK(g.pgf(0.3) == doctest::Approx(0.5 / (1 - 0.5 * 0.3)));
    CHECK(g.mean() == doctest::Approx(1.0));
    CHECK(g.variance() == doctest::Approx(2.0));
    CHECK(g.nu() == doctest::Approx(2.0));
    CHECK(g.mass_at_zero() == doctest::Approx(0.5));

    const auto lf = LawInstance::make(Family::linear_fractional, 3.0);
    CHECK(lf.mean() == doctest::Approx(3.0));
    CHECK(lf.pgf(0.2) == doctest::Approx(1.0 / (1.0 + 3.0 * 0.8)));
    CHECK(lf.variance() == doctest::Approx(12.0));
    CHECK(lf.nu() == doctest::Approx(2.0));
}

TEST_CASE("poisson closed forms and tail") {
    const auto p = LawInstance::make(Family::poisson, 2.5);
    CHECK(p.pgf(0.4) == doctest::Approx(std::exp(2.5 * (0.4 - 1))));
    CHECK(p.nu() == doctest::Approx(1.0));
    double cum = 0.0;
    for (Count k = 0; k <= 12; ++k) {
        cum += p.pmf(k);
        CHECK(p.tail_mass(k) == doctest::Approx(1.0 - cum).epsilon(1e-9));
    }
    // tiny u: complement ~ lambda u without cancellation
    CHECK(p.complement(1e-14) == doctest::Approx(2.5e-14).epsilon(1e-9));
    CHECK(p.excess(1e-7) == doctest::Approx(2.5 * 2.5 * 1e-14 / 2).epsilon(1e-6));
}

TEST_CASE("complement and excess agree with the generating function") {
    for (const auto& law : sample_laws()) {
        for (double u : {1.0, 0.75, 0.5, 0.1, 0.01}) {
            CHECK(law.complement(u) == doctest::Approx(1.0 - law.pgf(1.0 - u)).epsilon(1e-12));
            CHECK(law.excess(u) == doctest::Approx(law.mean() * u - (1.0 - law.pgf(1.0 - u))).epsilon(1e-9));
            CHECK(law.excess(u) >= 0.0);
        }
    }
}

TEST_CASE("moments match finite-difference derivatives of the pgf") {
    for (const auto& law : sample_laws()) {
        auto f = [&](double s) { return law.pgf(s); };
        CHECK(law.mean() == doctest::Approx(oracle::derivative_at_one(f, 1)).epsilon(1e-6));
        CHECK(law.factorial_moment2() == doctest::Approx(oracle::derivative_at_one(f, 2)).epsilon(1e-5));
    }
}

TEST_CASE("pmf sums and pmf_vector tail floor") {
    for (const auto& law : sample_laws()) {
        const auto v = law.pmf_vector(4096, 1e-14);
        const double total = std::accumulate(v.begin(), v.end(), 0.0);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(law.tail_mass(static_cast<Count>(v.size()) - 1) <= 1e-14);
        for (std::size_t k = 0; k < v.size(); ++k) CHECK(v[k] == doctest::Approx(law.pmf(static_cast<Count>(k))));
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(LawInstance::make(Family::bernoulli_shift, 0.0), ValidationError);
    CHECK_THROWS_AS(LawInstance::make(Family::bernoulli_shift, 1.5), ValidationError);
    CHECK_THROWS_AS(LawInstance::make(Family::geometric, 1.0), ValidationError);
    CHECK_THROWS_AS(LawInstance::make(Family::geometric, 0.0), ValidationError);
    CHECK_THROWS_AS(LawInstance::make(Family::linear_fractional, 0.0), ValidationError);
    CHECK_THROWS_AS(LawInstance::make(Family::poisson, -1.0), ValidationError);
    CHECK_THROWS_AS(LawInstance::make(Family::poisson, std::nan("")), ValidationError);
    CHECK_THROWS_AS(LawInstance::make(Family::finite_pmf, 0.0, {0.5, 0.4}), ValidationError);
    CHECK_THROWS_AS(LawInstance::make(Family::finite_pmf, 0.0, {1.0}), ValidationError);
    CHECK_THROWS_AS(LawInstance::make(Family::finite_pmf, 0.0, {1.2, -0.2}), ValidationError);
    CHECK_THROWS_AS(parse_family("binomial"), ValidationError);
}

TEST_CASE("parameter schedules") {
    const auto c = ParamSchedule::constant(0.3);
    CHECK(c.at(17) == 0.3);
    CHECK(*c.limit() == 0.3);

    const auto p = ParamSchedule::power(1.0, -2.0);
    CHECK(p.at(4) == doctest::Approx(1.0 / 16));
    CHECK(*p.limit() == 0.0);
    CHECK_THROWS_AS(p.at(0), ValidationError);
    CHECK_FALSE(ParamSchedule::power(1.0, 0.5).limit().has_value());

    const auto t = ParamSchedule::table({0.5, 0.5}, ParamSchedule::power(1.0, -1.0));
    CHECK(t.at(1) == 0.5);
    CHECK(t.at(5) == doctest::Approx(0.2));
    CHECK(*t.limit() == 0.0);

    const LawSpec spec = LawSpec::bernoulli_shift(ParamSchedule::power(2.0, -1.0, 1));
    CHECK(instantiate(spec, 3).mean() == doctest::Approx(0.5));
    CHECK_THROWS_WITH_AS(instantiate(LawSpec::bernoulli_shift(ParamSchedule::power(3.0, -1.0, 1)), 1),
                         doctest::Contains("generation 1"), ValidationError);
}

TEST_CASE("second moment above a threshold against direct summation") {
    const auto p = LawInstance::make(Family::poisson, 3.0);
    for (double t : {0.0, 2.0, 7.5, 20.0}) {
        double direct = 0.0;
        for (Count k = 0; k < 200; ++k)
            if (static_cast<double>(k) > t) direct += static_cast<double>(k * k) * p.pmf(k);
        const Bounded b = p.second_moment_above(t);
        CHECK(std::abs(b.value - direct) <= b.bound + 1e-12);
        CHECK(b.bound <= 1e-12);
    }
    const auto g = LawInstance::make(Family::geometric, 0.3);
    double direct = 0.0;
    for (Count k = 6; k < 2000; ++k) direct += static_cast<double>(k * k) * g.pmf(k);
    CHECK(g.second_moment_above(5.0).value == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("regularity check") {
    const auto geo = regularity_check(LawSpec::geometric(ParamSchedule::constant(0.5)), {0.1, 0.01}, 100);
    CHECK(geo.satisfied());
    CHECK(geo.limit_law_checked);

    const auto bern = regularity_check(LawSpec::bernoulli_shift(ParamSchedule::constant(0.5)), {0.1}, 50);
    CHECK(bern.satisfied());
    CHECK(bern.entries[0].degenerate);

    // bounded support B = 3: c <= B and nothing above c (1 + EX) at c = B
    const auto fin = LawSpec::finite_pmf({0.3, 0.2, 0.2, 0.3});
    const auto rep = regularity_check(fin, {0.001}, 10);
    REQUIRE(rep.entries[0].c.has_value());
    CHECK(*rep.entries[0].c <= 3.0);
    const auto law = instantiate(fin, 0);
    CHECK(law.second_moment_above(3.0 * (1.0 + law.mean())).value == 0.0);

    CHECK_THROWS_AS(regularity_check(fin, {0.0}, 10), DomainError);
}

TEST_CASE("single draws follow the law") {
    for (const auto& law : sample_laws()) {
        Xoshiro256 rng = make_stream(11, 0);
        const int n = 40000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += static_cast<double>(law.sample(rng));
        const double se = std::sqrt(law.variance() / n);
        CHECK(std::abs(sum / n - law.mean()) <= 4.0 * se + 1e-12);
    }
}

TEST_CASE("closed-form sums are distributed like individual draws") {
    // two-sample KS at the 1% level between the fast path and the reference
    for (const auto& law : sample_laws()) {
        for (Count j : {1, 7, 40}) {
            std::vector<double> fast, slow;
            for (std::size_t r = 0; r < 20000; ++r) {
                Xoshiro256 a = make_stream(3, r, 1), b = make_stream(3, r, 2);
                fast.push_back(static_cast<double>(law.sample_sum(j, a)));
                Count s = 0;
                for (Count i = 0; i < j; ++i) s += law.sample(b);
                slow.push_back(static_cast<double>(s));
            }
            std::sort(fast.begin(), fast.end());
            std::sort(slow.begin(), slow.end());
            INFO(family_name(law.family()), " J=", j);
            CHECK(ks_two_sample(fast, slow) < ks_critical_two_sample(fast.size(), slow.size()));
        }
    }
}

TEST_CASE("finite pmf sums never use zero-mass atoms") {
    const auto law = LawInstance::make(Family::finite_pmf, 0.0, {0.5, 0.0, 0.5, 0.0, 0.0});
    Xoshiro256 rng = make_stream(5, 0);
    for (int i = 0; i < 2000; ++i) {
        const Count s = law.sample_sum(3, rng);
        CHECK(s % 2 == 0);
        CHECK(s <= 6);
    }
}

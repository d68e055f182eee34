#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

#include "bpvei/analysis.hpp"
#include "bpvei/exact.hpp"
#include "bpvei/pgf.hpp"

using namespace bpvei;
using nlohmann::json;

namespace {

BpveiModel finite_model() {
    // supports up to 8 in the first generation, then {0,1,2}
    const json cfg{
        {"name", "finite"},
        {"offspring",
         {{{"from", 0}, {"to", 0}, {"law", {{"family", "finite_pmf"}, {"probs", {0.1, 0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1}}}}},
          {{"from", 1}, {"to", nullptr}, {"law", {{"family", "finite_pmf"}, {"probs", {0.25, 0.5, 0.25}}}}}}},
        {"immigration", {{{"from", 0}, {"to", nullptr}, {"law", {{"family", "finite_pmf"}, {"probs", {0.5, 0.5}}}}}}}};
    return build_model(cfg);
}

}  // namespace

TEST_CASE("example_b first generations by hand") {
    const auto all = propagate_all(preset("example_b"), 2);
    REQUIRE(all.size() == 3);
    CHECK(all[0].probs[0] == 1.0);
    // Z_1 = 1 iff one immigrant with one offspring
    CHECK(all[1].probs[0] == doctest::Approx(0.75));
    CHECK(all[1].probs[1] == doctest::Approx(0.25));
    CHECK(all[1].tail == 0.0);
    CHECK(all[2].total() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("propagation against brute-force enumeration") {
    const BpveiModel m = finite_model();
    const int n = 2;
    std::vector<oracle::Pmf> off, imm;
    for (int g = 0; g < n; ++g) {
        off.push_back(m.law_at(Role::offspring, g).pmf_vector(64, 0.0));
        imm.push_back(m.law_at(Role::immigration, g).pmf_vector(64, 0.0));
    }
    const auto dist = oracle::enumerate_process(off, imm, n);
    const TruncatedPmf pmf = propagate(m, n);
    CHECK(pmf.tail < 1e-15);  // rounding only, the support fits
    for (const auto& [z, p] : dist) CHECK(pmf.probs[static_cast<std::size_t>(z)] == doctest::Approx(p).epsilon(1e-13));
    double total = 0.0;
    for (const auto& [z, p] : dist) total += p;
    CHECK(total == doctest::Approx(1.0));
    REQUIRE(support_bound(m, n).has_value());
    CHECK(*support_bound(m, n) == 2 * (8 + 1));
}

TEST_CASE("deterministic chain is a point mass") {
    const TruncatedPmf pmf = propagate(preset("deterministic_chain"), 9);
    for (std::size_t k = 0; k < pmf.probs.size(); ++k) CHECK(pmf.probs[k] == (k == 9 ? 1.0 : 0.0));
}

TEST_CASE("tail accounting and growth") {
    const BpveiModel g = preset("critical_geo_pois");
    PropagateOptions fixed;
    fixed.cutoff = 8;
    fixed.grow = false;
    const TruncatedPmf small = propagate(g, 6, fixed);
    CHECK(small.tail_exceeded);
    CHECK(small.tail > 1e-10);
    CHECK(small.total() == doctest::Approx(1.0).epsilon(1e-12));

    PropagateOptions grow;
    grow.cutoff = 8;
    const TruncatedPmf big = propagate(g, 6, grow);
    CHECK_FALSE(big.tail_exceeded);
    CHECK(big.tail < 1e-10);
    CHECK(big.cutoff > 8);
    // the truncated run never overstates any in-window probability
    for (std::size_t k = 0; k < small.probs.size(); ++k) CHECK(small.probs[k] <= big.probs[k] + 1e-15);
}

TEST_CASE("survival bounds bracket the generating-function value") {
    for (const char* name : {"example_b", "example_c", "critical_geo_pois"}) {
        const BpveiModel m = preset(name);
        const auto curve = exact_survival_curve(m, 10);
        for (Generation n = 1; n <= 10; ++n) {
            const SurvivalBounds b = exact_survival(m, n);
            CHECK(b.lower <= curve[static_cast<std::size_t>(n)] + 1e-13);
            CHECK(curve[static_cast<std::size_t>(n)] <= b.upper + 1e-13);
        }
    }
}

TEST_CASE("pmf moments agree with the moment recursion") {
    const BpveiModel m = preset("critical_pois_pois");
    const auto all = propagate_all(m, 8);
    const auto mean = mean_sequence(m, 8);
    const auto var = variance_sequence(m, 8);
    for (Generation n = 1; n <= 8; ++n) {
        const PmfMoments mo = moments_from_pmf(all[static_cast<std::size_t>(n)]);
        CHECK((mo.one_sided || all[static_cast<std::size_t>(n)].tail == 0.0));
        CHECK(mo.mean == doctest::Approx(mean[static_cast<std::size_t>(n - 1)]).epsilon(1e-10));
        CHECK(mo.variance == doctest::Approx(var[static_cast<std::size_t>(n - 1)]).epsilon(1e-9));
    }
}

TEST_CASE("bounded support gives two-sided moment bounds") {
    const BpveiModel b = preset("example_b");
    const TruncatedPmf pmf = propagate(b, 5);
    const PmfMoments mo = moments_from_pmf(pmf, support_bound(b, 5));
    CHECK_FALSE(mo.one_sided);
    CHECK(mo.mean_bound == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("propagation errors") {
    PropagateOptions bad;
    bad.cutoff = 0;
    CHECK_THROWS_AS(propagate(preset("example_b"), 2, bad), DomainError);
    CHECK_THROWS_AS(propagate(preset("example_b"), -1), DomainError);
}

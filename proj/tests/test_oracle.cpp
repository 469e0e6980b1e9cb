#include <cmath>

#include "doctest.h"

#include "jdslc/error.hpp"
#include "jdslc/oracle.hpp"
#include "support.hpp"

using namespace jdslc;

TEST_SUITE("oracle") {
  TEST_CASE("single letter converse by hand") {
    const ConverseStats st{1.0, 9.0, 8.0, 0.25};
    // W is 1 w.p. 3/4, 5 or 13 w.p. 1/8 each.
    const double g = 3.0;
    CHECK(enumerate_converse_exact(st, 1, 0.0, g) == doctest::Approx(0.25 - std::exp(-g)).epsilon(1e-15));
    CHECK(enumerate_converse_exact(st, 1, 5.0, g) == doctest::Approx(0.125 - std::exp(-g)).epsilon(1e-15));
    CHECK(enumerate_converse_exact(st, 1, 10.5, g) == 0.0);
    CHECK(enumerate_converse_exact(st, 1, 2.0, 0.0) == 0.0);
  }

  TEST_CASE("converse enumeration agrees with the binomial evaluator") {
    const ConverseStats st = converse_stats(efcf_point(testing::kAnchor));
    for (double lm : {0.0, 0.5, 1.0, 2.0, 3.0}) {
      for (double gamma : {0.3, 0.7, std::log(8.0) / 2}) {
        CHECK(std::abs(enumerate_converse_exact(st, 8, lm, gamma) - converse_epsilon(st, 8, lm, gamma)) < 1e-12);
      }
    }
    const EfcfPoint d1 = efcf_point({0.2, {0.3, 0.3}});
    const ConverseStats s1 = converse_stats(d1);
    for (double lm : {1.0, 3.0, 5.0}) {
      CHECK(std::abs(enumerate_converse_exact(s1, 9, lm, 0.5) -
                     converse_epsilon_lambda0({d1.j0, d1.je}, {0.8, 0.2}, 9, lm, GammaPolicy::parse("0.5"))) < 1e-12);
    }
    CHECK_THROWS_AS(enumerate_converse_exact(st, 13, 1.0, 0.5), InvalidInput);
  }

  TEST_CASE("ensemble enumeration agrees with the evaluators") {
    for (const EfcfParams& p : {testing::kAnchor, testing::kAnchorTwin}) {
      for (int k = 1; k <= 6; ++k) {
        for (double m : {1.0, 2.0, 8.0}) {
          CHECK(std::abs(enumerate_achieve_exact(p, k, m) - achieve_epsilon_d1d4(p, k, m).value) < 1e-10);
        }
      }
    }
    const EfcfParams d2{0.2, {0.45, 0.5}};
    for (double m : {1.0, 4.0, 64.0}) {
      CHECK(std::abs(enumerate_achieve_exact(d2, 4, m) - achieve_epsilon_d2d3(d2, 4, m).value) < 1e-10);
    }
    CHECK_THROWS_AS(enumerate_achieve_exact(testing::kAnchor, 7, 2), InvalidInput);
    CHECK_THROWS_AS(enumerate_achieve_exact(testing::kAnchor, 3, 65), InvalidInput);
  }

  TEST_CASE("Monte-Carlo replay is deterministic") {
    McConfig cfg;
    cfg.trials = 3000;
    cfg.seed = 99;
    cfg.k = 12;
    cfg.m = 16;
    cfg.params = testing::kAnchor;
    const McReport a = mc_ensemble(cfg);
    const McReport b = mc_ensemble(cfg);
    CHECK(a.estimate == b.estimate);
    CHECK(to_json(a).dump() == to_json(b).dump());
    cfg.threads = 3;
    CHECK(mc_ensemble(cfg).estimate == a.estimate);
    cfg.mode = McMode::OrderStatistic;
    cfg.threads = 1;
    const McReport c = mc_ensemble(cfg);
    cfg.threads = 5;
    CHECK(mc_ensemble(cfg).estimate == c.estimate);
  }

  TEST_CASE("literal and order-statistic simulators both track the exact error") {
    McConfig cfg;
    cfg.trials = 20000;
    cfg.seed = 5;
    cfg.k = 10;
    cfg.m = 8;
    cfg.params = testing::kAnchor;
    cfg.threads = 4;
    cfg.mode = McMode::Literal;
    const McReport lit = mc_ensemble(cfg);
    cfg.mode = McMode::OrderStatistic;
    const McReport ord = mc_ensemble(cfg);
    CHECK(lit.sigma_distance < 4.0);
    CHECK(ord.sigma_distance < 4.0);
    CHECK(lit.theorem6_value == ord.theorem6_value);
  }

  TEST_CASE("huge codebooks sit on the erasure floor") {
    McConfig cfg;
    cfg.trials = 20000;
    cfg.seed = 8;
    cfg.k = 20;
    cfg.m = 1e15;
    cfg.params = testing::kAnchor;
    cfg.threads = 4;
    const McReport r = mc_ensemble(cfg);
    CHECK(r.mode == McMode::OrderStatistic);
    const double floor = achievability_d1d4(testing::kAnchor, 20).floor();
    CHECK(std::abs(r.estimate - floor) <= 3 * r.std_error);
  }

  TEST_CASE("configuration guards") {
    McConfig cfg;
    cfg.k = 8;
    cfg.m = 4;
    cfg.params = testing::kAnchor;
    CHECK_THROWS_AS(mc_ensemble(cfg), InvalidInput);  // zero trials
    cfg.trials = 10;
    cfg.params = {0.2, {0.45, 0.5}};
    CHECK_THROWS_AS(mc_ensemble(cfg), InvalidInput);
    cfg.params = testing::kAnchor;
    cfg.m = 2.5;
    cfg.mode = McMode::Literal;
    CHECK_THROWS_AS(mc_ensemble(cfg), InvalidInput);
    CHECK(parse_mc_mode("order") == McMode::OrderStatistic);
    CHECK_THROWS_AS(parse_mc_mode("fast"), InvalidInput);
  }

  TEST_CASE("report fields") {
    McConfig cfg;
    cfg.trials = 100;
    cfg.seed = 1;
    cfg.k = 6;
    cfg.m = 3;
    cfg.params = testing::kAnchor;
    const nlohmann::json doc = to_json(mc_ensemble(cfg));
    for (const char* key : {"trials", "seed", "estimate", "std_error", "theorem6_value", "sigma_distance"}) {
      CHECK(doc.contains(key));
    }
  }
}

#include <cmath>
#include <random>

#include "doctest.h"

#include "jdslc/efcf.hpp"
#include "jdslc/error.hpp"
#include "jdslc/model.hpp"
#include "jdslc/model_io.hpp"
#include "support.hpp"

using namespace jdslc;

namespace {

Table hamming(std::size_t rows, std::size_t cols) {
  Table t(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) t(r, c) = r == c ? 0.0 : 1.0;
  }
  return t;
}

// Direct sum of P(s|x) d(s,z) straight from the joint table.
double direct_surrogate(const Table& joint, const Table& ds, std::size_t x, std::size_t z) {
  double px = 0.0;
  double acc = 0.0;
  for (std::size_t s = 0; s < joint.rows(); ++s) {
    px += joint(s, x);
    acc += joint(s, x) * ds(s, z);
  }
  return acc / px;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("erased fair coin flips pmf is valid") {
    const SourceFile f = efcf_instance(0.2);
    CHECK(validate_source(f.source).empty());
    CHECK(f.source.joint(0, 0) == doctest::Approx(0.4));
    CHECK(f.source.joint(1, 2) == doctest::Approx(0.1));
    CHECK(f.source.joint(0, 1) == 0.0);
  }

  TEST_CASE("deficient mass is reported once") {
    const JointSource src(Table(2, 2, {0.3, 0.2, 0.1, 0.3}));
    const auto v = validate_source(src);
    REQUIRE(v.size() == 1);
    CHECK(v[0].message.find("mass = 0.9") != std::string::npos);
    CHECK_THROWS_AS(require_valid(src), InvalidInput);
  }

  TEST_CASE("negative entry names its cell") {
    const JointSource src(Table(2, 2, {0.6, -0.1, 0.3, 0.2}));
    const auto v = validate_source(src);
    REQUIRE(v.size() == 1);
    CHECK(v[0].location.find("0") != std::string::npos);
    CHECK(v[0].location.find("1") != std::string::npos);
    CHECK(v[0].message.find("negative") != std::string::npos);
  }

  TEST_CASE("surrogate of an erased letter is one half") {
    const SourceFile f = efcf_instance(0.2);
    CHECK(f.spec.surrogate_ds(kErased, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(f.spec.surrogate_ds(kErased, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(f.spec.surrogate_ds(0, 0) == 0.0);
    CHECK(f.spec.surrogate_ds(1, 0) == 1.0);
  }

  TEST_CASE("deterministic semantic source gives the distortion itself") {
    const JointSource src(Table(3, 3, {0.2, 0, 0, 0, 0.5, 0, 0, 0, 0.3}));
    std::mt19937_64 rng(3);
    const Table ds = testing::random_table(rng, 3, 4, 0.0, 2.0);
    const Table sur = surrogate_distortion(src, ds);
    for (std::size_t x = 0; x < 3; ++x) {
      for (std::size_t z = 0; z < 4; ++z) CHECK(sur(x, z) == doctest::Approx(ds(x, z)).epsilon(1e-15));
    }
  }

  TEST_CASE("surrogate matches direct summation on random instances") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const JointSource src = testing::random_source(rng, 3, 3);
      const Table ds = testing::random_table(rng, 3, 3, 0.0, 1.0);
      const Table sur = surrogate_distortion(src, ds);
      for (std::size_t x = 0; x < 3; ++x) {
        for (std::size_t z = 0; z < 3; ++z) {
          CHECK(sur(x, z) == doctest::Approx(direct_surrogate(src.joint_pmf(), ds, x, z)).epsilon(1e-13));
        }
      }
    }
  }

  TEST_CASE("surrogate is linear in the distortion table") {
    std::mt19937_64 rng(5);
    const JointSource src = testing::random_source(rng, 4, 3);
    const Table ds = testing::random_table(rng, 4, 2, 0.0, 1.0);
    for (double alpha : {0.5, 3.0, 17.25}) {
      Table scaled = ds;
      for (auto& v : scaled.values()) v *= alpha;
      const Table a = surrogate_distortion(src, ds);
      const Table b = surrogate_distortion(src, scaled);
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(b.values()[i] == doctest::Approx(alpha * a.values()[i]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("unobserved data letters have undefined surrogate rows") {
    const JointSource src(Table(2, 3, {0.5, 0.0, 0.0, 0.0, 0.5, 0.0}));
    CHECK(validate_source(src).empty());
    const Table sur = surrogate_distortion(src, hamming(2, 2));
    CHECK(std::isnan(sur(2, 0)));
    CHECK_FALSE(src.observed(2));
  }

  TEST_CASE("admissible corner of the erased coin flips") {
    for (double delta : {0.05, 0.1, 0.2, 0.3}) {
      const SourceFile f = efcf_instance(delta);
      const DistortionPair b = admissible_bounds(f.source, f.spec);
      CHECK(b.ds == doctest::Approx(delta / 2).epsilon(1e-15));
      CHECK(b.dx == 0.0);
    }
    const SourceFile f = efcf_instance(0.2);
    const DistortionPair b = admissible_bounds(f.source, f.spec);
    CHECK(b.ds == doctest::Approx(0.1));
    CHECK(is_admissible({0.1, 0.0}, b));
    CHECK_FALSE(is_admissible({0.09, 0.0}, b));
  }

  TEST_CASE("admissible corner matches brute-force row minima") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
      const JointSource src = testing::random_source(rng, 3, 3);
      const Table ds = testing::random_table(rng, 3, 3, 0.0, 1.0);
      const Table dx = testing::random_table(rng, 3, 3, 0.0, 1.0);
      const DistortionSpec spec = make_distortion_spec(src, ds, dx);
      double ds_min = 0.0;
      double dx_min = 0.0;
      for (std::size_t x = 0; x < 3; ++x) {
        double best_s = 1e300;
        double best_x = 1e300;
        for (std::size_t z = 0; z < 3; ++z) best_s = std::min(best_s, direct_surrogate(src.joint_pmf(), ds, x, z));
        for (std::size_t y = 0; y < 3; ++y) best_x = std::min(best_x, dx(x, y));
        ds_min += src.data_marginal(x) * best_s;
        dx_min += src.data_marginal(x) * best_x;
      }
      const DistortionPair b = admissible_bounds(src, spec);
      CHECK(b.ds == doctest::Approx(ds_min).epsilon(1e-13));
      CHECK(b.dx == doctest::Approx(dx_min).epsilon(1e-13));

      // Raising every entry cannot lower the corner.
      Table ds_up = ds;
      Table dx_up = dx;
      for (auto& v : ds_up.values()) v += 0.1 * std::uniform_real_distribution<double>(0, 1)(rng);
      for (auto& v : dx_up.values()) v += 0.1 * std::uniform_real_distribution<double>(0, 1)(rng);
      const DistortionPair up = admissible_bounds(src, make_distortion_spec(src, ds_up, dx_up));
      CHECK(up.ds >= b.ds);
      CHECK(up.dx >= b.dx);
    }
  }

  TEST_CASE("a zero in every data row gives a zero data corner") {
    std::mt19937_64 rng(8);
    const JointSource src = testing::random_source(rng, 2, 3);
    Table dx = testing::random_table(rng, 3, 4, 0.1, 1.0);
    dx(0, 3) = 0.0;
    dx(1, 0) = 0.0;
    dx(2, 2) = 0.0;
    const DistortionSpec spec = make_distortion_spec(src, hamming(2, 2), dx);
    CHECK(admissible_bounds(src, spec).dx == 0.0);
  }

  TEST_CASE("table shape and sign errors are rejected") {
    const SourceFile f = efcf_instance(0.2);
    CHECK_THROWS_AS(make_distortion_spec(f.source, hamming(3, 2), hamming(3, 3)), InvalidInput);
    Table neg = hamming(3, 3);
    neg(0, 1) = -1.0;
    CHECK_THROWS_AS(make_distortion_spec(f.source, hamming(2, 2), neg), InvalidInput);
  }

  TEST_CASE("source documents round-trip through JSON") {
    const SourceFile f = efcf_instance(0.2);
    const SourceFile g = parse_source_json(to_json(f));
    CHECK(g.source.joint_pmf().values() == f.source.joint_pmf().values());
    CHECK(g.spec.dx_table.values() == f.spec.dx_table.values());
    CHECK(g.spec.data_recon_alphabet == f.spec.data_recon_alphabet);

    const SourceFile disk = load_source_file(JDSLC_DATA_DIR "/efcf_0.2.json");
    for (std::size_t i = 0; i < f.source.joint_pmf().size(); ++i) {
      CHECK(disk.source.joint_pmf().values()[i] == doctest::Approx(f.source.joint_pmf().values()[i]));
    }
  }

  TEST_CASE("malformed documents are rejected") {
    nlohmann::json doc = to_json(efcf_instance(0.2));
    doc["joint_pmf"] = {{0.5, 0.0, 0.1}, {0.0, 0.4, 0.1}};
    CHECK_THROWS_AS(parse_source_json(doc), InvalidInput);
    doc = to_json(efcf_instance(0.2));
    doc.erase("dx_table");
    CHECK_THROWS_AS(parse_source_json(doc), InvalidInput);
    CHECK_THROWS_AS(load_source_file("/nonexistent/source.json"), InvalidInput);
  }
}

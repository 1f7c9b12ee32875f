#include "prefshift/env.hpp"

#include "doctest.h"
#include "prefshift/rng.hpp"

using namespace prefshift;

TEST_SUITE("env") {

TEST_CASE("engagement at cardinal separations") {
  PrefSpace space(36);
  CHECK(engagement(space, 0, 0) == doctest::Approx(1.0));
  CHECK(engagement(space, 0, 18) == doctest::Approx(-1.0));
  CHECK(std::abs(engagement(space, 0, 9)) < 1e-12);
  CHECK(std::abs(engagement(space, 0, 27)) < 1e-12);
}

TEST_CASE("engagement symmetry and rotation invariance") {
  PrefSpace space(36);
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int u = static_cast<int>(rng.uniform01() * 36);
    const int x = static_cast<int>(rng.uniform01() * 36);
    const int k = static_cast<int>(rng.uniform01() * 36);
    CHECK(engagement(space, u, x) == doctest::Approx(engagement(space, x, u)));
    CHECK(engagement(space, (u + k) % 36, (x + k) % 36) ==
          doctest::Approx(engagement(space, u, x)));
  }
}

TEST_CASE("engagement rejects out-of-range bins") {
  PrefSpace space(36);
  CHECK_THROWS_AS(engagement(space, -1, 0), std::out_of_range);
  CHECK_THROWS_AS(engagement(space, 0, 36), std::out_of_range);
}

TEST_CASE("bin to angle round trip is the identity") {
  PrefSpace space(36);
  for (int i = 0; i < 36; ++i) CHECK(space.bin_of_deg(space.bin_center_deg(i)) == i);
}

TEST_CASE("wrapped gaussian slate") {
  PrefSpace space(36);
  SUBCASE("mode at the mean") {
    const Slate s = make_wrapped_gaussian_slate(space, 130.0, 30.0);
    int argmax = 0;
    s.probs.maxCoeff(&argmax);
    CHECK(argmax == space.bin_of_deg(130.0));
  }
  SUBCASE("normalized for any parameters") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      const Slate s = make_wrapped_gaussian_slate(space, 360.0 * rng.uniform01(),
                                                  5.0 + 100.0 * rng.uniform01());
      CHECK(std::abs(s.probs.sum() - 1.0) <= 1e-9);
      CHECK(s.probs.minCoeff() >= 0.0);
    }
  }
  SUBCASE("symmetric about a zero mean") {
    const Slate s = make_wrapped_gaussian_slate(space, 0.0, 30.0);
    for (int i = 1; i < 36; ++i) CHECK(s.probs[i] == doctest::Approx(s.probs[36 - i]).epsilon(1e-9));
  }
  SUBCASE("rejects non-positive std") {
    CHECK_THROWS_AS(make_wrapped_gaussian_slate(space, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_wrapped_gaussian_slate(space, 0.0, -3.0), std::invalid_argument);
  }
}

TEST_CASE("uniform slate") {
  PrefSpace s36(36), s4(4);
  const Slate u36 = uniform_slate(s36), u4 = uniform_slate(s4);
  for (int i = 0; i < 36; ++i) CHECK(u36.probs[i] == doctest::Approx(1.0 / 36));
  for (int i = 0; i < 4; ++i) CHECK(u4.probs[i] == doctest::Approx(0.25));
  CHECK(std::abs(u36.probs.sum() - 1.0) < 1e-12);
}

TEST_CASE("simplex check") {
  Eigen::VectorXd good(3), bad_sum(3), bad_neg(3);
  good << 0.2, 0.3, 0.5;
  bad_sum << 0.2, 0.3, 0.6;
  bad_neg << -0.1, 0.6, 0.5;
  CHECK(is_simplex(good));
  CHECK_FALSE(is_simplex(bad_sum));
  CHECK_FALSE(is_simplex(bad_neg));
}

}  // TEST_SUITE

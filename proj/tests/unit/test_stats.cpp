#include <doctest.h>

#include <numeric>

#include "flairkit/stats.hpp"
#include "flairkit/volume.hpp"

using namespace flairkit;

TEST_SUITE("stats") {
  TEST_CASE("percentile uses the (N+1) rank with linear interpolation") {
    const std::vector<double> v{1.34, 3.30, 6.89};
    CHECK(percentile(v, 50) == 3.30);
    CHECK(percentile(v, 25) == 1.34);  // rank 1.0
    CHECK(percentile(v, 75) == 6.89);  // rank 3.0

    std::vector<double> ramp(1000);
    std::iota(ramp.begin(), ramp.end(), 1.0);
    // rank 0.995 * 1001 = 995.995
    CHECK(percentile(ramp, 99.5) == doctest::Approx(995.995).epsilon(1e-12));
    CHECK(percentile(ramp, 0) == 1.0);
    CHECK(percentile(ramp, 100) == 1000.0);
    const std::vector<double> four{4, 1, 3, 2};
    CHECK(percentile(four, 50) == 2.5);
  }

  TEST_CASE("percentile rejects bad input") {
    CHECK_THROWS_AS(percentile(std::vector<double>{}, 50), Error);
    CHECK_THROWS_AS(percentile(std::vector<double>{1.0}, 101), Error);
  }

  TEST_CASE("sample standard deviation") {
    const std::vector<double> v{0.1, 0.2, 0.3};
    CHECK(mean(v) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(sample_std(v) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(sample_std(std::vector<double>{5.0}) == 0.0);
  }

  TEST_CASE("median [IQR] formatting") {
    const std::vector<double> v{6.89, 1.34, 3.30};
    const auto m = median_iqr(v);
    REQUIRE(m);
    CHECK(format_median_iqr(*m) == "3.30 [1.34-6.89]");
    CHECK(m->count == 3);
    CHECK_FALSE(median_iqr(std::vector<double>{}).has_value());
  }
}

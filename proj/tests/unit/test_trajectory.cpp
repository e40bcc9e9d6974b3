#include <servofunnel/trajectory.hpp>

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace servofunnel;

namespace {

// sigma(j/16) * 16^15 in exact integer arithmetic.
__int128 scaled_sigma_sixteenths(int j) {
    __int128 acc = 0;
    for (int i = 0; i < 8; ++i) {
        const int power = 15 - i;
        __int128 term = static_cast<__int128>(kSmoothStepCoefficients[i]);
        for (int n = 0; n < power; ++n) term *= j;
        for (int n = power; n < 15; ++n) term *= 16;
        acc += term;
    }
    return acc;
}

long double binomial(int n, int k) {
    long double r = 1.0L;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// The degree-15 smooth step is the upper tail of a binomial distribution.
long double bernstein_sigma(long double x) {
    long double acc = 0.0L;
    for (int j = 8; j <= 15; ++j) acc += binomial(15, j) * std::pow(x, j) * std::pow(1.0L - x, 15 - j);
    return acc;
}

long double bernstein_slope(long double x) {
    return 15.0L * binomial(14, 7) * std::pow(x, 7) * std::pow(1.0L - x, 7);
}

}  // namespace

TEST_CASE("two-revolution trajectory constants") {
    const auto spec = TrajectorySpec::two_revolutions();
    CHECK(spec.y0 == 0.0);
    CHECK(spec.yf == 4.0 * std::numbers::pi);
    CHECK(spec.t0 == 0.0);
    CHECK(spec.tf == 10.0);
    CHECK_NOTHROW(spec.validate());
}

TEST_CASE("timing law coefficients sum to one") {
    double sum = 0.0;
    for (double c : kSmoothStepCoefficients) sum += c;
    CHECK(sum == 1.0);
}

TEST_CASE("endpoints and midpoint") {
    const auto spec = TrajectorySpec::two_revolutions();
    CHECK(std::abs(sigma(spec, 0.0)) <= 1e-12);
    CHECK(std::abs(sigma(spec, 10.0) - 1.0) <= 1e-12);
    CHECK(scaled_sigma_sixteenths(8) * 2 == static_cast<__int128>(1) << 60);
    CHECK(sigma(spec, 5.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("sigma matches exact rational values on a dyadic grid") {
    const auto spec = TrajectorySpec::two_revolutions();
    const long double scale = std::ldexp(1.0L, 60);
    for (int j = 0; j <= 16; ++j) {
        const long double exact = static_cast<long double>(scaled_sigma_sixteenths(j)) / scale;
        CHECK(std::abs(sigma(spec, 10.0 * j / 16.0) - static_cast<double>(exact)) <= 2e-16);
    }
}

TEST_CASE("sigma matches the Bernstein form") {
    TrajectorySpec spec{1.0, 3.0, 2.0, 6.0};
    for (int i = 0; i <= 400; ++i) {
        const double t = 2.0 + 4.0 * i / 400.0;
        const long double x = (t - 2.0L) / 4.0L;
        CHECK(std::abs(sigma(spec, t) - static_cast<double>(bernstein_sigma(x))) <= 1e-14);
        CHECK(sigma_derivative(spec, t) ==
              doctest::Approx(static_cast<double>(bernstein_slope(x) / 4.0L)).epsilon(1e-12));
    }
}

TEST_CASE("sigma is nondecreasing and stays in [0, 1]") {
    const auto spec = TrajectorySpec::two_revolutions();
    double prev = sigma(spec, 0.0);
    for (int i = 1; i <= 10000; ++i) {
        const double s = sigma(spec, 10.0 * i / 10000.0);
        CHECK(s >= prev);
        CHECK(s >= -1e-12);
        CHECK(s <= 1.0 + 1e-12);
        prev = s;
    }
}

TEST_CASE("point symmetry about the midpoint") {
    const auto spec = TrajectorySpec::two_revolutions();
    for (int i = 0; i <= 1000; ++i) {
        const double t = 10.0 * i / 1000.0;
        CHECK(std::abs(sigma(spec, t) + sigma(spec, 10.0 - t) - 1.0) <= 1e-12);
    }
}

TEST_CASE("slope agrees with a central difference") {
    const auto spec = TrajectorySpec::two_revolutions();
    const double h = 1e-5;
    for (double t : {0.5, 2.0, 4.9, 7.3, 9.5}) {
        const double fd = (sigma(spec, t + h) - sigma(spec, t - h)) / (2.0 * h);
        CHECK(sigma_derivative(spec, t) == doctest::Approx(fd).epsilon(1e-7));
    }
    CHECK(sigma_derivative(spec, 0.0) == 0.0);
    CHECK(sigma_derivative(spec, 10.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("sigma outside the window is a domain error") {
    const auto spec = TrajectorySpec::two_revolutions();
    CHECK_THROWS_AS(sigma(spec, -1e-3), std::domain_error);
    CHECK_THROWS_AS(sigma(spec, 10.001), std::domain_error);
    CHECK_THROWS_AS(sigma_derivative(spec, 11.0), std::domain_error);
}

TEST_CASE("reference is constant outside the window and continuous at its ends") {
    const auto spec = TrajectorySpec::two_revolutions();
    CHECK(y_ref_at(spec, -1.0) == 0.0);
    CHECK(y_ref_at(spec, 12.0) == spec.yf);
    CHECK(y_ref_derivative(spec, 14.0) == 0.0);
    CHECK(std::abs(y_ref_at(spec, 10.0) - spec.yf) <= 1e-11);
    CHECK(y_ref_at(spec, 0.0) == doctest::Approx(0.0));
    CHECK(y_ref_at(spec, 5.0) == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-15));
}

TEST_CASE("rest trajectory is identically zero") {
    TrajectorySpec rest{0.0, 0.0, 0.0, 10.0};
    for (double t : {0.0, 3.0, 10.0, 15.0}) {
        CHECK(y_ref_at(rest, t) == 0.0);
        CHECK(y_ref_derivative(rest, t) == 0.0);
    }
}

TEST_CASE("validation") {
    TrajectorySpec spec = TrajectorySpec::two_revolutions();
    spec.tf = spec.t0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = TrajectorySpec::two_revolutions();
    spec.yf = INFINITY;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = TrajectorySpec::two_revolutions();
    spec.coefficients[7] = 6000.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

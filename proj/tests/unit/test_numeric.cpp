#include "tips/numeric.h"
#include "tips/rng.h"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace tips;

namespace {

// Reference phi without the series branch, in long double.
long double phi_ref(long double x) {
    return -std::expm1(-x) / x;
}

double phi_inverse_bisect(double y) {
    double lo = 0.0;
    double hi = 1.0;
    while (phi_ref(hi) > y) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (phi_ref(mid) > y) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("phi values and limits") {
    CHECK(numeric::phi(0.0) == 1.0);
    CHECK(numeric::phi(1.0) == doctest::Approx(0.6321205588).epsilon(1e-10));
    for (double x : {1e-9, 1e-7, 1e-6, 2e-6, 1e-4, 0.01, 0.5, 3.0, 50.0}) {
        CAPTURE(x);
        CHECK(numeric::phi(x) == doctest::Approx(static_cast<double>(phi_ref(x))).epsilon(1e-12));
        CHECK(std::isfinite(numeric::phi(x)));
    }
}

TEST_CASE("phi derivative against finite differences") {
    for (double x : {1e-5, 1e-3, 0.1, 1.0, 5.0}) {
        const double h = 1e-6 * std::max(1.0, x);
        const double fd = static_cast<double>((phi_ref(x + h) - phi_ref(x - h)) / (2 * h));
        CHECK(numeric::phi_derivative(x) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("phi inverse") {
    CHECK(numeric::phi_inverse(1.0) == 0.0);
    CHECK(std::isinf(numeric::phi_inverse(0.0)));
    CHECK(numeric::phi_inverse(0.9) == doctest::Approx(0.2145).epsilon(5e-4));
    CHECK(numeric::phi(numeric::phi_inverse(0.9)) == doctest::Approx(0.9).epsilon(1e-12));
    RandomStream rng(1, 1, 1);
    for (int i = 0; i < 1000; ++i) {
        const double y = 0.01 + 0.99 * rng.uniform_open();
        const double x = numeric::phi_inverse(y);
        REQUIRE(std::abs(numeric::phi(x) - y) <= 1e-12);
        REQUIRE(x == doctest::Approx(phi_inverse_bisect(y)).epsilon(1e-9));
    }
    for (double y : {1.0 - 1e-12, 1.0 - 1e-8, 1.0 - 1e-5, 0.999}) {
        CHECK(numeric::phi(numeric::phi_inverse(y)) == doctest::Approx(y).epsilon(1e-14));
    }
}

TEST_CASE("Poisson CDF") {
    auto naive = [](int k, double mu) {
        double term = std::exp(-mu);
        double s = term;
        for (int i = 1; i <= k; ++i) {
            term *= mu / i;
            s += term;
        }
        return s;
    };
    for (int k : {0, 1, 5, 20}) {
        for (double mu : {0.01, 0.05, 1.0, 4.0, 15.0}) {
            CHECK(numeric::poisson_cdf(k, mu) == doctest::Approx(naive(k, mu)).epsilon(1e-12));
        }
    }
    CHECK(numeric::poisson_cdf(10000, 0.05) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(numeric::poisson_cdf(3, 0.0) == 1.0);
}

TEST_CASE("random streams") {
    RandomStream a(5, 1, 2);
    RandomStream b(5, 1, 2);
    RandomStream c(5, 1, 3);
    RandomStream d(5, 2, 2);
    int same_c = 0;
    int same_d = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next_u64();
        REQUIRE(x == b.next_u64());
        same_c += x == c.next_u64();
        same_d += x == d.next_u64();
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);

    RandomStream r(9, 9, 9);
    const int n = 200000;
    double su = 0, se = 0, sn = 0, sn2 = 0;
    std::uint64_t below_hist[7] = {};
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        se += r.exponential(2.0);
        const double z = r.normal(1.0, 3.0);
        sn += z;
        sn2 += z * z;
        ++below_hist[r.below(7)];
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(se / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sn / n == doctest::Approx(1.0).epsilon(0.03));
    CHECK(std::sqrt(sn2 / n - (sn / n) * (sn / n)) == doctest::Approx(3.0).epsilon(0.01));
    for (auto h : below_hist) CHECK(static_cast<double>(h) / n == doctest::Approx(1.0 / 7).epsilon(0.03));
}

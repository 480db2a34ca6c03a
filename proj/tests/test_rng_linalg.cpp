#include <doctest.h>

#include <cmath>
#include <set>

#include "mixopt/linalg.hpp"
#include "mixopt/rng.hpp"

using namespace mixopt;

TEST_CASE("stateless streams are deterministic and index-addressable") {
    CHECK(stateless_uniform(42, 7) == stateless_uniform(42, 7));
    CHECK(stateless_uniform(42, 7) != stateless_uniform(42, 8));
    CHECK(stateless_uniform(42, 7) != stateless_uniform(43, 7));
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const double u = stateless_uniform(9, i);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("normal quantile inverts the cdf") {
    for (double p : {0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999}) {
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
    }
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
    // known value: 97.5% quantile
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("stateless normals have roughly unit moments") {
    double sum = 0.0, sum2 = 0.0;
    const std::size_t n = 20000;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = stateless_normal(3, i);
        sum += z;
        sum2 += z * z;
    }
    CHECK(std::fabs(sum / n) < 0.02);
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("halton points fill the unit cube") {
    std::set<std::vector<double>> seen;
    for (std::uint64_t i = 0; i < 100; ++i) {
        auto p = halton_point(i, 8);
        REQUIRE(p.size() == 8);
        for (double v : p) {
            CHECK(v >= 0.0);
            CHECK(v < 1.0);
        }
        CHECK(seen.insert(p).second);  // all distinct
    }
    // first base-2 coordinate follows the van der Corput sequence
    CHECK(halton_point(0, 1)[0] == doctest::Approx(0.5));
    CHECK(halton_point(1, 1)[0] == doctest::Approx(0.25));
    CHECK(halton_point(2, 1)[0] == doctest::Approx(0.75));
}

TEST_CASE("cholesky reconstructs and solves") {
    Rng rng(5);
    const std::size_t n = 20;
    Matrix a(n, n);
    // random SPD: B B^T + n I
    Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b(i, j) = rng.uniform(-1, 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = i == j ? static_cast<double>(n) : 0.0;
            for (std::size_t k = 0; k < n; ++k) s += b(i, k) * b(j, k);
            a(i, j) = s;
        }

    auto l = cholesky(a);
    REQUIRE(l.has_value());
    // L L^T = A
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += (*l)(i, k) * (*l)(j, k);
            CHECK(s == doctest::Approx(a(i, j)).epsilon(1e-10));
        }

    Vector x_true(n);
    for (auto& v : x_true) v = rng.uniform(-2, 2);
    Vector rhs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) rhs[i] += a(i, j) * x_true[j];
    Vector x = solve_cholesky(*l, rhs);
    for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-8));
}

TEST_CASE("cholesky rejects indefinite matrices") {
    Matrix a(2, 2);
    a(0, 0) = 1.0;
    a(0, 1) = a(1, 0) = 2.0;
    a(1, 1) = 1.0;  // eigenvalues 3, -1
    CHECK(!cholesky(a).has_value());
}

TEST_CASE("inverse_from_cholesky matches serial reference bitwise") {
    Rng rng(17);
    const std::size_t n = 64;
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = rng.uniform(-0.5, 0.5);
            a(i, j) = a(j, i) = v;
        }
        a(i, i) += static_cast<double>(n);
    }
    auto l = cholesky(a);
    REQUIRE(l.has_value());
    Matrix m_par = inverse_from_cholesky(*l);
    Matrix m_ser = reference::inverse_from_cholesky(*l);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) CHECK(m_par(i, j) == m_ser(i, j));

    // and it actually inverts: A * M = I
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += a(i, k) * m_par(k, j);
            CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
        }
}

#include <cmath>
#include <vector>

#include <doctest.h>

#include "aream/rng.hpp"
#include "support/oracles.hpp"
#include "aream/tensor.hpp"

using namespace aream;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = scale * rng.normal();
    return t;
}

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("from_data validates length") {
    CHECK_THROWS_AS(Tensor::from_data({2, 3}, {1.0, 2.0}), std::invalid_argument);
    const Tensor t = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    CHECK(t(1, 0) == 3.0);
}

TEST_CASE("softmax worked examples") {
    const Tensor a = Tensor::from_data({2}, {0.0, 0.0});
    auto sa = softmax_over_axis(a, 0);
    CHECK(sa[0] == doctest::Approx(0.5).epsilon(1e-12));

    const Tensor b = Tensor::from_data({2}, {std::log(2.0), 0.0});
    auto sb = softmax_over_axis(b, 0);
    CHECK(sb[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(sb[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const Tensor c = Tensor::from_data({2}, {1000.0, 0.0});
    auto sc = softmax_over_axis(c, 0);
    CHECK(sc[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sc[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("softmax invalid axis") {
    const Tensor t({2, 2});
    CHECK_THROWS_AS(softmax_over_axis(t, 2), std::invalid_argument);
}

TEST_CASE("softmax slices sum to one at any magnitude") {
    Rng rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        const double scale = std::pow(10.0, rng.uniform(0.0, 6.0));
        Tensor t = random_tensor({3, 5, 4}, rng, scale);
        for (std::size_t axis = 0; axis < 3; ++axis) {
            const Tensor s = softmax_over_axis(t, axis);
            std::size_t inner = 1;
            for (std::size_t a = axis + 1; a < 3; ++a) inner *= t.extent(a);
            const std::size_t n = t.extent(axis);
            const std::size_t outer = t.size() / (n * inner);
            for (std::size_t o = 0; o < outer; ++o) {
                for (std::size_t i = 0; i < inner; ++i) {
                    double sum = 0.0;
                    for (std::size_t k = 0; k < n; ++k) sum += s[o * n * inner + k * inner + i];
                    CHECK(std::abs(sum - 1.0) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("minmax worked examples") {
    const Tensor a = Tensor::from_data({3}, {2, 4, 6});
    const Tensor na = minmax_normalize(a);
    CHECK(na[0] == 0.0);
    CHECK(na[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(na[2] == 1.0);

    const Tensor b = Tensor::from_data({2}, {3, 3});
    const Tensor nb = minmax_normalize(b);
    CHECK(nb[0] == 0.0);
    CHECK(nb[1] == 0.0);

    const Tensor c = Tensor::from_data({2}, {0, 1});
    const Tensor nc = minmax_normalize(c);
    CHECK(nc[0] == 0.0);
    CHECK(nc[1] == 1.0);
}

TEST_CASE("minmax idempotent on non-constant input") {
    Rng rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        Tensor t = random_tensor({17}, rng, 3.0);
        const Tensor once = minmax_normalize(t);
        const Tensor twice = minmax_normalize(once);
        for (std::size_t i = 0; i < once.size(); ++i) CHECK(once[i] == twice[i]);
    }
}

TEST_CASE("normalized entropy worked examples") {
    CHECK(normalized_entropy(Tensor::from_data({4}, {0.25, 0.25, 0.25, 0.25})) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(normalized_entropy(Tensor::from_data({4}, {0, 1, 0, 0})) == 0.0);
    CHECK(normalized_entropy(Tensor::from_data({4}, {0.5, 0.5, 0, 0})) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("normalized entropy rejects invalid distributions") {
    CHECK_THROWS_AS(normalized_entropy(Tensor::from_data({2}, {0.7, 0.4})),
                    std::invalid_argument);
    CHECK_THROWS_AS(normalized_entropy(Tensor::from_data({2}, {-0.1, 1.1})),
                    std::invalid_argument);
    CHECK_THROWS_AS(normalized_entropy(Tensor::from_data({1}, {1.0})), std::invalid_argument);
}

TEST_CASE("normalized entropy bounded, 1 only at uniform") {
    Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 2 + rng.next_index(10);
        std::vector<double> p(n);
        double sum = 0.0;
        for (double& v : p) {
            v = rng.next_double() + 1e-4;
            sum += v;
        }
        bool uniform = true;
        for (double& v : p) v /= sum;
        for (double v : p) uniform = uniform && std::abs(v - 1.0 / n) < 1e-12;
        const double h = normalized_entropy(std::span<const double>(p));
        CHECK(h >= 0.0);
        CHECK(h <= 1.0);
        if (!uniform) CHECK(h < 1.0);
    }
}

TEST_CASE("matmul matches the naive oracle") {
    Rng rng(123);
    for (int rep = 0; rep < 10; ++rep) {
        const Tensor a = random_tensor({8, 8}, rng);
        const Tensor b = random_tensor({8, 8}, rng);
        const Tensor got = matmul(a, b);
        const Tensor want = oracle::matmul(a, b);
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(std::abs(got[i] - want[i]) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(matmul(Tensor({2, 3}), Tensor({2, 3})), std::invalid_argument);
}

TEST_CASE("pairwise sum matches sequential sum") {
    Rng rng(5);
    std::vector<double> v(1000);
    double plain = 0.0;
    for (double& x : v) {
        x = rng.normal();
        plain += x;
    }
    CHECK(pairwise_sum(v) == doctest::Approx(plain).epsilon(1e-12));
}

}  // TEST_SUITE

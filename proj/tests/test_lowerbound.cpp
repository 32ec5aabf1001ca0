#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "lrm/datagen.hpp"
#include "lrm/lowerbound.hpp"
#include "lrm/matrix.hpp"
#include "lrm/metrics.hpp"

using namespace lrm;

namespace {

void check_pairwise_distance(const std::vector<Codeword>& words, int min_dist) {
    for (std::size_t i = 0; i < words.size(); ++i)
        for (std::size_t j = i + 1; j < words.size(); ++j)
            CHECK(hamming_distance(words[i], words[j]) >= min_dist);
}

} // namespace

TEST_CASE("vg_packing small cases") {
    // distance 1 is plain distinctness
    const auto two = vg_packing(8, 1, 2, 1);
    CHECK(two.size() == 2);
    CHECK(two[0] == Codeword(8, 0));
    check_pairwise_distance(two, 1);

    const auto four = vg_packing(16, 2, 4, 2);
    CHECK(four.size() == 4);
    check_pairwise_distance(four, 2);

    const auto eight = vg_packing(24, 3, 8, 3);
    CHECK(eight.size() == 8);
    check_pairwise_distance(eight, 3);

    CHECK_THROWS_AS(vg_packing(4, 5, 2, 1), std::invalid_argument);
}

TEST_CASE("vg_packing meets the volume-bound cardinality at d = ceil(n/8)") {
    for (int n_bits : {16, 24, 32}) {
        const int d = (n_bits + 7) / 8;
        const std::size_t target = static_cast<std::size_t>(1) << d;
        const auto words = vg_packing(n_bits, d, target, 7);
        CHECK(words.size() >= target);
        check_pairwise_distance(words, d);
    }
}

TEST_CASE("vg_packing deterministic and order-insensitive guarantee") {
    const auto a = vg_packing(16, 2, 16, 5);
    const auto b = vg_packing(16, 2, 16, 5);
    CHECK(a == b);
    // different seed, same guarantee
    const auto c = vg_packing(16, 2, 16, 99);
    CHECK(c.size() == 16);
    check_pairwise_distance(c, 2);
}

TEST_CASE("hypothesis_set lifts codewords onto the first s columns") {
    const PackingDesign design = hypothesis_set(2, 2, 1, 1, 1.0, 1.0, 3);
    CHECK(design.n_bits == 2);
    REQUIRE(!design.hypotheses.empty());
    CHECK(frobenius_norm(design.hypotheses.front()) == 0.0); // zero matrix included
    for (const Matrix& h : design.hypotheses) {
        for (int i = 0; i < 2; ++i) {
            CHECK((h(i, 0) == 0.0 || h(i, 0) == 1.0));
            CHECK(h(i, 1) == 0.0);
        }
    }
}

TEST_CASE("hypothesis_set invariants") {
    const int m = 8, t = 6, s = 2;
    const long n_obs = 16;
    const double gamma = 0.5, nu = 2.0;
    const PackingDesign design = hypothesis_set(m, t, n_obs, s, gamma, nu, 11);

    CHECK(design.n_bits == s * m);
    CHECK(design.min_dist == 2);
    CHECK(design.codewords.size() >= 4);
    CHECK(design.codewords[0] == Codeword(s * m, 0));

    const double level = gamma * nu / std::sqrt(static_cast<double>(n_obs));
    for (const Matrix& h : design.hypotheses) {
        CHECK(numerical_rank(h, 1e-9) <= s);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < t; ++j) {
                if (j < s)
                    CHECK((h(i, j) == 0.0 || h(i, j) == level));
                else
                    CHECK(h(i, j) == 0.0);
            }
    }

    // pairwise squared Frobenius distance >= (gamma nu)^2/N * min_dist
    const double floor_sq = level * level * design.min_dist;
    for (std::size_t i = 0; i < design.hypotheses.size(); ++i)
        for (std::size_t j = i + 1; j < design.hypotheses.size(); ++j) {
            const double d = frobenius_norm(design.hypotheses[i] - design.hypotheses[j]);
            CHECK(d * d >= floor_sq - 1e-12);
        }
    CHECK(floor_sq == doctest::Approx(0.125).epsilon(1e-12));

    CHECK_THROWS_AS(hypothesis_set(4, 4, 16, 5, 1.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("hypothesis_set with an explicit support set") {
    const std::vector<std::pair<int, int>> support{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    const PackingDesign design =
        hypothesis_set(4, 4, 4, 1, 1.0, 2.0, 5, std::nullopt, &support);
    CHECK(design.n_bits == 4);
    for (const Matrix& h : design.hypotheses)
        for (int i = 0; i < 4; ++i)
            for (int j = 1; j < 4; ++j) CHECK(h(i, j) == 0.0);
}

TEST_CASE("kl_budget") {
    const KlBudget zero = kl_budget(100, 1.0, {0.0, 0.0}, 4, 0.1);
    CHECK(zero.mean_kl == 0.0);
    CHECK(zero.satisfied);

    const KlBudget single = kl_budget(100, 1.0, {0.5}, 4, 0.1);
    CHECK(single.kl_values[0] == doctest::Approx(25.0).epsilon(1e-12));

    // card = 2^16, all KL = 1: budget 0.1 ln(2^16 - 1) ~ 1.109
    const std::vector<double> unit_kl(100, 2.0 / 100.0); // kl = N d^2 / 2 = 1
    const KlBudget big = kl_budget(100, 1.0, unit_kl, 1 << 16, 0.1);
    CHECK(big.mean_kl == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(big.budget == doctest::Approx(1.1090339630053646).epsilon(1e-12));
    CHECK(big.satisfied);

    CHECK_THROWS_AS(kl_budget(100, 0.0, {0.1}, 4, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(kl_budget(100, 1.0, {0.1}, 1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(kl_budget(100, 1.0, {0.1}, 4, 0.2), std::invalid_argument);
}

TEST_CASE("psi_rate") {
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(psi_rate(40, 30, 1200, 3, inf, 1.0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(psi_rate(40, 30, 1200, 3, 0.0, 1.0) == 0.0);
    // at M = N and Delta = 1 all three branches meet at 1
    CHECK(psi_rate(50, 50, 50, 2, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(psi_rate(4, 4, 10, 0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(psi_rate(4, 4, 10, 1, 1.0, 2.5), std::invalid_argument);
}

TEST_CASE("packing satisfies the KL budget on the complete design") {
    // regime r_Delta > r with delta_r = 0: gamma^2 = alpha sigma^2 log(2) / 4
    const int m = 8, t = 8;
    const long n_obs = 64;
    const double sigma = 1.0, alpha = 0.1;
    const double gamma = std::sqrt(alpha * sigma * sigma * std::log(2.0) / 4.0);
    const double nu = std::sqrt(static_cast<double>(n_obs)); // CS complete scaling

    const PackingDesign design = hypothesis_set(m, t, n_obs, 2, gamma, nu, 17);
    REQUIRE(design.codewords.size() >= 4);

    std::vector<Mask> masks;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < t; ++j) masks.push_back(PointMask{i, j});
    const SamplingOperator op(m, t, std::move(masks));

    std::vector<double> pred_sq;
    for (std::size_t k = 1; k < design.hypotheses.size(); ++k)
        pred_sq.push_back(prediction_error(op, design.hypotheses[k], design.hypotheses[0]));

    const KlBudget budget =
        kl_budget(n_obs, sigma, pred_sq, design.hypotheses.size(), alpha);
    CHECK(budget.satisfied);
}

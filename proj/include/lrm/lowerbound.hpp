#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "lrm/matrix.hpp"

namespace lrm {

using Codeword = std::vector<std::uint8_t>;

/// Greedy Varshamov-Gilbert packing: scan a seeded random order of n-bit
/// candidates (the zero word first), keep each one at Hamming distance
/// >= min_dist from everything kept so far, stop at target_card or when the
/// candidates run out. For min_dist = ceil(n/8) the volume bound guarantees
/// at least 2^ceil(n/8) codewords.
std::vector<Codeword> vg_packing(int n_bits, int min_dist, std::size_t target_card,
                                 std::uint64_t seed);

int hamming_distance(const Codeword& a, const Codeword& b);

/// Hypothesis family for the minimax lower-bound construction: codewords of
/// length s*m lifted to m x T matrices with entries in {0, gamma nu / sqrt N}
/// on the first s columns (or on an explicit support set).
struct PackingDesign {
    int n_bits = 0;
    int min_dist = 0;
    std::vector<Codeword> codewords;
    int s = 0;
    double gamma = 0.0;
    double nu = 0.0;
    std::vector<Matrix> hypotheses;
};

PackingDesign hypothesis_set(int m, int t, long n_obs, int s, double gamma, double nu,
                             std::uint64_t seed,
                             std::optional<std::size_t> target_card = std::nullopt,
                             const std::vector<std::pair<int, int>>* support = nullptr);

/// Kullback-Leibler budget of the two-point reduction: kl_i = N d_i^2/(2 sigma^2),
/// satisfied iff mean(kl) <= alpha log(card - 1).
struct KlBudget {
    std::vector<double> kl_values;
    double mean_kl = 0.0;
    double budget = 0.0;
    bool satisfied = false;
};

KlBudget kl_budget(long n_obs, double sigma, const std::vector<double>& pred_sq_list,
                   std::size_t card, double alpha);

/// psi_{M,N,r,Delta} = min(r M / N, Delta^p (M/N)^{1-p/2}, Delta^2) with
/// M = max(m,t); Delta = infinity selects the first branch.
double psi_rate(int m, int t, long n_obs, int r, double delta_cap, double p);

} // namespace lrm

#include "lrm/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "lrm/rng.hpp"

namespace lrm {

int hamming_distance(const Codeword& a, const Codeword& b) {
    if (a.size() != b.size()) throw std::invalid_argument("hamming: length mismatch");
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

namespace {

Codeword from_bits(std::uint64_t bits, int n_bits) {
    Codeword w(n_bits, 0);
    for (int i = 0; i < n_bits; ++i) w[i] = static_cast<std::uint8_t>((bits >> i) & 1ULL);
    return w;
}

} // namespace

std::vector<Codeword> vg_packing(int n_bits, int min_dist, std::size_t target_card,
                                 std::uint64_t seed) {
    if (n_bits < 1) throw std::invalid_argument("vg_packing: n_bits >= 1");
    if (min_dist < 1 || min_dist > n_bits)
        throw std::invalid_argument("vg_packing: need 1 <= min_dist <= n_bits");

    std::vector<Codeword> kept;
    kept.push_back(Codeword(n_bits, 0));
    if (target_card <= 1) return kept;

    auto try_keep = [&](const Codeword& candidate) {
        for (const Codeword& w : kept)
            if (hamming_distance(candidate, w) < min_dist) return false;
        kept.push_back(candidate);
        return true;
    };

    Rng rng(seed);
    if (n_bits <= 22) {
        // full seeded permutation of the candidate space, zero first
        const std::uint64_t total = 1ULL << n_bits;
        std::vector<std::uint32_t> order(total);
        std::iota(order.begin(), order.end(), 0u);
        for (std::uint64_t i = 1; i + 1 < total; ++i) {
            const std::uint64_t j = i + rng.uniform_int(total - i);
            std::swap(order[i], order[j]);
        }
        for (std::uint64_t idx = 1; idx < total && kept.size() < target_card; ++idx)
            try_keep(from_bits(order[idx], n_bits));
        return kept;
    }

    // candidate space too large to enumerate: stream seeded random words;
    // the attempt cap stands in for exhaustion
    const std::uint64_t max_attempts =
        4'000'000ULL + 512ULL * static_cast<std::uint64_t>(target_card);
    const int n_limbs = (n_bits + 63) / 64;
    for (std::uint64_t attempt = 0;
         attempt < max_attempts && kept.size() < target_card; ++attempt) {
        Codeword candidate(n_bits);
        for (int limb = 0; limb < n_limbs; ++limb) {
            std::uint64_t bits = rng.next_u64();
            for (int i = limb * 64; i < std::min(n_bits, (limb + 1) * 64); ++i, bits >>= 1)
                candidate[i] = static_cast<std::uint8_t>(bits & 1ULL);
        }
        try_keep(candidate);
    }
    return kept;
}

PackingDesign hypothesis_set(int m, int t, long n_obs, int s, double gamma, double nu,
                             std::uint64_t seed, std::optional<std::size_t> target_card,
                             const std::vector<std::pair<int, int>>* support) {
    if (m < 1 || t < 1 || n_obs < 1) throw std::invalid_argument("hypothesis_set: bad dims");
    if (s < 1 || s > std::min(m, t))
        throw std::invalid_argument("hypothesis_set: need 1 <= s <= min(m,T)");
    if (!(gamma > 0.0) || !(nu > 0.0))
        throw std::invalid_argument("hypothesis_set: gamma, nu > 0");

    std::vector<std::pair<int, int>> cells;
    if (support != nullptr) {
        cells = *support;
        for (const auto& [i, j] : cells)
            if (i < 0 || i >= m || j < 0 || j >= t)
                throw std::invalid_argument("hypothesis_set: support cell out of range");
    } else {
        cells.reserve(static_cast<std::size_t>(s) * m);
        for (int j = 0; j < s; ++j)
            for (int i = 0; i < m; ++i) cells.emplace_back(i, j);
    }

    PackingDesign design;
    design.n_bits = static_cast<int>(cells.size());
    design.min_dist = (design.n_bits + 7) / 8;
    design.s = s;
    design.gamma = gamma;
    design.nu = nu;

    const std::size_t target =
        target_card.value_or(static_cast<std::size_t>(1)
                             << std::min(design.min_dist, 62));
    design.codewords = vg_packing(design.n_bits, design.min_dist, target, seed);

    const double level = gamma * nu / std::sqrt(static_cast<double>(n_obs));
    design.hypotheses.reserve(design.codewords.size());
    for (const Codeword& w : design.codewords) {
        Matrix a(m, t);
        for (std::size_t bit = 0; bit < cells.size(); ++bit)
            if (w[bit]) a(cells[bit].first, cells[bit].second) = level;
        design.hypotheses.push_back(std::move(a));
    }
    return design;
}

KlBudget kl_budget(long n_obs, double sigma, const std::vector<double>& pred_sq_list,
                   std::size_t card, double alpha) {
    if (!(sigma > 0.0)) throw std::invalid_argument("kl_budget: sigma > 0");
    if (card < 2) throw std::invalid_argument("kl_budget: card >= 2");
    if (!(alpha > 0.0) || !(alpha < 0.125))
        throw std::invalid_argument("kl_budget: need 0 < alpha < 1/8");

    KlBudget out;
    const double scale = static_cast<double>(n_obs) / (2.0 * sigma * sigma);
    out.kl_values.reserve(pred_sq_list.size());
    double sum = 0.0;
    for (double d2 : pred_sq_list) {
        const double kl = scale * d2;
        out.kl_values.push_back(kl);
        sum += kl;
    }
    out.mean_kl = pred_sq_list.empty() ? 0.0 : sum / pred_sq_list.size();
    out.budget = alpha * std::log(static_cast<double>(card) - 1.0);
    out.satisfied = out.mean_kl <= out.budget;
    return out;
}

double psi_rate(int m, int t, long n_obs, int r, double delta_cap, double p) {
    if (r < 1) throw std::invalid_argument("psi_rate: r >= 1");
    if (!(p > 0.0) || p > 2.0) throw std::invalid_argument("psi_rate: need p in (0,2]");
    if (n_obs < 1) throw std::invalid_argument("psi_rate: N >= 1");
    if (delta_cap < 0.0) throw std::invalid_argument("psi_rate: Delta >= 0");

    const double big_m = static_cast<double>(std::max(m, t));
    const double n = static_cast<double>(n_obs);
    const double first = r * big_m / n;
    if (std::isinf(delta_cap)) return first;
    const double second = std::pow(delta_cap, p) * std::pow(big_m / n, 1.0 - p / 2.0);
    const double third = delta_cap * delta_cap;
    return std::min({first, second, third});
}

} // namespace lrm

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparselab/matrix.hpp"
#include "sparselab/rng.hpp"

namespace sparselab {

// Binary gate aligned element-wise with a parameter tensor. Bits start
// all-ones; the generation counter tracks how many updates have been applied.
struct Mask {
    std::vector<std::uint8_t> bits;
    std::int64_t generation = 0;

    static Mask ones(Index n) {
        Mask m;
        m.bits.assign(static_cast<std::size_t>(n), 1);
        return m;
    }

    Index size() const { return static_cast<Index>(bits.size()); }

    Index ones_count() const {
        Index c = 0;
        for (auto b : bits) c += b;
        return c;
    }

    // Fraction of zero bits.
    double sparsity() const {
        if (bits.empty()) return 0.0;
        return 1.0 - static_cast<double>(ones_count()) / static_cast<double>(size());
    }
};

// Cubic ramp to the final sparsity r: r_t = r - r * (1 - t/T)^3.
// r_0 = 0, r_T = r, nondecreasing in between.
struct SparsitySchedule {
    double final_sparsity = 0.0;
    std::int64_t total_iterations = 0;
    std::int64_t update_interval = 100;

    double target_sparsity(std::int64_t t) const {
        detail::check(total_iterations >= 1, "target_sparsity: empty schedule");
        if (t < 0 || t > total_iterations) {
            throw std::out_of_range("target_sparsity: step outside [0, total_iterations]");
        }
        const double frac = 1.0 - static_cast<double>(t) / static_cast<double>(total_iterations);
        return final_sparsity - final_sparsity * frac * frac * frac;
    }
};

// Kept-element count at sparsity r_t: floor(n * (1 - r_t)), at least 1.
inline std::int64_t keep_count(std::int64_t n, double r_t) {
    detail::check(n >= 1, "keep_count: need at least one element");
    const auto k = static_cast<std::int64_t>(static_cast<double>(n) * (1.0 - r_t));
    return k < 1 ? 1 : k;
}

// One tensor participating in a global ranking. Pointers are non-owning; the
// model owns its weights and masks.
struct PruneEntry {
    std::string id;
    Matrix* weights = nullptr;
    Mask* mask = nullptr;
};

struct PruneGroup {
    std::vector<PruneEntry> entries;

    Index total_elements() const {
        Index n = 0;
        for (const auto& e : entries) n += e.weights->size();
        return n;
    }

    Index ones_count() const {
        Index c = 0;
        for (const auto& e : entries) c += e.mask->ones_count();
        return c;
    }

    double sparsity() const {
        const Index n = total_elements();
        if (n == 0) return 0.0;
        return 1.0 - static_cast<double>(ones_count()) / static_cast<double>(n);
    }
};

// Magnitude scores |w| over the group's flat concatenation (entry order, then
// row-major within each tensor). Rejects NaN weights.
std::vector<double> importance_scores(const PruneGroup& group);

// k-th largest score.
double select_threshold(const std::vector<double>& scores, std::int64_t k);

// Gate bits on score >= threshold; ties at the threshold are kept in
// ascending flat-index order until exactly k bits survive. Previously zeroed
// bits may return to 1. Bumps every mask generation.
void update_mask(PruneGroup& group, const std::vector<double>& scores, double threshold,
                 std::int64_t k);

// Rescore + threshold + gate for one target sparsity; returns realized
// sparsity (exactly 1 - k/n).
double prune_to_sparsity(PruneGroup& group, double r_t);

// w_tilde = w ⊙ m.
Matrix apply_mask(const Matrix& w, const Mask& m);
void apply_mask_inplace(Matrix& w, const Mask& m);

enum class StrategyKind {
    IterativePruning,   // all-ones start, periodic updates
    OptimalSubnetwork,  // final mask of a completed iterative run, frozen
    RandomSubnetwork,   // uniformly random mask at sparsity r, frozen
};

StrategyKind strategy_from_string(const std::string& s);
std::string to_string(StrategyKind k);

struct StrategyPolicy {
    StrategyKind kind = StrategyKind::IterativePruning;
    bool updates_enabled = true;  // false for the two frozen strategies
};

// Initializes every mask in the group according to the strategy and returns
// the update policy. OptimalSubnetwork loads `artifact_path` and requires
// shapes to line up; RandomSubnetwork keeps exactly keep_count(n, r) bits
// chosen uniformly from `rng`.
StrategyPolicy make_strategy_mask(StrategyKind kind, PruneGroup& group, double r, Rng& rng,
                                  const std::string& artifact_path = "");

// --- mask artifact file -------------------------------------------------
// Little-endian: magic "SLMK", u32 version, u32 tensor count, then per tensor
// u32 id length, id bytes, u32 ndim, u64 dims, u64 bit count, packed bitset
// (LSB first within each byte).

struct MaskArtifactEntry {
    std::string id;
    std::vector<std::uint64_t> dims;
    Mask mask;
};

struct MaskArtifact {
    std::vector<MaskArtifactEntry> entries;

    double sparsity() const;
};

void save_mask_artifact(const std::string& path, const PruneGroup& group);
MaskArtifact load_mask_artifact(const std::string& path);

}  // namespace sparselab

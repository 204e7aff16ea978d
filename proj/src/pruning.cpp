#include "sparselab/pruning.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sparselab {

std::vector<double> importance_scores(const PruneGroup& group) {
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(group.total_elements()));
    for (const auto& e : group.entries) {
        const Matrix& w = *e.weights;
        detail::check(e.mask->size() == w.size(), "importance_scores: mask/tensor size mismatch");
        for (Index i = 0; i < w.size(); ++i) {
            if (std::isnan(w[i])) {
                throw std::runtime_error("importance_scores: NaN weight in tensor '" + e.id + "'");
            }
            scores.push_back(std::abs(w[i]));
        }
    }
    return scores;
}

double select_threshold(const std::vector<double>& scores, std::int64_t k) {
    const auto n = static_cast<std::int64_t>(scores.size());
    if (k < 1 || k > n) throw std::out_of_range("select_threshold: k outside [1, len(scores)]");
    std::vector<double> tmp = scores;
    std::nth_element(tmp.begin(), tmp.begin() + (k - 1), tmp.end(), std::greater<double>());
    return tmp[static_cast<std::size_t>(k - 1)];
}

void update_mask(PruneGroup& group, const std::vector<double>& scores, double threshold,
                 std::int64_t k) {
    const Index n = group.total_elements();
    detail::check(static_cast<Index>(scores.size()) == n, "update_mask: score count mismatch");
    detail::check(k >= 1 && k <= n, "update_mask: k out of range");

    // Strictly-above scores always survive; ties at the threshold fill the
    // remaining slots in ascending flat order so exactly k bits are set.
    std::int64_t above = 0;
    for (double s : scores)
        if (s > threshold) ++above;
    std::int64_t tie_budget = k - above;

    Index flat = 0;
    for (auto& e : group.entries) {
        Mask& m = *e.mask;
        for (Index i = 0; i < m.size(); ++i, ++flat) {
            const double s = scores[static_cast<std::size_t>(flat)];
            std::uint8_t bit = 0;
            if (s > threshold) {
                bit = 1;
            } else if (s == threshold && tie_budget > 0) {
                bit = 1;
                --tie_budget;
            }
            m.bits[static_cast<std::size_t>(i)] = bit;
        }
        m.generation += 1;
    }
}

double prune_to_sparsity(PruneGroup& group, double r_t) {
    const Index n = group.total_elements();
    const std::int64_t k = keep_count(n, r_t);
    const auto scores = importance_scores(group);
    const double threshold = select_threshold(scores, k);
    update_mask(group, scores, threshold, k);
    return 1.0 - static_cast<double>(k) / static_cast<double>(n);
}

Matrix apply_mask(const Matrix& w, const Mask& m) {
    detail::check(m.size() == w.size(), "apply_mask: shape mismatch");
    Matrix out = w;
    for (Index i = 0; i < out.size(); ++i)
        if (!m.bits[static_cast<std::size_t>(i)]) out[i] = 0.0;
    return out;
}

void apply_mask_inplace(Matrix& w, const Mask& m) {
    detail::check(m.size() == w.size(), "apply_mask: shape mismatch");
    for (Index i = 0; i < w.size(); ++i)
        if (!m.bits[static_cast<std::size_t>(i)]) w[i] = 0.0;
}

StrategyKind strategy_from_string(const std::string& s) {
    if (s == "iterative") return StrategyKind::IterativePruning;
    if (s == "optimal") return StrategyKind::OptimalSubnetwork;
    if (s == "random") return StrategyKind::RandomSubnetwork;
    throw std::invalid_argument("unknown strategy '" + s + "' (iterative|optimal|random)");
}

std::string to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::IterativePruning: return "iterative";
        case StrategyKind::OptimalSubnetwork: return "optimal";
        case StrategyKind::RandomSubnetwork: return "random";
    }
    return "?";
}

StrategyPolicy make_strategy_mask(StrategyKind kind, PruneGroup& group, double r, Rng& rng,
                                  const std::string& artifact_path) {
    for (auto& e : group.entries) *e.mask = Mask::ones(e.weights->size());

    switch (kind) {
        case StrategyKind::IterativePruning:
            return {kind, true};

        case StrategyKind::RandomSubnetwork: {
            const Index n = group.total_elements();
            const std::int64_t k = keep_count(n, r);
            std::vector<Index> order(static_cast<std::size_t>(n));
            for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
            rng.shuffle(order);
            std::vector<std::uint8_t> keep(static_cast<std::size_t>(n), 0);
            for (std::int64_t i = 0; i < k; ++i) keep[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
            Index flat = 0;
            for (auto& e : group.entries) {
                Mask& m = *e.mask;
                for (Index i = 0; i < m.size(); ++i, ++flat) m.bits[static_cast<std::size_t>(i)] = keep[static_cast<std::size_t>(flat)];
                m.generation += 1;
            }
            return {kind, false};
        }

        case StrategyKind::OptimalSubnetwork: {
            MaskArtifact artifact = load_mask_artifact(artifact_path);
            detail::check(artifact.entries.size() == group.entries.size(),
                          "make_strategy_mask: artifact tensor count mismatch");
            for (std::size_t i = 0; i < group.entries.size(); ++i) {
                auto& e = group.entries[i];
                auto& a = artifact.entries[i];
                detail::check(a.id == e.id, "make_strategy_mask: artifact tensor id mismatch ('" +
                                                a.id + "' vs '" + e.id + "')");
                detail::check(a.mask.size() == e.weights->size(),
                              "make_strategy_mask: artifact mask size mismatch for '" + e.id + "'");
                e.mask->bits = a.mask.bits;
                e.mask->generation += 1;
            }
            return {kind, false};
        }
    }
    throw std::logic_error("make_strategy_mask: unreachable");
}

double MaskArtifact::sparsity() const {
    Index n = 0, ones = 0;
    for (const auto& e : entries) {
        n += e.mask.size();
        ones += e.mask.ones_count();
    }
    if (n == 0) return 0.0;
    return 1.0 - static_cast<double>(ones) / static_cast<double>(n);
}

namespace {

constexpr char kMaskMagic[4] = {'S', 'L', 'M', 'K'};
constexpr std::uint32_t kMaskVersion = 1;

template <typename T>
void write_le(std::ofstream& out, T v) {
    // Host is little-endian on every target we build for.
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("mask artifact truncated: " + path);
    return v;
}

}  // namespace

void save_mask_artifact(const std::string& path, const PruneGroup& group) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open mask artifact for writing: " + path);
    out.write(kMaskMagic, 4);
    write_le<std::uint32_t>(out, kMaskVersion);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(group.entries.size()));
    for (const auto& e : group.entries) {
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.id.size()));
        out.write(e.id.data(), static_cast<std::streamsize>(e.id.size()));
        write_le<std::uint32_t>(out, 2);
        write_le<std::uint64_t>(out, static_cast<std::uint64_t>(e.weights->rows()));
        write_le<std::uint64_t>(out, static_cast<std::uint64_t>(e.weights->cols()));
        const Index bits = e.mask->size();
        write_le<std::uint64_t>(out, static_cast<std::uint64_t>(bits));
        std::vector<std::uint8_t> packed(static_cast<std::size_t>((bits + 7) / 8), 0);
        for (Index i = 0; i < bits; ++i) {
            if (e.mask->bits[static_cast<std::size_t>(i)]) {
                packed[static_cast<std::size_t>(i / 8)] |= static_cast<std::uint8_t>(1u << (i % 8));
            }
        }
        out.write(reinterpret_cast<const char*>(packed.data()),
                  static_cast<std::streamsize>(packed.size()));
    }
    if (!out) throw std::runtime_error("write failed for mask artifact: " + path);
}

MaskArtifact load_mask_artifact(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("mask artifact not found: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMaskMagic, 4) != 0) {
        throw std::runtime_error("bad mask artifact magic: " + path);
    }
    const auto version = read_le<std::uint32_t>(in, path);
    if (version != kMaskVersion) {
        throw std::runtime_error("unsupported mask artifact version in " + path);
    }
    const auto count = read_le<std::uint32_t>(in, path);
    MaskArtifact artifact;
    artifact.entries.resize(count);
    for (auto& e : artifact.entries) {
        const auto id_len = read_le<std::uint32_t>(in, path);
        e.id.resize(id_len);
        in.read(e.id.data(), id_len);
        if (!in) throw std::runtime_error("mask artifact truncated: " + path);
        const auto ndim = read_le<std::uint32_t>(in, path);
        e.dims.resize(ndim);
        for (auto& d : e.dims) d = read_le<std::uint64_t>(in, path);
        const auto bits = read_le<std::uint64_t>(in, path);
        std::vector<std::uint8_t> packed(static_cast<std::size_t>((bits + 7) / 8));
        in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
        if (!in) throw std::runtime_error("mask artifact truncated: " + path);
        e.mask.bits.resize(static_cast<std::size_t>(bits));
        for (std::uint64_t i = 0; i < bits; ++i) {
            e.mask.bits[static_cast<std::size_t>(i)] =
                (packed[static_cast<std::size_t>(i / 8)] >> (i % 8)) & 1u;
        }
    }
    return artifact;
}

}  // namespace sparselab

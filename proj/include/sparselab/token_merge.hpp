#pragma once

#include <cstdint>
#include <vector>

#include "sparselab/matrix.hpp"

namespace sparselab {

// n tokens of dimension d plus bookkeeping for merging: per-token size (how
// many original tokens the row stands for) and a protected flag (class token
// and the like are never merged).
struct TokenBatch {
    Matrix tokens;                            // n x d
    std::vector<std::int64_t> sizes;          // length n, all >= 1
    std::vector<std::uint8_t> protected_flags;  // length n

    static TokenBatch plain(Matrix m) {
        TokenBatch b;
        b.sizes.assign(static_cast<std::size_t>(m.rows()), 1);
        b.protected_flags.assign(static_cast<std::size_t>(m.rows()), 0);
        b.tokens = std::move(m);
        return b;
    }

    Index count() const { return tokens.rows(); }
    Index dim() const { return tokens.cols(); }

    std::int64_t total_size() const {
        std::int64_t s = 0;
        for (auto v : sizes) s += v;
        return s;
    }

    Index unprotected_count() const {
        Index c = 0;
        for (auto f : protected_flags) c += f ? 0 : 1;
        return c;
    }
};

// Token indices of the two halves of the alternating split.
struct TokenPartition {
    std::vector<Index> a;
    std::vector<Index> b;
};

// Merge edges as global token indices; each source appears once, several
// sources may share a destination.
struct MergePlan {
    struct Edge {
        Index source;       // token in set A
        Index destination;  // token in set B
    };
    std::vector<Edge> edges;

    Index merge_count() const { return static_cast<Index>(edges.size()); }
};

// Alternating assignment over unprotected tokens in sequence order: even
// positions to A, odd to B. Requires at least 2 unprotected tokens.
TokenPartition partition_tokens(const TokenBatch& batch);

// score(i, j) = dot(token_A[i], token_B[j]).
Matrix similarity_scores(const TokenBatch& batch, const TokenPartition& p);

// Every A token proposes its best B edge (score ties resolved to the lower B
// index); the m highest-scoring proposals win, ties by lower A index. Single
// pass, no iteration.
MergePlan bipartite_match(const Matrix& scores, const TokenPartition& p, Index m);

// Destinations become the size-weighted mean of themselves plus their
// sources; sizes add; sources drop out; survivor order is input order.
TokenBatch merge_tokens(const TokenBatch& batch, const MergePlan& plan);

// The four steps composed; m = floor(ratio * unprotected), clamped to |A|.
// ratio 0 returns the input unchanged.
TokenBatch single_pass_merge(const TokenBatch& batch, double ratio);

// Gradient of merge_tokens: routes d(output)/d(row) back through the
// size-weighted means. `input` must be the pre-merge batch the plan was built
// for.
Matrix merge_tokens_backward(const TokenBatch& input, const MergePlan& plan,
                             const Matrix& grad_output);

}  // namespace sparselab

#include "sparselab/token_merge.hpp"

#include <algorithm>
#include <stdexcept>

namespace sparselab {

TokenPartition partition_tokens(const TokenBatch& batch) {
    detail::check(batch.sizes.size() == static_cast<std::size_t>(batch.count()) &&
                      batch.protected_flags.size() == static_cast<std::size_t>(batch.count()),
                  "partition_tokens: inconsistent batch bookkeeping");
    TokenPartition p;
    Index pos = 0;
    for (Index t = 0; t < batch.count(); ++t) {
        if (batch.protected_flags[static_cast<std::size_t>(t)]) continue;
        if (pos % 2 == 0) {
            p.a.push_back(t);
        } else {
            p.b.push_back(t);
        }
        ++pos;
    }
    if (pos < 2) throw std::invalid_argument("partition_tokens: fewer than 2 unprotected tokens");
    return p;
}

Matrix similarity_scores(const TokenBatch& batch, const TokenPartition& p) {
    const Index d = batch.dim();
    Matrix scores(static_cast<Index>(p.a.size()), static_cast<Index>(p.b.size()));
    for (std::size_t i = 0; i < p.a.size(); ++i) {
        const double* ta = batch.tokens.row(p.a[i]);
        for (std::size_t j = 0; j < p.b.size(); ++j) {
            const double* tb = batch.tokens.row(p.b[j]);
            double dot = 0.0;
            for (Index k = 0; k < d; ++k) dot += ta[k] * tb[k];
            scores(static_cast<Index>(i), static_cast<Index>(j)) = dot;
        }
    }
    return scores;
}

MergePlan bipartite_match(const Matrix& scores, const TokenPartition& p, Index m) {
    const Index na = static_cast<Index>(p.a.size());
    const Index nb = static_cast<Index>(p.b.size());
    detail::check(scores.rows() == na && scores.cols() == nb,
                  "bipartite_match: score matrix shape mismatch");
    if (m < 0 || m > na) throw std::invalid_argument("bipartite_match: m outside [0, |A|]");

    MergePlan plan;
    if (m == 0) return plan;

    // Best proposal per A token, then the top m by score with lower A index
    // winning ties.
    struct Proposal {
        Index a_pos;
        Index b_pos;
        double score;
    };
    std::vector<Proposal> proposals;
    proposals.reserve(static_cast<std::size_t>(na));
    for (Index i = 0; i < na; ++i) {
        Index best = 0;
        double best_score = scores(i, 0);
        for (Index j = 1; j < nb; ++j) {
            if (scores(i, j) > best_score) {
                best_score = scores(i, j);
                best = j;
            }
        }
        proposals.push_back({i, best, best_score});
    }
    std::stable_sort(proposals.begin(), proposals.end(), [](const Proposal& x, const Proposal& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.a_pos < y.a_pos;
    });
    proposals.resize(static_cast<std::size_t>(m));
    // Keep plan edges in A order so the output is independent of sort details.
    std::sort(proposals.begin(), proposals.end(),
              [](const Proposal& x, const Proposal& y) { return x.a_pos < y.a_pos; });
    for (const auto& pr : proposals) {
        plan.edges.push_back({p.a[static_cast<std::size_t>(pr.a_pos)],
                              p.b[static_cast<std::size_t>(pr.b_pos)]});
    }
    return plan;
}

TokenBatch merge_tokens(const TokenBatch& batch, const MergePlan& plan) {
    const Index n = batch.count();
    const Index d = batch.dim();

    // Accumulate size-weighted sums per destination, then renormalize.
    std::vector<std::uint8_t> removed(static_cast<std::size_t>(n), 0);
    Matrix weighted(n, d);
    std::vector<std::int64_t> new_sizes = batch.sizes;
    for (Index t = 0; t < n; ++t) {
        const double s = static_cast<double>(batch.sizes[static_cast<std::size_t>(t)]);
        const double* src = batch.tokens.row(t);
        double* dst = weighted.row(t);
        for (Index k = 0; k < d; ++k) dst[k] = s * src[k];
    }
    for (const auto& e : plan.edges) {
        detail::check(e.source >= 0 && e.source < n && e.destination >= 0 && e.destination < n,
                      "merge_tokens: edge index out of range");
        detail::check(!removed[static_cast<std::size_t>(e.source)],
                      "merge_tokens: duplicate source in plan");
        removed[static_cast<std::size_t>(e.source)] = 1;
        const double* src = weighted.row(e.source);
        double* dst = weighted.row(e.destination);
        for (Index k = 0; k < d; ++k) dst[k] += src[k];
        new_sizes[static_cast<std::size_t>(e.destination)] +=
            batch.sizes[static_cast<std::size_t>(e.source)];
    }

    TokenBatch out;
    const Index survivors = n - plan.merge_count();
    out.tokens = Matrix(survivors, d);
    out.sizes.reserve(static_cast<std::size_t>(survivors));
    out.protected_flags.reserve(static_cast<std::size_t>(survivors));
    Index row = 0;
    for (Index t = 0; t < n; ++t) {
        if (removed[static_cast<std::size_t>(t)]) continue;
        const std::int64_t sz = new_sizes[static_cast<std::size_t>(t)];
        double* dst = out.tokens.row(row);
        if (sz == batch.sizes[static_cast<std::size_t>(t)]) {
            // Untouched row: copy bits verbatim so a zero-merge pass is
            // byte-identical.
            const double* src = batch.tokens.row(t);
            for (Index k = 0; k < d; ++k) dst[k] = src[k];
        } else {
            const double* src = weighted.row(t);
            const double inv = 1.0 / static_cast<double>(sz);
            for (Index k = 0; k < d; ++k) dst[k] = src[k] * inv;
        }
        out.sizes.push_back(sz);
        out.protected_flags.push_back(batch.protected_flags[static_cast<std::size_t>(t)]);
        ++row;
    }
    return out;
}

TokenBatch single_pass_merge(const TokenBatch& batch, double ratio) {
    if (ratio < 0.0 || ratio >= 1.0) {
        throw std::invalid_argument("single_pass_merge: ratio outside [0, 1)");
    }
    if (ratio == 0.0) return batch;
    TokenPartition p = partition_tokens(batch);
    Index m = static_cast<Index>(ratio * static_cast<double>(batch.unprotected_count()));
    m = std::min(m, static_cast<Index>(p.a.size()));
    if (m == 0) return batch;
    const Matrix scores = similarity_scores(batch, p);
    const MergePlan plan = bipartite_match(scores, p, m);
    return merge_tokens(batch, plan);
}

Matrix merge_tokens_backward(const TokenBatch& input, const MergePlan& plan,
                             const Matrix& grad_output) {
    const Index n = input.count();
    const Index d = input.dim();
    detail::check(grad_output.cols() == d && grad_output.rows() == n - plan.merge_count(),
                  "merge_tokens_backward: gradient shape mismatch");

    std::vector<std::uint8_t> removed(static_cast<std::size_t>(n), 0);
    std::vector<std::int64_t> merged_sizes = input.sizes;
    std::vector<Index> dest_of(static_cast<std::size_t>(n), -1);
    for (const auto& e : plan.edges) {
        removed[static_cast<std::size_t>(e.source)] = 1;
        merged_sizes[static_cast<std::size_t>(e.destination)] +=
            input.sizes[static_cast<std::size_t>(e.source)];
        dest_of[static_cast<std::size_t>(e.source)] = e.destination;
    }
    // Sources may chain only one level (a destination is never a source), so
    // merged_sizes is final after a single pass.

    std::vector<Index> out_row(static_cast<std::size_t>(n), -1);
    Index row = 0;
    for (Index t = 0; t < n; ++t) {
        if (!removed[static_cast<std::size_t>(t)]) out_row[static_cast<std::size_t>(t)] = row++;
    }

    Matrix grad_in(n, d);
    for (Index t = 0; t < n; ++t) {
        const Index target = removed[static_cast<std::size_t>(t)] ? dest_of[static_cast<std::size_t>(t)] : t;
        const Index orow = out_row[static_cast<std::size_t>(target)];
        const double* gout = grad_output.row(orow);
        double* gin = grad_in.row(t);
        if (target == t && merged_sizes[static_cast<std::size_t>(t)] == input.sizes[static_cast<std::size_t>(t)]) {
            for (Index k = 0; k < d; ++k) gin[k] = gout[k];
        } else {
            const double w = static_cast<double>(input.sizes[static_cast<std::size_t>(t)]) /
                             static_cast<double>(merged_sizes[static_cast<std::size_t>(target)]);
            for (Index k = 0; k < d; ++k) gin[k] = w * gout[k];
        }
    }
    return grad_in;
}

}  // namespace sparselab

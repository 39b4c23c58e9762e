#pragma once

#include "prep/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace prep {

namespace detail {

/// Mean ranks (1-based) under the mean-rank tie policy, ranking by
/// descending score: rank 1 is the most relevant position.
inline std::vector<double> mean_ranks_desc(const std::vector<double>& scores) {
    const size_t n = scores.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return scores[a] > scores[b];
    });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]])
            ++j;
        const double mean_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (size_t k = i; k <= j; ++k)
            ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

} // namespace detail

/// Rank-based (Mann-Whitney) ROC-AUC; ties contribute 1/2. Scores must be
/// oriented so higher means more relevant.
inline double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw ValidationError("roc_auc: score/label size mismatch");
    size_t npos = 0, nneg = 0;
    for (int l : labels)
        (l ? npos : nneg)++;
    if (npos == 0 || nneg == 0)
        throw ValidationError("roc_auc: need at least one positive and one negative");
    const std::vector<double> ranks = detail::mean_ranks_desc(scores);
    // With rank 1 = best, AUC = 1 - (R_pos - npos(npos+1)/2) / (npos*nneg)
    // where R_pos sums the positives' ascending-badness ranks.
    double rank_sum = 0.0;
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i])
            rank_sum += ranks[i];
    const double np = static_cast<double>(npos), nn = static_cast<double>(nneg);
    return 1.0 - (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

/// Area under the precision-recall curve by step-wise integration over the
/// distinct thresholds of a descending-score sweep; a tie block moves the
/// threshold once.
inline double auprc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw ValidationError("auprc: score/label size mismatch");
    size_t npos = 0;
    for (int l : labels)
        npos += l ? 1 : 0;
    if (npos == 0)
        throw ValidationError("auprc: need at least one positive");

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return scores[a] > scores[b];
    });
    double area = 0.0, prev_recall = 0.0;
    size_t tp = 0, seen = 0;
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]])
            ++j;
        for (size_t k = i; k <= j; ++k) {
            ++seen;
            tp += labels[order[k]] ? 1 : 0;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(npos);
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j + 1;
    }
    return area;
}

/// Mean rank (1-based, mean-rank ties) of the unique relevant item; the
/// reciprocal is the sub-task's MRR contribution.
inline double reciprocal_rank(const std::vector<double>& scores,
                              const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw ValidationError("reciprocal_rank: score/label size mismatch");
    int positives = 0;
    size_t pos_index = 0;
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i]) {
            ++positives;
            pos_index = i;
        }
    if (positives != 1)
        throw ValidationError("reciprocal_rank: sub-task must have exactly one relevant "
                              "pair (use the AUC metrics otherwise)");
    const std::vector<double> ranks = detail::mean_ranks_desc(scores);
    return 1.0 / ranks[pos_index];
}

enum class AverageScheme { Uniform, ByRelevant, ByTotal };

inline const char* scheme_name(AverageScheme s) {
    switch (s) {
    case AverageScheme::Uniform: return "uni";
    case AverageScheme::ByRelevant: return "rel";
    case AverageScheme::ByTotal: return "tot";
    }
    return "?";
}

inline std::optional<AverageScheme> parse_scheme(const std::string& s) {
    if (s == "uni") return AverageScheme::Uniform;
    if (s == "rel") return AverageScheme::ByRelevant;
    if (s == "tot") return AverageScheme::ByTotal;
    return std::nullopt;
}

/// uni: unweighted mean; rel: weighted by relevant counts; tot: by totals.
inline double aggregate(const std::vector<double>& values,
                        const std::vector<double>& relevant_counts,
                        const std::vector<double>& total_counts, AverageScheme scheme) {
    if (values.empty())
        throw ValidationError("aggregate: need at least one sub-task");
    if (values.size() != relevant_counts.size() || values.size() != total_counts.size())
        throw ValidationError("aggregate: size mismatch");
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        const double w = scheme == AverageScheme::Uniform ? 1.0
                         : scheme == AverageScheme::ByRelevant ? relevant_counts[i]
                                                               : total_counts[i];
        num += w * values[i];
        den += w;
    }
    if (den <= 0.0)
        throw ValidationError("aggregate: weights sum to zero");
    return num / den;
}

} // namespace prep

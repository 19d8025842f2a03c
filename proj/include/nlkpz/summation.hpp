#pragma once

#include <cstddef>
#include <span>

namespace nlkpz {

/// Pairwise (tree) summation with a fixed split, so the result depends only
/// on the order of the input and never on thread count.
double pairwise_sum(std::span<const double> values);

namespace detail {
inline constexpr std::size_t kPairwiseBlock = 16;
}

/// Pairwise sum of f(items[i]).
template <class T, class F>
double pairwise_sum(std::span<const T> items, F&& f) {
    if (items.size() <= detail::kPairwiseBlock) {
        double s = 0.0;
        for (const T& v : items) s += f(v);
        return s;
    }
    const std::size_t half = items.size() / 2;
    return pairwise_sum(items.first(half), f) + pairwise_sum(items.subspan(half), f);
}

}  // namespace nlkpz

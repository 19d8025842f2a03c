#include "nlkpz/summation.hpp"

namespace nlkpz {

double pairwise_sum(std::span<const double> values) {
    return pairwise_sum(values, [](double v) { return v; });
}

}  // namespace nlkpz

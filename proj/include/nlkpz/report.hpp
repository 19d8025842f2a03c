#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace nlkpz {

/// One sampled property: how many samples were checked, how many violated
/// the claim, and the extreme observed values of the checked quantity.
struct PropertyCheck {
    std::string name;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double min_observed = 0.0;
    double max_observed = 0.0;
    std::string detail;

    bool pass() const noexcept { return violations == 0 && samples > 0; }
};

struct PropertyReport {
    std::string name;
    std::vector<PropertyCheck> checks;

    bool pass() const noexcept;
    std::size_t violations() const noexcept;
    void append(const PropertyReport& other);
};

void write_csv(std::ostream& os, const PropertyReport& r);

}  // namespace nlkpz

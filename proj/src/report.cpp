#include "nlkpz/report.hpp"

#include <ostream>

namespace nlkpz {

bool PropertyReport::pass() const noexcept {
    if (checks.empty()) return false;
    for (const auto& c : checks)
        if (!c.pass()) return false;
    return true;
}

std::size_t PropertyReport::violations() const noexcept {
    std::size_t v = 0;
    for (const auto& c : checks) v += c.violations;
    return v;
}

void PropertyReport::append(const PropertyReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

void write_csv(std::ostream& os, const PropertyReport& r) {
    const auto prec = os.precision(17);
    os << "check,samples,violations,min,max,pass,detail\n";
    for (const auto& c : r.checks) {
        os << c.name << ',' << c.samples << ',' << c.violations << ',' << c.min_observed << ','
           << c.max_observed << ',' << (c.pass() ? "pass" : "fail") << ',' << c.detail << '\n';
    }
    os.precision(prec);
}

}  // namespace nlkpz

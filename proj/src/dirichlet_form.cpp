#include "nlkpz/dirichlet_form.hpp"

#include <unordered_map>

#include "nlkpz/error.hpp"

namespace nlkpz {

DirichletForm assemble_dirichlet_form(const Grid& grid, const DiscreteKernel& dk) {
    if (dk.dim != grid.dim()) throw ConfigError("kernel and grid dimensions differ");
    if (dk.reach > grid.collar_layers()) throw ConfigError("collar is narrower than the kernel reach");
    DirichletForm form;
    form.mass = dk.mass;
    const auto interior = grid.interior();
    form.nodes.assign(interior.begin(), interior.end());

    std::vector<long> row_of(grid.size(), -1);
    for (std::size_t r = 0; r < interior.size(); ++r) row_of[interior[r]] = static_cast<long>(r);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(interior.size() * (dk.size() + 1));
    for (std::size_t r = 0; r < interior.size(); ++r) {
        trip.emplace_back(r, r, dk.mass);
        const auto x = static_cast<std::ptrdiff_t>(interior[r]);
        for (std::size_t j = 0; j < dk.size(); ++j) {
            const long c = row_of[static_cast<std::size_t>(x + grid.flat_offset(dk.offsets[j]))];
            if (c >= 0) trip.emplace_back(r, c, -dk.weights[j]);
        }
    }
    const auto n = static_cast<Eigen::Index>(interior.size());
    form.matrix.resize(n, n);
    form.matrix.setFromTriplets(trip.begin(), trip.end());
    form.matrix.makeCompressed();
    return form;
}

}  // namespace nlkpz

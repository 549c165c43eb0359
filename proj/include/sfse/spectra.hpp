#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sfse/types.hpp"

namespace sfse {

// Exact spectrum of a dense matrix. Columns of `right` are unit-norm right
// eigenvectors; rows of `left` (when present) are the matching left
// eigenvectors with left * right == identity. `order` lists eigenvalue
// indices by ascending real part, ties by ascending imaginary part.
struct EigenSolution {
    Vector eigenvalues;
    Matrix right;
    std::optional<Matrix> left;
    std::vector<Index> order;
    // 2-norm condition number of `right`; only computed by eig_full.
    std::optional<double> condition;

    Index size() const noexcept { return eigenvalues.size(); }
    cplx sorted_value(Index n) const { return eigenvalues(order[static_cast<std::size_t>(n)]); }
    auto sorted_right(Index n) const { return right.col(order[static_cast<std::size_t>(n)]); }
    std::vector<cplx> sorted_values() const;
};

// Right and left eigenvectors from a single diagonalization; throws
// NumericalError when cond(right) > 1e12 ("near-defective spectrum").
EigenSolution eig_full(const Matrix& H);

// Right eigenvectors only. No conditioning guard: the right vectors of
// strongly non-normal matrices (open chains) stay usable for position
// observables even when a left basis cannot be formed reliably.
EigenSolution eig_right(const Matrix& H);

// Index permutation by (Re, Im) ascending; rejects NaN.
std::vector<Index> real_part_order(std::span<const cplx> values);

struct Pairing {
    // prediction_of[i] is the predicted value paired with exact value i.
    std::vector<Index> prediction_of;
    std::vector<double> residual;
    double max_residual = 0.0;
    double total_residual = 0.0;
};

// Greedy nearest-pair bijection: all |exact - predicted| distances are
// visited in ascending order and a pair is accepted when both ends are
// still free. Throws DomainError on length mismatch.
Pairing match_predictions(std::span<const cplx> exact, std::span<const cplx> predicted);
Pairing match_predictions(const EigenSolution& exact, std::span<const cplx> predicted);

}  // namespace sfse

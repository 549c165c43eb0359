#include "sfse/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "sfse/error.hpp"

namespace sfse {

namespace {

constexpr double kMaxCondition = 1e12;

EigenSolution diagonalize(const Matrix& H) {
    if (H.rows() < 1 || H.rows() != H.cols())
        throw DomainError("eigensolver: matrix must be square and nonempty");
    if (!H.allFinite()) throw DomainError("eigensolver: matrix has non-finite entries");

    Eigen::ComplexEigenSolver<Matrix> solver(H, true);
    if (solver.info() != Eigen::Success)
        throw NumericalError(NumericalFailure::no_convergence,
                             "eigensolver: QR iteration did not converge");

    EigenSolution solution;
    solution.eigenvalues = solver.eigenvalues();
    solution.right = solver.eigenvectors();
    for (Index j = 0; j < solution.right.cols(); ++j) solution.right.col(j).normalize();
    const std::vector<cplx> values(solution.eigenvalues.data(),
                                   solution.eigenvalues.data() + solution.eigenvalues.size());
    solution.order = real_part_order(values);
    return solution;
}

}  // namespace

std::vector<cplx> EigenSolution::sorted_values() const {
    std::vector<cplx> out;
    out.reserve(order.size());
    for (Index i : order) out.push_back(eigenvalues(i));
    return out;
}

std::vector<Index> real_part_order(std::span<const cplx> values) {
    for (const cplx& v : values)
        if (std::isnan(v.real()) || std::isnan(v.imag()))
            throw DomainError("cannot order eigenvalues containing NaN");
    std::vector<Index> order(values.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        const cplx& x = values[static_cast<std::size_t>(a)];
        const cplx& y = values[static_cast<std::size_t>(b)];
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return order;
}

EigenSolution eig_full(const Matrix& H) {
    EigenSolution solution = diagonalize(H);
    const Eigen::BDCSVD<Matrix> svd(solution.right);
    const auto& sigma = svd.singularValues();
    const double condition = sigma(0) / sigma(sigma.size() - 1);
    solution.condition = condition;
    if (!(condition <= kMaxCondition)) {
        std::ostringstream os;
        os << "near-defective spectrum: eigenvector condition number " << condition
           << " exceeds " << kMaxCondition << " (dimension " << H.rows() << ")";
        throw NumericalError(NumericalFailure::near_defective, os.str());
    }
    solution.left = solution.right.partialPivLu().inverse();
    return solution;
}

EigenSolution eig_right(const Matrix& H) { return diagonalize(H); }

Pairing match_predictions(std::span<const cplx> exact, std::span<const cplx> predicted) {
    if (exact.size() != predicted.size())
        throw DomainError("match_predictions: " + std::to_string(exact.size()) +
                          " exact values vs " + std::to_string(predicted.size()) + " predictions");
    for (auto values : {exact, predicted})
        for (const cplx& v : values)
            if (std::isnan(v.real()) || std::isnan(v.imag()))
                throw DomainError("match_predictions: NaN value");
    const std::size_t n = exact.size();

    std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
    candidates.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            candidates.emplace_back(std::abs(exact[i] - predicted[j]), i, j);
    std::sort(candidates.begin(), candidates.end());

    Pairing pairing;
    pairing.prediction_of.assign(n, -1);
    pairing.residual.assign(n, 0.0);
    std::vector<bool> taken(n, false);
    std::size_t paired = 0;
    for (const auto& [distance, i, j] : candidates) {
        if (paired == n) break;
        if (pairing.prediction_of[i] >= 0 || taken[j]) continue;
        pairing.prediction_of[i] = static_cast<Index>(j);
        pairing.residual[i] = distance;
        taken[j] = true;
        ++paired;
        pairing.max_residual = std::max(pairing.max_residual, distance);
        pairing.total_residual += distance;
    }
    return pairing;
}

Pairing match_predictions(const EigenSolution& exact, std::span<const cplx> predicted) {
    const std::vector<cplx> values(exact.eigenvalues.data(),
                                   exact.eigenvalues.data() + exact.eigenvalues.size());
    return match_predictions(values, predicted);
}

}  // namespace sfse

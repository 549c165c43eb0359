#include "sfse/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "sfse/error.hpp"

namespace sfse {

const char* to_string(NumericalFailure failure) {
    switch (failure) {
        case NumericalFailure::near_defective: return "near-defective";
        case NumericalFailure::degenerate_crossing: return "degenerate band crossing";
        case NumericalFailure::band_extremum: return "band extremum";
        case NumericalFailure::singular_parameter: return "singular parameter";
        case NumericalFailure::no_convergence: return "no convergence";
    }
    return "unknown";
}

namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kDegeneracyTolerance = 1e-9;

}  // namespace

HoppingSet::HoppingSet(Matrix h0, Matrix h1, Matrix hm1)
    : h0_(std::move(h0)), h1_(std::move(h1)), hm1_(std::move(hm1)) {
    const auto w = h0_.rows();
    if (w < 1) throw DomainError("hopping blocks must have at least one orbital");
    for (const Matrix* block : {&h0_, &h1_, &hm1_}) {
        if (block->rows() != w || block->cols() != w)
            throw DomainError("hopping blocks h0, h1, hm1 must be square with identical size");
        if (!block->allFinite()) throw DomainError("hopping blocks must be finite");
    }
}

HoppingSet HoppingSet::hatano_nelson(cplx t_r, cplx t_l, cplx onsite) {
    return HoppingSet(Matrix::Constant(1, 1, onsite), Matrix::Constant(1, 1, t_r),
                      Matrix::Constant(1, 1, t_l));
}

bool HoppingSet::connected() const noexcept {
    return h1_.cwiseAbs().maxCoeff() > 0.0 || hm1_.cwiseAbs().maxCoeff() > 0.0;
}

Momentum Momentum::of(int m, int L) {
    if (L < 1 || m < 1 || m > L) throw DomainError("momentum index must satisfy 1 <= m <= L");
    Momentum p;
    p.m = m;
    p.L = L;
    p.k = 2.0 * std::numbers::pi * m / L;
    p.beta = std::polar(1.0, p.k);
    return p;
}

Matrix bloch_hamiltonian(const HoppingSet& h, cplx beta) {
    if (beta == cplx(0.0)) throw DomainError("bloch_hamiltonian: beta must be nonzero");
    return h.h0() + h.h1() / beta + h.hm1() * beta;
}

Matrix bloch_hamiltonian_derivative(const HoppingSet& h, cplx beta) {
    if (beta == cplx(0.0)) throw DomainError("bloch_hamiltonian_derivative: beta must be nonzero");
    return -h.h1() / (beta * beta) + h.hm1();
}

std::vector<Momentum> bz_momenta(int L) {
    if (L < 2) throw DomainError("bz_momenta: L must be at least 2");
    std::vector<Momentum> momenta;
    momenta.reserve(static_cast<std::size_t>(L));
    for (int m = 1; m <= L; ++m) momenta.push_back(Momentum::of(m, L));
    return momenta;
}

std::vector<BandState> band_eigensystem(const HoppingSet& h, const Momentum& momentum) {
    const Matrix H = bloch_hamiltonian(h, momentum.beta);
    const auto w = H.rows();

    Eigen::ComplexEigenSolver<Matrix> solver(H, true);
    if (solver.info() != Eigen::Success)
        throw NumericalError(NumericalFailure::no_convergence,
                             "band_eigensystem: eigenvalue iteration did not converge");
    const Vector& values = solver.eigenvalues();
    const Matrix& vectors = solver.eigenvectors();

    const Eigen::JacobiSVD<Matrix> svd(vectors);
    const auto& sigma = svd.singularValues();
    const double condition = sigma(0) / sigma(w - 1);
    if (!(condition <= kMaxCondition)) {
        std::ostringstream os;
        os << "near-defective Bloch Hamiltonian at k = " << momentum.k
           << " (eigenvector condition number " << condition << ")";
        throw NumericalError(NumericalFailure::near_defective, os.str());
    }

    const double scale = H.norm();
    for (Index p = 0; p < w; ++p) {
        for (Index q = p + 1; q < w; ++q) {
            if (std::abs(values(p) - values(q)) <= kDegeneracyTolerance * scale) {
                std::ostringstream os;
                os << "degenerate band crossing at k = " << momentum.k << " (E = " << values(p)
                   << ")";
                throw NumericalError(NumericalFailure::degenerate_crossing, os.str());
            }
        }
    }

    const Matrix inverse = vectors.inverse();

    std::vector<Index> order(static_cast<std::size_t>(w));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (values(a).real() != values(b).real()) return values(a).real() < values(b).real();
        return values(a).imag() < values(b).imag();
    });

    std::vector<BandState> states;
    states.reserve(static_cast<std::size_t>(w));
    for (Index i = 0; i < w; ++i) {
        const Index col = order[static_cast<std::size_t>(i)];
        BandState state;
        state.band = static_cast<int>(i);
        state.momentum = momentum;
        state.energy = values(col);
        state.right = vectors.col(col);
        // Row `col` of V^{-1} is phiL^dagger.
        state.left = inverse.row(col).adjoint();
        states.push_back(std::move(state));
    }
    return states;
}

cplx band_derivative(const BandState& state, const HoppingSet& h) {
    const Matrix dH = bloch_hamiltonian_derivative(h, state.momentum.beta);
    return state.left.dot(dH * state.right);
}

BandStructure band_structure(const HoppingSet& h, int L) {
    BandStructure bands;
    bands.L = L;
    bands.orbitals = h.orbitals();
    for (const Momentum& momentum : bz_momenta(L))
        bands.by_momentum.push_back(band_eigensystem(h, momentum));
    return bands;
}

}  // namespace sfse

#pragma once

#include <vector>

#include "sfse/types.hpp"

namespace sfse {

// Nearest-neighbour lattice with w orbitals per cell. The non-Bloch
// Hamiltonian is H(beta) = h0 + h1 / beta + hm1 * beta, so h1 hops an
// amplitude from cell n to cell n + 1 and hm1 from n + 1 to n.
class HoppingSet {
  public:
    HoppingSet(Matrix h0, Matrix h1, Matrix hm1);

    // Single-band Hatano-Nelson chain: E(beta) = t_r / beta + t_l * beta.
    static HoppingSet hatano_nelson(cplx t_r, cplx t_l, cplx onsite = 0.0);

    int orbitals() const noexcept { return static_cast<int>(h0_.rows()); }
    const Matrix& h0() const noexcept { return h0_; }
    const Matrix& h1() const noexcept { return h1_; }
    const Matrix& hm1() const noexcept { return hm1_; }

    // False when both inter-cell blocks vanish; every band is then flat and
    // the perturbative decay factor is undefined.
    bool connected() const noexcept;

  private:
    Matrix h0_, h1_, hm1_;
};

// Point k = 2 pi m / L of the Brillouin zone of an L-cell ring.
struct Momentum {
    int m = 0;
    int L = 0;
    double k = 0.0;
    cplx beta{1.0, 0.0};

    static Momentum of(int m, int L);
};

// One eigenpair of H(beta_k), with left.adjoint() * right == 1.
struct BandState {
    int band = 0;  // 0-based, bands at fixed k ordered by (Re E, Im E)
    Momentum momentum;
    cplx energy;
    Vector right;
    Vector left;
};

Matrix bloch_hamiltonian(const HoppingSet& h, cplx beta);

// dH/dbeta = -h1 / beta^2 + hm1.
Matrix bloch_hamiltonian_derivative(const HoppingSet& h, cplx beta);

// Momenta m = 1..L. Throws DomainError for L < 2.
std::vector<Momentum> bz_momenta(int L);

// Eigenpairs of H(beta_k). Left vectors are the rows of the inverse right
// eigenvector matrix. Throws NumericalError for near-defective matrices
// (condition number > 1e12) and for eigenvalues closer than 1e-9 ||H||.
std::vector<BandState> band_eigensystem(const HoppingSet& h, const Momentum& momentum);

// dE_p/dbeta at beta_k via the bi-orthogonal Hellmann-Feynman identity.
cplx band_derivative(const BandState& state, const HoppingSet& h);

// All bands over the Brillouin zone of an L-cell ring, indexed [m - 1][band].
struct BandStructure {
    int L = 0;
    int orbitals = 0;
    std::vector<std::vector<BandState>> by_momentum;
};

BandStructure band_structure(const HoppingSet& h, int L);

}  // namespace sfse

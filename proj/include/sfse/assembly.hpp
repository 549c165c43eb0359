#pragma once

#include <variant>
#include <vector>

#include <Eigen/SparseCore>

#include "sfse/lattice.hpp"

namespace sfse {

using SparseMatrix = Eigen::SparseMatrix<cplx>;

// Cell references are size-independent: r >= 1 counts from the left end
// (1 is the first cell), r <= 0 counts from the right end (0 is cell L,
// -1 is cell L - 1).
int resolve_cell(int ref, int L);

// Term psi_r^dagger * block * psi_s.
struct ImpurityEntry {
    int row_cell = 1;
    int col_cell = 1;
    Matrix block;
};

struct ImpuritySpec {
    std::vector<ImpurityEntry> entries;
    int boundary_depth = 1;
};

// mu_r * h1 on the (1, L) block and mu_l * hm1 on the (L, 1) block; for the
// Hatano-Nelson chain this is mu_r t_r c1^dag cL + mu_l t_l cL^dag c1.
struct BoundaryCoupling {
    double mu_r = 0.0;
    double mu_l = 0.0;
};

// V on every orbital of cell 1 (V c1^dag c1 for a single band).
struct Onsite {
    double V = 0.0;
};

using NamedImpurity = std::variant<BoundaryCoupling, Onsite>;

ImpuritySpec expand(const NamedImpurity& impurity, const HoppingSet& h);

// Basis index of (cell n in 1..L, orbital q in 0..w-1) is (n - 1) * w + q.
Index basis_index(int cell, int orbital, int orbitals);

// Entry with cell references resolved against an L-cell ring.
struct ResolvedEntry {
    int row_cell = 1;
    int col_cell = 1;
    const Matrix* block = nullptr;
};

// Resolves and validates every entry (shape, range, boundary locality).
// Throws DomainError ("impurity not at boundary") on violation.
std::vector<ResolvedEntry> resolve_entries(const ImpuritySpec& spec, int orbitals, int L);

Matrix assemble_pbc(const HoppingSet& h, int L);
Matrix assemble_obc(const HoppingSet& h, int L);

SparseMatrix assemble_impurity(const ImpuritySpec& spec, const HoppingSet& h, int L);
SparseMatrix assemble_impurity(const NamedImpurity& impurity, const HoppingSet& h, int L);

Matrix assemble_gbc(const HoppingSet& h, int L, const ImpuritySpec& spec);
Matrix assemble_gbc(const HoppingSet& h, int L, const NamedImpurity& impurity);

}  // namespace sfse

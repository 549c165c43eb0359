#include "sfse/assembly.hpp"

#include <string>

#include "sfse/error.hpp"

namespace sfse {

namespace {

void require_ring(int L) {
    if (L < 3) throw DomainError("assembly: L must be at least 3, got " + std::to_string(L));
}

void add_block(Matrix& H, int row_cell, int col_cell, const Matrix& block) {
    const int w = static_cast<int>(block.rows());
    H.block(basis_index(row_cell, 0, w), basis_index(col_cell, 0, w), w, w) += block;
}

bool at_boundary(int cell, int L, int depth) { return cell <= depth || cell > L - depth; }

}  // namespace

int resolve_cell(int ref, int L) {
    const int cell = ref >= 1 ? ref : L + ref;
    if (cell < 1 || cell > L)
        throw DomainError("cell reference " + std::to_string(ref) + " lies outside 1.." +
                          std::to_string(L));
    return cell;
}

Index basis_index(int cell, int orbital, int orbitals) {
    return static_cast<Index>(cell - 1) * orbitals + orbital;
}

ImpuritySpec expand(const NamedImpurity& impurity, const HoppingSet& h) {
    ImpuritySpec spec;
    if (const auto* coupling = std::get_if<BoundaryCoupling>(&impurity)) {
        spec.entries.push_back({1, 0, coupling->mu_r * h.h1()});
        spec.entries.push_back({0, 1, coupling->mu_l * h.hm1()});
    } else {
        const auto& onsite = std::get<Onsite>(impurity);
        const int w = h.orbitals();
        spec.entries.push_back({1, 1, onsite.V * Matrix::Identity(w, w)});
    }
    return spec;
}

Matrix assemble_obc(const HoppingSet& h, int L) {
    require_ring(L);
    const int w = h.orbitals();
    Matrix H = Matrix::Zero(static_cast<Index>(w) * L, static_cast<Index>(w) * L);
    for (int n = 1; n <= L; ++n) add_block(H, n, n, h.h0());
    for (int n = 1; n < L; ++n) {
        add_block(H, n + 1, n, h.h1());
        add_block(H, n, n + 1, h.hm1());
    }
    return H;
}

Matrix assemble_pbc(const HoppingSet& h, int L) {
    Matrix H = assemble_obc(h, L);
    add_block(H, 1, L, h.h1());
    add_block(H, L, 1, h.hm1());
    return H;
}

std::vector<ResolvedEntry> resolve_entries(const ImpuritySpec& spec, int orbitals, int L) {
    if (spec.boundary_depth < 1) throw DomainError("impurity boundary_depth must be positive");
    std::vector<ResolvedEntry> resolved;
    resolved.reserve(spec.entries.size());
    for (const auto& entry : spec.entries) {
        if (entry.block.rows() != orbitals || entry.block.cols() != orbitals)
            throw DomainError("impurity block must be " + std::to_string(orbitals) + "x" +
                              std::to_string(orbitals));
        const int r = resolve_cell(entry.row_cell, L);
        const int s = resolve_cell(entry.col_cell, L);
        if (!at_boundary(r, L, spec.boundary_depth) || !at_boundary(s, L, spec.boundary_depth))
            throw DomainError("impurity not at boundary: entry (" + std::to_string(r) + ", " +
                              std::to_string(s) + ") for L = " + std::to_string(L) +
                              ", boundary depth " + std::to_string(spec.boundary_depth));
        resolved.push_back({r, s, &entry.block});
    }
    return resolved;
}

SparseMatrix assemble_impurity(const ImpuritySpec& spec, const HoppingSet& h, int L) {
    require_ring(L);
    const int w = h.orbitals();
    std::vector<Eigen::Triplet<cplx>> triplets;
    for (const auto& entry : resolve_entries(spec, w, L)) {
        for (int a = 0; a < w; ++a)
            for (int b = 0; b < w; ++b)
                if ((*entry.block)(a, b) != cplx(0.0))
                    triplets.emplace_back(basis_index(entry.row_cell, a, w),
                                          basis_index(entry.col_cell, b, w), (*entry.block)(a, b));
    }
    const Index dim = static_cast<Index>(w) * L;
    SparseMatrix imp(dim, dim);
    imp.setFromTriplets(triplets.begin(), triplets.end());
    imp.prune(cplx(0.0));
    return imp;
}

SparseMatrix assemble_impurity(const NamedImpurity& impurity, const HoppingSet& h, int L) {
    return assemble_impurity(expand(impurity, h), h, L);
}

Matrix assemble_gbc(const HoppingSet& h, int L, const ImpuritySpec& spec) {
    Matrix H = assemble_pbc(h, L);
    if (!spec.entries.empty()) H += Matrix(assemble_impurity(spec, h, L));
    return H;
}

Matrix assemble_gbc(const HoppingSet& h, int L, const NamedImpurity& impurity) {
    return assemble_gbc(h, L, expand(impurity, h));
}

}  // namespace sfse

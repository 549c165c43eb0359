#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "sfse/assembly.hpp"
#include "sfse/lattice.hpp"

namespace sfse {

// Parsed model-definition document:
//
//   {
//     "w": 1,
//     "h0":  [[0, 0]],            // row-major w*w list of [re, im]
//     "h1":  [[2, 0]],            // multiplies 1/beta (hop n -> n+1)
//     "hm1": [[1, 0]],            // multiplies beta   (hop n+1 -> n)
//     "impurity": {"kind": "boundary-coupling", "mu_r": 0.25, "mu_l": 0.25}
//   }
//
// Missing blocks are zero. Impurity kinds: "boundary-coupling" (mu_r,
// mu_l, or mu for both), "onsite" (V), "custom" (boundary_depth, entries:
// [{"r": 1, "s": 0, "block": [[re, im], ...]}] with r, s cell references
// as in resolve_cell). Unknown keys are rejected.
struct ModelDocument {
    HoppingSet hopping;
    std::optional<NamedImpurity> named;
    std::optional<ImpuritySpec> custom;

    ImpuritySpec impurity_spec() const;
};

ModelDocument parse_model(const std::string& json_text);
std::string model_to_json(const ModelDocument& model);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace sfse

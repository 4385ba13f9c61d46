#pragma once

#include "deflab/common.hpp"
#include "deflab/states.hpp"
#include "deflab/symspace.hpp"

#include <json.hpp>

#include <string>

namespace deflab {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// JSON layout shared by kets and operators:
//   {"d": .., "N": .., "basis_order": "lex-desc", "re": [..], "im": [..]}
// Operators store their entries row-major. Density operators add "trace_tol".

nlohmann::json to_json(const Ket& ket);
Ket ket_from_json(const nlohmann::json& j);

nlohmann::json operator_to_json(const SymSector& sector, const Matrix& op);
Matrix operator_from_json(const nlohmann::json& j, const SymSector& expected);
SymSector sector_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DensityOp& rho);
DensityOp density_from_json(const nlohmann::json& j);

/// Plain d x d matrix as {"re": [[..]], "im": [[..]]}; "im" may be omitted.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

} // namespace deflab

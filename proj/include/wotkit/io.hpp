#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "wotkit/measures.hpp"
#include "wotkit/model.hpp"
#include "wotkit/order.hpp"
#include "wotkit/sista.hpp"

namespace wotkit {

/// Builds a ProblemSpec from a JSON document. Relative file paths inside the
/// document resolve against `base_dir`. The schema is described in README.md.
ProblemSpec problem_from_json(const nlohmann::json& doc, const std::string& base_dir = ".");
ProblemSpec load_problem_json(const std::string& path);

/// Moment tensor stored as raw little-endian float64 in (i, j, k) order.
Tensor3 load_tensor_binary(const std::string& path, std::size_t rows, std::size_t cols, std::size_t depth);
/// Moment tensor stored as CSV: a header line, then rows*cols lines in
/// (i, j) row-major order, each holding `depth` values.
Tensor3 read_tensor_csv(std::istream& in, std::size_t rows, std::size_t cols, std::size_t depth);
Tensor3 load_tensor_csv(const std::string& path, std::size_t rows, std::size_t cols, std::size_t depth);

/// Dense matrix: n_x lines of n_y comma-separated values, no header.
void write_coupling_csv(std::ostream& out, const Coupling& pi);
Matrix read_matrix_csv(std::istream& in);

nlohmann::json to_json(const PrimalValue& v);
nlohmann::json to_json(const OrderReport& r);
/// Summary of a solve without the per-iteration trace.
nlohmann::json report_json(const SolveReport& rep, const ProblemSpec& spec);

}  // namespace wotkit

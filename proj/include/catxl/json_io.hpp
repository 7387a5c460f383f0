#ifndef CATXL_JSON_IO_HPP
#define CATXL_JSON_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "catxl/annealer.hpp"
#include "catxl/bnb.hpp"
#include "catxl/qbb.hpp"

namespace catxl {

using Json = nlohmann::ordered_json;

// Reads and parses a JSON file; errors name the path.
Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// Groups are written as lists of peril names, or as
// {"subgroups": [{"perils": [...], "shift": x}, ...]} when shifts are used.
PerilGrouping grouping_from_json(const Json& j, const std::vector<std::string>& peril_names);
Json to_json(const PerilGrouping& g, const std::vector<std::string>& peril_names);

// {"grouping": [...], "layers": [{"group", "attachment", "limit", "reinstatements"}]}
// A missing grouping means one group per peril. "group" is an index or a
// peril name.
Contract contract_from_json(const Json& j, const std::vector<std::string>& peril_names);
Json to_json(const Contract& c, const std::vector<std::string>& peril_names);

// {"mode": "expected_value" | "curve", "rho", "rol_min", "curve": [[lol, rol], ...],
//  "peril_curves": {"name": [[lol, rol], ...]}, "gross_profit"}
Pricing pricing_from_json(const Json& j);
Json to_json(const Pricing& p);

// A list, or {"constraints": [...]}; each {"kind", "beta" | "return_period",
// "peril", "threshold", "penalty_scale"}.
std::vector<ConstraintSpec> constraints_from_json(const Json& j);

// Missing keys keep the values of `defaults`.
StateSpaceBounds bounds_from_json(const Json& j, const std::vector<std::string>& peril_names,
                                  StateSpaceBounds defaults);

// {"groups": [["EQ", "WS"], ["FL"]]} -> peril to group map for compression.
GroupMap group_map_from_json(const Json& j, const std::vector<std::string>& peril_names);

Json to_json(const RiskReport& r, const std::vector<std::string>& peril_names);
Json to_json(const BnbProblem& problem, const BnbResult& r);
Json to_json(const CrossoverReport& r, const HardwareModel& model);

}  // namespace catxl

#endif  // CATXL_JSON_IO_HPP

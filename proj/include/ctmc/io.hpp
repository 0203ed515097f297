#pragma once

// JSON and CSV formats for the library types.

#include "ctmc/chain.hpp"
#include "ctmc/coarse_graining.hpp"
#include "ctmc/dynamics.hpp"
#include "ctmc/error_bounds.hpp"
#include "ctmc/functionals.hpp"
#include "ctmc/multiscale.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace ctmc::io {

using Json = nlohmann::json;

/// Reads and parses a JSON file; ParseError or IoError on failure.
[[nodiscard]] Json read_json_file(const std::filesystem::path& path);
/// Writes j.dump(2) plus a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// { "states": [...], "rates": [[...]] }
[[nodiscard]] Generator generator_from_json(const Json& j);
[[nodiscard]] Json to_json(const Generator& L);

/// { "states": [...], "mass": [...] }
[[nodiscard]] ProbabilityVector probability_from_json(const Json& j);
[[nodiscard]] Json to_json(const ProbabilityVector& p);

/// { "fine": [...], "coarse": [...], "assignment": { fine: coarse } }
[[nodiscard]] CoarseGrainingMap map_from_json(const Json& j);
[[nodiscard]] Json to_json(const CoarseGrainingMap& xi);

/// { "n": ..., "q0": [[...]], "q1": [[...]], "g01": [[...]], "g10": [[...]] } plus optional "epsilon".
[[nodiscard]] MultiscaleSpec multiscale_spec_from_json(const Json& j);
[[nodiscard]] Json to_json(const MultiscaleSpec& spec);

/// { "alpha": ..., "witness": [...], "method": ..., "samples": ... }
[[nodiscard]] Json to_json(const LsiEstimate& estimate);

/// BoundReport with the primary rhs under "rhs"; NaN entries become null.
[[nodiscard]] Json to_json(const BoundReport& report);

/// Header t,<labels...>; 17 significant digits.
[[nodiscard]] std::string trajectory_csv(const Trajectory& traj);

/// "{:.17g}"
[[nodiscard]] std::string format_double(double v);

}  // namespace ctmc::io

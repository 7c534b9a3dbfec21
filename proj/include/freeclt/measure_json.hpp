#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

#include "freeclt/measure.hpp"

namespace freeclt {

/// {"type": "atoms", "points": [[x, w], ...]}
/// {"type": "semicircle", "mean": m, "variance": v}
/// {"type": "free_poisson", "rate": r, "shift": s, "scale": c}   (scale optional)
/// {"type": "grid", "a": a, "b": b, "samples": [...]}
nlohmann::json to_json(const Measure& mu);
Measure measure_from_json(const nlohmann::json& j);

/// Parses JSON text; malformed input raises ErrorKind::Parse.
Measure parse_measure(std::string_view text);

}  // namespace freeclt

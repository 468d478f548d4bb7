#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "delaylab/experiment.hpp"

namespace delaylab {

// Environment variable consulted for the base seed when a scenario file
// does not set run.seed.
inline constexpr const char* kSeedEnvVar = "DELAYLAB_SEED";

// Parses and fully validates a scenario document. Throws ParseError for
// malformed JSON or wrong value types, ValidationError (with a field path)
// for domain violations, including rho >= 1 and regime/support mismatches.
ExperimentSpec parse_scenario(std::string_view json_text);

ExperimentSpec load_scenario(const std::filesystem::path& path);

// Distribution objects: {"kind":"uniform","lo":750,"hi":1500},
// {"kind":"exp","mean":1125}, {"kind":"det","bytes":1500},
// {"kind":"empirical","points":[[bytes, weight], ...]}.
PacketLengthDist parse_distribution(std::string_view json_text);

}  // namespace delaylab

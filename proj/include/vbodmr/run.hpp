#pragma once

#include "vbodmr/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace vbodmr {

inline constexpr std::string_view kToolName = "vbodmr";
inline constexpr std::string_view kToolVersion = "1.0.0";

// Process exit statuses of the command-line front end.
enum class ExitCode : int {
  ok = 0,
  usage = 1,          // bad command line
  config = 2,         // malformed configuration document
  input = 3,          // malformed or unreadable input table
  computation = 4,    // a model or fit rejected its input
  io = 5,             // output could not be written
  internal = 6,       // unexpected failure
  not_converged = 7,  // outputs written, but a fit did not converge
};

std::string exit_code_help();

struct Artifact {
  std::string name;  // file name inside the output directory
  std::string content;
};

struct RunOutcome {
  std::vector<Artifact> artifacts;
  bool converged = true;  // false when any fit in the run did not converge
};

// Computes every artifact of a run in memory; throws on any error.
RunOutcome execute(const RunConfig& config);

// Writes all artifacts or none: each goes to a temporary file first and is
// renamed into place only after every write succeeded. Throws IoError.
void write_artifacts(const std::filesystem::path& dir, const std::vector<Artifact>& artifacts);

// execute + write_artifacts with errors mapped to exit codes and reported
// on `err`.
ExitCode run(const RunConfig& config, std::ostream& err, bool verbose = false);

// Flat "key = value" document with a trailing newline.
std::string format_report(const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace vbodmr

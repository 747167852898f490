#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace calabi::cli {

// Process exit codes, one per error class.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kParse = 2,           // bad arguments or malformed input file
  kFile = 3,            // unreadable / unwritable file
  kInvalidSurface = 4,  // mesh fails validation
  kDomain = 5,          // out-of-range geometry input, dimension mismatch
  kNoConvergence = 6,   // Newton found no solution
  kBlowup = 7,          // some u_i reached the blow-up guard
  kLinearAlgebra = 8,   // Cholesky or eigensolver failure
  kQuadrature = 9,
  kFlowNotConverged = 10, // flow stopped on MaxTime, MaxSteps or StepFailure
};

// Runs `calabi-pack <subcommand> ...`. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace calabi::cli

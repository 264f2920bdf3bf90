#pragma once

#include <string>
#include <vector>

namespace qreset::cli {

/// Batch scenario runner. Subcommands: landscape, reset-dynamics, calibrate,
/// readout, limits, lab. Returns the process exit code: 0 success, 2 config
/// error, 3 computation/fit failure.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace qreset::cli

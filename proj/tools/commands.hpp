#pragma once

#include <CLI11.hpp>

#include "cli_support.hpp"

namespace pxp::cli {

/// Parses the command line and runs one subcommand; returns the exit code.
int run_cli(int argc, char** argv);

}  // namespace pxp::cli

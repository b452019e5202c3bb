#pragma once

namespace fairx {

// Entry point behind tools/fairx. Subcommands: run, grid, exposure,
// fixtures, validate-log. Returns the process exit status.
int cli_main(int argc, const char* const* argv);

}  // namespace fairx

#pragma once

namespace phasecell {

// Batch front end; see `phasecell --help`. Exit codes: 0 success, 1 task
// failure, 2 bad arguments.
int cli_main(int argc, char** argv);

}  // namespace phasecell

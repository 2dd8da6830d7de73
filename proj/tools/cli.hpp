#pragma once

namespace prcut {

/// Command-line entry point. Exit codes: 0 success, 1 usage or validation
/// error, 2 numerical failure (including a failed verification suite or a
/// training run that collapsed).
int cli_main(int argc, char** argv);

}  // namespace prcut

#pragma once

namespace dga {

/// Entry point behind the command-line tool. Returns the process exit code:
/// 0 on success, 2 on usage errors, 1 on runtime errors (reported as a
/// single JSON line on stderr).
int cli_main(int argc, const char* const* argv);

}  // namespace dga

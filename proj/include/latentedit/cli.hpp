#pragma once

namespace latentedit {

/// Entry point of the `latentedit` tool. Exit codes: 0 on success, 1 on a
/// runtime failure (message on stderr), 2 on a usage error.
int cli_main(int argc, const char* const* argv);

}  // namespace latentedit

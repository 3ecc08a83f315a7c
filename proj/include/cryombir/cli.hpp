#pragma once

#include <ostream>
#include <span>
#include <string>

namespace cryombir {

/// Entry point of the `cryombir` tool. `args` excludes the program name.
/// Returns 0 on success, 1 on usage errors and 2 on failures.
int cli_main(std::span<const std::string> args, std::ostream& out, std::ostream& err);

} // namespace cryombir

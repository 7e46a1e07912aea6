#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rarebasis {

// Full command driver: parses `args` (without the program name), runs the
// requested command, renders the result to `out`, and maps exceptions onto
// the documented exit codes. Diagnostics go to `err`. In-process entry
// point so tests can drive the binary's exact behavior.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rarebasis

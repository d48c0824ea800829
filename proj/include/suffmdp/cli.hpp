#pragma once

namespace suffmdp {

/// Entry point of the suffmdp tool. Returns 0 on success, 1 on invalid
/// input (usage, flags, files, values) and 2 on runtime failure.
int run_cli(int argc, const char* const* argv);

}  // namespace suffmdp

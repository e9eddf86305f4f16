#pragma once

#include <string>
#include <vector>

namespace sparta::cli {

// Runs one command (args exclude the program name). Returns the process
// exit status: 0 on success, 1 on runtime/file errors, 2 on usage errors.
int run(std::vector<std::string> args);

}  // namespace sparta::cli

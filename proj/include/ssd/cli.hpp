#pragma once

#include <string>
#include <vector>

namespace ssd {

int cli_main(int argc, const char* const* argv);

// in-process variant for tests; args exclude the program name
int cli_main(const std::vector<std::string>& args);

}  // namespace ssd

// commands.hpp — CLI subcommand implementations

#pragma once

#include <string>
#include <vector>

namespace berryloop::shell {

// exit codes: 0 ok, 1 error, 2 validity warnings without --force
int run_command(const std::vector<std::string>& argv);

} // namespace berryloop::shell

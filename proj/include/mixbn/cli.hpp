#ifndef MIXBN_CLI_HPP
#define MIXBN_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace mixbn {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes: 0 success, 1 input error, 2 internal invariant violation.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace mixbn

#endif  // MIXBN_CLI_HPP

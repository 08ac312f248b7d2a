#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace betajac::cli {

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

// Runs one subcommand. args[0] is the program name. Results go to `out`
// (or the --out file), error records and the stage log to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "gamma1..gamma4,x,exp" -> gamma1 gamma2 gamma3 gamma4 x exp. Commas or
// whitespace separate entries.
std::vector<std::string> expand_function_names(const std::string& spec);

// "128,256,512" -> {128, 256, 512}.
std::vector<int> parse_int_list(const std::string& spec);

}  // namespace betajac::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xsema {

/// `args` excludes the program name. Returns 0 on success, 1 on a usage
/// error (usage goes to `err`), 2 on a runtime error naming the component.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xsema

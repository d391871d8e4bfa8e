#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rankreg {

/// Exit statuses: 0 success, 1 a model diverged (results still written),
/// 2 usage or input error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rankreg

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace malcal::cli {

/// Runs one CLI invocation. `args` excludes the program name. Results go to
/// the --output file or to `out`; the validated configuration, summaries for
/// stdout runs and diagnostics go to `err`.
///
/// Returns 0 on success, 1 on runtime errors (coupling under-run, cost guard,
/// failed identity checks) and 2 on argument errors.
int parse_and_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace malcal::cli

#ifndef ASNN_CLI_HPP
#define ASNN_CLI_HPP

#include <iosfwd>

namespace asnn::cli {

/**
 * Entry point of the `asnn` tool. Returns the process exit code; on failure
 * exactly one line of JSON `{"error":{"kind":..,"message":..}}` is written
 * to `err`.
 */
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace asnn::cli

#endif  // ASNN_CLI_HPP

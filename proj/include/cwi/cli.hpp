#pragma once

namespace cwi::cli {

/// Full command-line entry point. Exit statuses: 0 success, 1 compute
/// failure, 2 usage/config error.
int run(int argc, const char* const* argv);

}  // namespace cwi::cli

#ifndef KS_TOOLS_CLI_HPP
#define KS_TOOLS_CLI_HPP

namespace ks::cli {

enum ExitCode : int { kOk = 0, kInternalError = 1, kConfigError = 2, kSolverFailure = 3 };

/// Entry point of ks_cli; returns the process exit status.
int main(int argc, char** argv);

}  // namespace ks::cli

#endif  // KS_TOOLS_CLI_HPP

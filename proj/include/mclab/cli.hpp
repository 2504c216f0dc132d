#pragma once

// The mclab subcommands. Each takes a parsed JSON config, validates every
// field before doing any work and writes its reports under options.out.

#include "mclab/error.hpp"
#include "mclab/report.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mclab {

// Bad config field; the message starts with the dotted field name.
class ConfigError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_usage = 2, exit_io = 3, exit_other = 4 };

struct RunOptions {
    std::filesystem::path config_dir = ".";  // relative input paths resolve here
    std::optional<std::uint64_t> seed;       // overrides the config's "seed"
    int jobs = 1;
    std::filesystem::path out = ".";
};

struct CommandResult {
    bool passed = true;
    Json report;  // also written to <out>/<command>.json
    std::vector<std::filesystem::path> files;
    std::vector<std::string> summary;  // one line each, for stdout
};

CommandResult cmd_norm_estimate(const Json& config, const RunOptions& options);
CommandResult cmd_sharpness_scan(const Json& config, const RunOptions& options);
CommandResult cmd_bands_demo(const Json& config, const RunOptions& options);
CommandResult cmd_verify_multilinear(const Json& config, const RunOptions& options);

// Full command line, argv[0] included. Maps errors to ExitCode.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mclab

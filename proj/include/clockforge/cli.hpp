#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace clockforge::cli {

// Exit codes: 0 success, 2 config error, 3 numerical error,
// 4 fringe-hop-invalidated result set.
int run(int argc, const char* const* argv);

// Programmatic entry used by the binary and the tests: executes `command`
// with the JSON config text, writing the result bundle under out_dir.
int run_command(const std::string& command, const std::string& config_text,
                const std::string& out_dir, int threads,
                std::optional<uint64_t> seed_override);

}  // namespace clockforge::cli

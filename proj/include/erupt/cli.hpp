#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace erupt
{
struct Trajectory;
}

namespace erupt::cli
{
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand; args exclude the program name. `serve` blocks until
/// SIGINT/SIGTERM, which the caller must have blocked in every thread.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Seed from ERUPT_SEED; throws Error(InvalidArgument) when set but not a number.
std::optional<std::uint64_t> seedFromEnvironment();

/// Joint-position-vs-time plot of a trajectory.
std::string renderSvg(const Trajectory& trajectory, const std::vector<std::string>& joint_names,
                      const std::vector<std::uint8_t>& wrap = {});

}  // namespace erupt::cli

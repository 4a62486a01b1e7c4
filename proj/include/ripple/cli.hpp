#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ripple/evalharness.hpp"

namespace ripple::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (argv[0] is the program name). Never throws.
int dispatch(int argc, const char* const* argv);
int dispatch(const std::vector<std::string>& args);

/// Builds an answer provider from a provider-config object:
///   {"id", "kind": "simulated", "profile": "step:0.75,0.25,50" | "uniform": true, "seed"}
///   {"id", "kind": "lookup-table", "answers": {item_id: index} | "oracle": true}
///   {"id", "kind": "remote-chat", "model", "url"?}   (key from RIPPLE_CHAT_API_KEY)
/// `default_seed` applies when the config has no seed; `dataset` backs the
/// oracle table.
std::unique_ptr<AnswerProvider> make_provider(const nlohmann::json& config, std::uint64_t default_seed,
                                              const RippleDataset& dataset);

}  // namespace ripple::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sfde/bounds.hpp"
#include "sfde/transfer.hpp"

namespace sfde {

using Json = nlohmann::ordered_json;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& what);

/// Field order: num_states, num_actions, gamma, transition, features, weights,
/// terminal, then start_state, grid and layout.
Json mdp_to_json(const TabularMdp& mdp);
TabularMdp mdp_from_json(const Json& j);

Json bundle_to_json(const SourceBundle& bundle);
SourceBundle bundle_from_json(const Json& j);

Json qtable_to_json(const QTable& table);

/// Training data and hyperparameters; the factorization is recomputed on load.
Json gp_to_json(const GpSfModel& model);
GpSfModel gp_from_json(const Json& j);

// CSV writers. Every file has a header row and LF line endings.
std::string trace_csv(const PhaseTrace& trace);
std::string episodes_csv(const PhaseTrace& trace);
std::string learning_trace_csv(const std::vector<EpisodeRecord>& trace);
std::string bound_csv(const BoundReport& report);
Json bound_summary_json(const BoundReport& report);

/// Parses episodes_csv output.
std::vector<EpisodeSummary> parse_episodes_csv(const std::string& text, const std::string& origin);

std::string read_text_file(const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& content);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace sfde

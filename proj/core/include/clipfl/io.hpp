#pragma once

#include "clipfl/run_record.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace clipfl {

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr std::string_view kCsvHeader =
    "epoch,f_residual,grad_norm,stepsize,comm_rounds,component_grads,client_grads,full_grads";

/// Shortest decimal string that parses back to `v`.
std::string format_shortest(double v);

/// Compact JSON with sorted keys, doubles in %.17g and non-finite numbers as
/// null. `indent` >= 0 pretty-prints. Parsing the output and re-emitting it is
/// byte-identical.
std::string canonical_json(const nlohmann::json& j, int indent = -1);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// 16 lowercase hex digits of fnv1a64(canonical_json(j)).
std::string json_hash(const nlohmann::json& j);

std::string record_csv(const RunRecord& record);

/// Config, seed, status and final metrics. wall_seconds lives here, never in the CSV.
nlohmann::json record_json(const RunRecord& record);

/// Writes a file, creating parent directories. Throws IoError on failure.
void write_file(const std::filesystem::path& path, std::string_view content);

/// Throws IoError when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

}  // namespace clipfl

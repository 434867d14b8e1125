#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "surveymix/dynamic_sampler.hpp"
#include "surveymix/model.hpp"
#include "surveymix/posterior.hpp"
#include "surveymix/selection.hpp"

namespace surveymix {

// Draws are stored per parameter block, one CSV per block with a row per
// snapshot and a column per scalar, next to a meta.json that echoes the
// configuration. Doubles are printed with %.17g so round trips are exact.
void write_draws(const PosteriorDraws& draws, const std::filesystem::path& dir);
PosteriorDraws read_draws(const std::filesystem::path& dir);

void write_sgld_diagnostics(const SgldDiagnostics& diag,
                            const std::filesystem::path& path);

nlohmann::json config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const nlohmann::json& doc);

nlohmann::json estimates_to_json(const PointEstimates& est);
nlohmann::json selection_to_json(const SelectionReport& report);

void write_json(const nlohmann::json& doc, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

// FNV-1a 64-bit content fingerprint, recorded in manifests.
std::uint64_t fnv1a_file(const std::filesystem::path& path);

std::string iso_timestamp();
std::string format_double(double x);  // %.17g

}  // namespace surveymix

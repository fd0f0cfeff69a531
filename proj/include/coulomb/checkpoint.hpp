#pragma once

#include <filesystem>

#include "coulomb/neural.hpp"
#include "json.hpp"

namespace coulomb {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  Mlp net;
  AdamState adam;
};

// {format_version, layer_widths, activations, weights, biases, adam_state}.
// weights[l] is a nested out x in array, biases[l] a flat array; the Adam
// moments are flat arrays in Mlp::parameters() order.
nlohmann::json checkpoint_to_json(const Mlp& net, const AdamState& adam);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

// Atomic write (temporary file + rename). Throws IoError.
void save_checkpoint(const std::filesystem::path& path, const Mlp& net, const AdamState& adam);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace coulomb

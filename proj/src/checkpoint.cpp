#include "coulomb/checkpoint.hpp"

#include <fstream>

#include "coulomb/error.hpp"
#include "coulomb/io.hpp"

namespace coulomb {

using nlohmann::json;

json checkpoint_to_json(const Mlp& net, const AdamState& adam) {
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["layer_widths"] = net.widths();
  json acts = json::array();
  for (Activation a : net.activations()) acts.push_back(to_string(a));
  doc["activations"] = acts;
  json weights = json::array();
  json biases = json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const std::size_t in = static_cast<std::size_t>(net.widths()[l]);
    const auto w = net.weights(l);
    json rows = json::array();
    for (std::size_t o = 0; o < w.size() / in; ++o)
      rows.push_back(std::vector<double>(w.begin() + o * in, w.begin() + (o + 1) * in));
    weights.push_back(rows);
    const auto b = net.biases(l);
    biases.push_back(std::vector<double>(b.begin(), b.end()));
  }
  doc["weights"] = weights;
  doc["biases"] = biases;
  doc["adam_state"] = {
      {"step_counter", adam.step_counter},   {"beta1", adam.beta1},
      {"beta2", adam.beta2},                 {"epsilon_opt", adam.epsilon_opt},
      {"learning_rate", adam.learning_rate}, {"weight_decay", adam.weight_decay},
      {"first_moment", adam.first_moment},   {"second_moment", adam.second_moment},
  };
  return doc;
}

Checkpoint checkpoint_from_json(const json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion)
      throw InputError("unsupported checkpoint format_version " + std::to_string(version));
    std::vector<Activation> acts;
    for (const auto& a : doc.at("activations")) acts.push_back(parse_activation(a.get<std::string>()));
    Checkpoint ck{Mlp(doc.at("layer_widths").get<std::vector<int>>(), std::move(acts)), {}};
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (weights.size() != ck.net.layer_count() || biases.size() != ck.net.layer_count())
      throw InputError("checkpoint has the wrong number of layers");
    for (std::size_t l = 0; l < ck.net.layer_count(); ++l) {
      const std::size_t in = static_cast<std::size_t>(ck.net.widths()[l]);
      const std::size_t out = static_cast<std::size_t>(ck.net.widths()[l + 1]);
      const auto& rows = weights[l];
      if (rows.size() != out) throw InputError("checkpoint weight matrix has the wrong row count");
      auto w = ck.net.weights(l);
      for (std::size_t o = 0; o < out; ++o) {
        const auto row = rows[o].get<std::vector<double>>();
        if (row.size() != in) throw InputError("checkpoint weight row has the wrong length");
        std::copy(row.begin(), row.end(), w.begin() + o * in);
      }
      const auto b = biases[l].get<std::vector<double>>();
      if (b.size() != out) throw InputError("checkpoint bias has the wrong length");
      std::copy(b.begin(), b.end(), ck.net.biases(l).begin());
    }
    if (!ck.net.all_finite()) throw InputError("checkpoint contains non-finite parameters");

    const auto& a = doc.at("adam_state");
    ck.adam.step_counter = a.at("step_counter").get<long>();
    ck.adam.beta1 = a.at("beta1").get<double>();
    ck.adam.beta2 = a.at("beta2").get<double>();
    ck.adam.epsilon_opt = a.at("epsilon_opt").get<double>();
    ck.adam.learning_rate = a.at("learning_rate").get<double>();
    ck.adam.weight_decay = a.at("weight_decay").get<double>();
    ck.adam.first_moment = a.at("first_moment").get<std::vector<double>>();
    ck.adam.second_moment = a.at("second_moment").get<std::vector<double>>();
    if (ck.adam.first_moment.size() != ck.net.parameter_count() ||
        ck.adam.second_moment.size() != ck.net.parameter_count())
      throw InputError("checkpoint Adam moments do not match the parameter count");
    return ck;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Mlp& net, const AdamState& adam) {
  write_file_atomic(path, checkpoint_to_json(net, adam).dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_json_file(path));
}

}  // namespace coulomb

#ifndef MIXBN_MODEL_IO_HPP
#define MIXBN_MODEL_IO_HPP

#include "mixbn/parameters.hpp"

#include <string>
#include <string_view>

namespace mixbn {

// Separator between parent labels in serialized table keys.
inline constexpr char kKeySeparator = '|';

// {"nodes":[{"name","kind","parents","distribution":{"type":"cpt"|"lg"|"clg",...}}],
//  "edges":[[p,c],...], "bins":b, "alpha":a, "discretization":{...}}
std::string model_to_json(const BayesianNetworkModel& model);
BayesianNetworkModel model_from_json(std::string_view text);

void save_model(const BayesianNetworkModel& model, const std::string& path);
BayesianNetworkModel load_model(const std::string& path);

// Graphviz digraph; continuous nodes red ellipses, categorical blue boxes.
std::string model_to_dot(const BayesianNetworkModel& model);

}  // namespace mixbn

#endif  // MIXBN_MODEL_IO_HPP

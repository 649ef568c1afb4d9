#pragma once

#include <string>
#include <vector>

#include "agentosi/canonical_json.hpp"

namespace agentosi {

// Built-in inputs: sha256 preimages, canonical JSON values, identity seeds,
// messages signed by the first three identities, and the secret-key-1 case.
Json default_vector_inputs();

// Recomputes every output field of a vector document from its input fields.
// Sections: sha256, canonical_json, identities, signatures, raw_key_signatures.
Json emit_vectors(const Json& inputs);

// One line per output that differs from the recomputed value.
std::vector<std::string> check_vectors(const Json& vectors);

}  // namespace agentosi

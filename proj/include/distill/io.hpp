#pragma once

// JSON encodings shared by the CLI.
//
//   complex number  [re, im]
//   matrix          row-major nested arrays of complex numbers
//   operation       {"input": [dA, dB],
//                    "subops": [{"output": [dA', dB'], "kraus": [matrix, ...]}],
//                    "witness": [[{"a": matrix, "b": matrix}, ...], ...]}   (optional)
//   trace           {"steps": [{"n": int, "branches": [{"p": x, "K": int, "F": x}]}]}

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "distill/distillation.hpp"
#include "distill/linalg.hpp"
#include "distill/operations.hpp"

namespace distill::io {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// Input that does not match a schema; the message names the JSON path.
struct SchemaError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

[[nodiscard]] Json matrixToJson(const ComplexMatrix& m);
[[nodiscard]] ComplexMatrix matrixFromJson(const Json& j, const std::string& path = "");

struct OperationDescriptor {
  QuantumOperation op;
  std::optional<SeparableWitness> witness;
};

[[nodiscard]] OperationDescriptor operationFromJson(const Json& j);
[[nodiscard]] Json operationToJson(const QuantumOperation& op, bool includeWitness = true);

[[nodiscard]] ProtocolTrace traceFromJson(const Json& j);
[[nodiscard]] Json traceToJson(const ProtocolTrace& trace);

// Parses text, turning parse errors into SchemaError with line/column.
[[nodiscard]] Json parseJson(const std::string& text, const std::string& source);
[[nodiscard]] Json readJsonFile(const std::string& path);

// Rounds to `precision` significant digits; serializing the result gives
// the shortest decimal that round-trips at that precision.
[[nodiscard]] double rounded(double x, int precision);
[[nodiscard]] std::string formatNumber(double x, int precision);

}  // namespace distill::io

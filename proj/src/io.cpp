#include "distill/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace distill::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SchemaError((path.empty() ? std::string("<root>") : path) + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing field \"") + key + "\"");
  return *it;
}

int positiveInt(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 1) fail(path, "expected a positive integer");
  return j.get<int>();
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

BipartiteLabel labelFromJson(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [dimA, dimB]");
  return {positiveInt(j[0], path + "[0]"), positiveInt(j[1], path + "[1]")};
}

Json labelToJson(BipartiteLabel l) { return Json::array({l.dimA, l.dimB}); }

// Integer-valued dimension; accepts floats like 1.329e36 for huge powers of two.
double dimensionFromJson(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a positive integer");
  const double v = j.get<double>();
  if (!(v >= 1.0) || std::floor(v) != v || !std::isfinite(v)) fail(path, "expected a positive integer");
  return v;
}

}  // namespace

Json matrixToJson(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrixFromJson(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(path + "[0]", "expected a nonempty row");
  ComplexMatrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) fail(rp, "rows must all have " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string cp = rp + "[" + std::to_string(c) + "]";
      const Json& z = j[r][c];
      if (z.is_number()) {
        m(r, c) = Complex(z.get<double>(), 0.0);
      } else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number()) {
        m(r, c) = Complex(z[0].get<double>(), z[1].get<double>());
      } else {
        fail(cp, "expected a complex number [re, im]");
      }
    }
  }
  return m;
}

OperationDescriptor operationFromJson(const Json& j) {
  const BipartiteLabel input = labelFromJson(field(j, "input", ""), "input");
  const Json& subs = field(j, "subops", "");
  if (!subs.is_array() || subs.empty()) fail("subops", "expected a nonempty array");
  std::vector<SubOperation> subops;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const std::string sp = "subops[" + std::to_string(i) + "]";
    SubOperation sub{{}, labelFromJson(field(subs[i], "output", sp), sp + ".output")};
    const Json& kraus = field(subs[i], "kraus", sp);
    if (!kraus.is_array() || kraus.empty()) fail(sp + ".kraus", "expected a nonempty array of matrices");
    for (std::size_t k = 0; k < kraus.size(); ++k) {
      const std::string kp = sp + ".kraus[" + std::to_string(k) + "]";
      ComplexMatrix m = matrixFromJson(kraus[k], kp);
      if (m.rows() != sub.output.total() || m.cols() != input.total()) {
        fail(kp, "shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                     " does not map input dimension " + std::to_string(input.total()) +
                     " to output dimension " + std::to_string(sub.output.total()));
      }
      sub.kraus.push_back(std::move(m));
    }
    subops.push_back(std::move(sub));
  }

  std::optional<SeparableWitness> witness;
  if (const auto it = j.find("witness"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != subops.size()) {
      fail("witness", "expected one entry per sub-operation");
    }
    SeparableWitness w;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string wp = "witness[" + std::to_string(i) + "]";
      const Json& terms = (*it)[i];
      if (!terms.is_array() || terms.empty()) fail(wp, "expected a nonempty array of {a, b} pairs");
      std::vector<ProductTerm> list;
      for (std::size_t t = 0; t < terms.size(); ++t) {
        const std::string tp = wp + "[" + std::to_string(t) + "]";
        list.push_back(ProductTerm{matrixFromJson(field(terms[t], "a", tp), tp + ".a"),
                                   matrixFromJson(field(terms[t], "b", tp), tp + ".b")});
      }
      w.push_back(std::move(list));
    }
    witness = std::move(w);
  }
  return OperationDescriptor{QuantumOperation(input, std::move(subops)), std::move(witness)};
}

Json operationToJson(const QuantumOperation& op, bool includeWitness) {
  Json j;
  j["input"] = labelToJson(op.input());
  Json subs = Json::array();
  for (const auto& s : op.subops()) {
    Json kraus = Json::array();
    for (const auto& k : s.kraus) kraus.push_back(matrixToJson(k));
    subs.push_back(Json{{"output", labelToJson(s.output)}, {"kraus", std::move(kraus)}});
  }
  j["subops"] = std::move(subs);
  if (includeWitness && op.witness()) {
    Json w = Json::array();
    for (const auto& terms : *op.witness()) {
      Json list = Json::array();
      for (const auto& t : terms) list.push_back(Json{{"a", matrixToJson(t.a)}, {"b", matrixToJson(t.b)}});
      w.push_back(std::move(list));
    }
    j["witness"] = std::move(w);
  }
  return j;
}

ProtocolTrace traceFromJson(const Json& j) {
  const Json& steps = field(j, "steps", "");
  if (!steps.is_array()) fail("steps", "expected an array");
  std::vector<TraceStep> out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string sp = "steps[" + std::to_string(i) + "]";
    const Json& n = field(steps[i], "n", sp);
    if (!n.is_number_integer() || n.get<long long>() < 1) fail(sp + ".n", "expected a positive integer");
    TraceStep step{n.get<std::int64_t>(), {}};
    const Json& branches = field(steps[i], "branches", sp);
    if (!branches.is_array() || branches.empty()) fail(sp + ".branches", "expected a nonempty array");
    for (std::size_t b = 0; b < branches.size(); ++b) {
      const std::string bp = sp + ".branches[" + std::to_string(b) + "]";
      step.branches.push_back(BranchOutcome{number(field(branches[b], "p", bp), bp + ".p"),
                                            dimensionFromJson(field(branches[b], "K", bp), bp + ".K"),
                                            number(field(branches[b], "F", bp), bp + ".F")});
    }
    out.push_back(std::move(step));
  }
  try {
    return ProtocolTrace(std::move(out));
  } catch (const std::exception& e) {
    fail("steps", e.what());
  }
}

Json traceToJson(const ProtocolTrace& trace) {
  Json steps = Json::array();
  for (const auto& s : trace.steps()) {
    Json branches = Json::array();
    for (const auto& b : s.branches) {
      Json k = b.K < 9007199254740992.0 ? Json(static_cast<std::int64_t>(b.K)) : Json(b.K);
      branches.push_back(Json{{"p", b.p}, {"K", std::move(k)}, {"F", b.F}});
    }
    steps.push_back(Json{{"n", s.n}, {"branches", std::move(branches)}});
  }
  return Json{{"steps", std::move(steps)}};
}

Json parseJson(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Convert the byte offset into line/column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SchemaError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": invalid JSON");
  }
}

Json readJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseJson(buf.str(), path);
}

double rounded(double x, int precision) {
  if (!std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, x);
  return std::strtod(buf, nullptr);
}

std::string formatNumber(double x, int precision) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, x);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

}  // namespace distill::io

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "distill/io.hpp"
#include "distill/protocols.hpp"
#include "distill/random.hpp"

using namespace distill;
using namespace distill::io;

namespace {

std::string schemaMessage(const std::string& text, bool trace) {
  try {
    const Json j = parseJson(text, "input.json");
    if (trace) {
      (void)traceFromJson(j);
    } else {
      (void)operationFromJson(j);
    }
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("matrix encoding") {
  ComplexMatrix m(2, 3);
  m << Complex(1, 2), Complex(0, -1), Complex(0.5, 0), Complex(-3, 0), Complex(0, 0), Complex(1e-20, 7);
  const Json j = matrixToJson(m);
  CHECK(j.dump() == "[[[1.0,2.0],[0.0,-1.0],[0.5,0.0]],[[-3.0,0.0],[0.0,0.0],[1e-20,7.0]]]");
  CHECK(matrixFromJson(j) == m);
  CHECK(matrixFromJson(Json::parse("[[1, [0, 1]]]"))(0, 1) == Complex(0, 1));
  CHECK_THROWS_AS((void)matrixFromJson(Json::parse("[[1, 2], [3]]")), SchemaError);
  CHECK_THROWS_AS((void)matrixFromJson(Json::parse("[]")), SchemaError);
  CHECK_THROWS_AS((void)matrixFromJson(Json::parse("[[[1, 2, 3]]]")), SchemaError);
}

TEST_CASE("operation round trip") {
  Rng rng = streamRng(61, 0);
  const auto op = randomOperation({2, 2}, {{2, 1}, {1, 2}}, 2, rng);
  const auto back = operationFromJson(operationToJson(op)).op;
  REQUIRE(back.subops().size() == 2);
  CHECK(back.input() == op.input());
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.subops()[i].output == op.subops()[i].output);
    for (std::size_t k = 0; k < op.subops()[i].kraus.size(); ++k)
      CHECK(back.subops()[i].kraus[k] == op.subops()[i].kraus[k]);
  }
  // witnesses survive the trip
  const auto p1 = protocol1Op(3, 2, BranchMode::KeepBranches);
  REQUIRE(p1.witness().has_value());
  const auto desc = operationFromJson(operationToJson(p1));
  REQUIRE(desc.witness.has_value());
  CHECK(desc.witness->size() == p1.subops().size());
  CHECK_FALSE(operationToJson(p1, false).contains("witness"));
}

TEST_CASE("operation schema errors name the path") {
  CHECK(schemaMessage(R"({"subops": []})", false).find("missing field \"input\"") != std::string::npos);
  CHECK(schemaMessage(R"({"input": [2, 0], "subops": []})", false).find("input[1]") != std::string::npos);
  CHECK(schemaMessage(R"({"input": [1, 1], "subops": [{"output": [1, 1], "kraus": [[[1, 0], [0, 1]]]}]})", false)
            .find("subops[0].kraus[0]") != std::string::npos);
  CHECK(schemaMessage(R"({"input": [1, 1], "subops": [{"output": [1, 1], "kraus": [[["x"]]]}]})", false)
            .find("subops[0].kraus[0][0][0]") != std::string::npos);
  CHECK(schemaMessage(R"({"input": [1, 1], "subops": [{"output": [1, 1], "kraus": [[[1]]]}], "witness": []})", false)
            .find("witness") != std::string::npos);
}

TEST_CASE("trace round trip and errors") {
  const std::string text = R"({"steps": [{"n": 10, "branches": [{"p": 0.5, "K": 1024, "F": 0.99}, {"p": 0.5, "K": 1, "F": 1}]}]})";
  const auto t = traceFromJson(parseJson(text, "t.json"));
  REQUIRE(t.size() == 1);
  CHECK(t.steps()[0].branches[0].K == 1024.0);
  CHECK(traceToJson(t) == Json::parse(text));

  const auto huge = traceFromJson(Json::parse(R"({"steps": [{"n": 1, "branches": [{"p": 1, "K": 1.2676506002282294e30, "F": 1}]}]})"));
  CHECK(huge.steps()[0].branches[0].K == std::ldexp(1.0, 100));
  CHECK(traceFromJson(traceToJson(huge)).steps()[0].branches[0].K == std::ldexp(1.0, 100));

  CHECK(schemaMessage(R"({"steps": [{"n": 0, "branches": []}]})", true).find("steps[0].n") != std::string::npos);
  CHECK(schemaMessage(R"({"steps": [{"n": 1, "branches": [{"p": 1, "K": 2.5, "F": 1}]}]})", true)
            .find("steps[0].branches[0].K") != std::string::npos);
  CHECK(schemaMessage(R"({"steps": [{"n": 1, "branches": [{"p": 0.7, "K": 2, "F": 1}]}]})", true)
            .find("sum to") != std::string::npos);
  CHECK(schemaMessage(R"({"steps": [{"n": 1, "branches": [{"p": 1, "K": 2}]}]})", true)
            .find("missing field \"F\"") != std::string::npos);
}

TEST_CASE("parse errors carry line and column") {
  CHECK(schemaMessage("{\n  \"steps\": [\n    oops\n]}", true).rfind("input.json:3:", 0) == 0);
  CHECK(schemaMessage("", true).rfind("input.json:1:", 0) == 0);
  CHECK_THROWS_AS((void)readJsonFile("/nonexistent/file.json"), SchemaError);
}

TEST_CASE("number formatting") {
  CHECK(formatNumber(0.1 + 0.2, 12) == "0.3");
  CHECK(formatNumber(0.1 + 0.2, 17) == "0.30000000000000004");
  CHECK(formatNumber(-0.0, 12) == "0");
  CHECK(formatNumber(1.0 / 3.0, 4) == "0.3333");
  CHECK(formatNumber(1e-30, 12) == "1e-30");
  CHECK(formatNumber(std::numeric_limits<double>::infinity(), 12) == "inf");
  CHECK(rounded(0.1 + 0.2, 12) == 0.3);
  CHECK(rounded(2.0 / 3.0, 3) == 0.667);
}

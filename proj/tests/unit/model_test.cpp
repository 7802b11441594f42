#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "zkwf/model.hpp"

using namespace zkwf;
using zkwf::testing::corpus_model;
using zkwf::testing::corpus_names;

namespace {

const std::string kAlice = "2dc7762fa1fddd0ced74c4d937d233c966743055e36c6d21b6dd0bb2cb678ad9";
const std::string kBob = "1a59cfcbd1f1f9dc5ad2936f061c540cdd54659ebcdd6318ac93aebb9999713c";
const std::string kCarol = "b2faedfe869cf16d96de4d699aa75e5c3fbc374cbec01d0b9ea2283f0ce08311";

// Single-pool document around the given process body lines.
std::string doc(const std::vector<std::string>& body, const std::string& poolKey = kAlice,
                const std::string& laneSet = "") {
  std::string out =
      "<?xml version=\"1.0\"?>\n"
      "<bpmn:definitions xmlns:bpmn=\"http://www.omg.org/spec/BPMN/20100524/MODEL\" "
      "xmlns:zkp=\"http://zkwf.dev/schema/zkp\" id=\"defs\">\n"
      "<bpmn:collaboration id=\"collab\"><bpmn:participant id=\"pool\" processRef=\"proc\"" +
      (poolKey.empty() ? std::string() : " zkp:publicKey=\"" + poolKey + "\"") +
      "/></bpmn:collaboration>\n<bpmn:process id=\"proc\">\n" + laneSet;
  for (const auto& l : body) out += l + "\n";
  return out + "</bpmn:process>\n</bpmn:definitions>\n";
}

std::string node(const std::string& tag, const std::string& id, const std::string& extra = "") {
  return "<bpmn:" + tag + " id=\"" + id + "\"" + extra + "/>";
}
std::string flow(const std::string& id, const std::string& s, const std::string& t) {
  return "<bpmn:sequenceFlow id=\"" + id + "\" sourceRef=\"" + s + "\" targetRef=\"" + t + "\"/>";
}

std::vector<std::string> linear_body() {
  return {node("startEvent", "s"), node("task", "a"), node("endEvent", "e"), flow("f1", "s", "a"),
          flow("f2", "a", "e")};
}

std::vector<std::string> diamond_body() {
  return {node("startEvent", "s"),      node("task", "a"),        node("parallelGateway", "g1"),
          node("task", "b"),            node("task", "c"),        node("parallelGateway", "g2"),
          node("task", "d"),            node("endEvent", "e"),    flow("f1", "s", "a"),
          flow("f2", "a", "g1"),        flow("f3", "g1", "b"),    flow("f4", "g1", "c"),
          flow("f5", "b", "g2"),        flow("f6", "c", "g2"),    flow("f7", "g2", "d"),
          flow("f8", "d", "e")};
}

ParseError::Kind parse_error_kind(const std::string& xml) {
  try {
    parse_bpmn(xml);
  } catch (const ParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "document parsed";
  return ParseError::Kind::Syntax;
}

}  // namespace

TEST(ModelParse, LinearModel) {
  auto m = parse_bpmn(doc(linear_body()));
  EXPECT_EQ(m.elements.size(), 3u);
  EXPECT_EQ(m.flows.size(), 2u);
  EXPECT_EQ(m.pools.size(), 1u);
  EXPECT_TRUE(validate_structure(m).empty());
}

TEST(ModelParse, TaskVariantsAreTasks) {
  auto body = linear_body();
  body[1] = node("userTask", "a");
  EXPECT_EQ(parse_bpmn(doc(body)).at("a").kind, ElementKind::Task);
  body[1] = node("manualTask", "a");
  EXPECT_EQ(parse_bpmn(doc(body)).at("a").kind, ElementKind::Task);
}

TEST(ModelParse, SubProcessIsUnsupported) {
  auto body = linear_body();
  body.push_back(node("subProcess", "sp"));
  try {
    parse_bpmn(doc(body));
    FAIL() << "parsed";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::Unsupported);
    EXPECT_NE(std::string(e.what()).find("unsupported element"), std::string::npos);
  }
}

TEST(ModelParse, OtherErrors) {
  EXPECT_EQ(parse_error_kind("<bpmn:definitions"), ParseError::Kind::Syntax);
  auto body = linear_body();
  body.push_back(node("dataObject", "obj"));
  EXPECT_EQ(parse_error_kind(doc(body)), ParseError::Kind::Unsupported);

  body = linear_body();
  body.push_back("<bpmn:task name=\"no id\"/>");
  EXPECT_EQ(parse_error_kind(doc(body)), ParseError::Kind::MissingId);

  body = linear_body();
  body.push_back(node("task", "a"));
  EXPECT_EQ(parse_error_kind(doc(body)), ParseError::Kind::DuplicateId);

  body = linear_body();
  body.push_back(flow("f9", "a", "nowhere"));
  EXPECT_EQ(parse_error_kind(doc(body)), ParseError::Kind::DanglingReference);

  body = linear_body();
  body[1] = node("task", "a", " zkp:publicKey=\"1234\"");
  EXPECT_EQ(parse_error_kind(doc(body)), ParseError::Kind::InvalidAttribute);
}

TEST(ModelParse, CorpusLeasingShape) {
  const Model& m = corpus_model("leasing");
  EXPECT_EQ(m.pools.size(), 3u);
  std::size_t executables = 0, gateways = 0;
  for (const auto& e : m.elements) (is_gateway(e.kind) ? gateways : executables)++;
  EXPECT_GE(executables, 50u);
  EXPECT_EQ(executables + gateways, 68u);
  EXPECT_FALSE(m.messageFlows.empty());
  EXPECT_TRUE(validate_structure(m).empty());
}

TEST(ModelValidate, GatewayNotBinary) {
  auto body = diamond_body();
  body.push_back(node("task", "x"));
  body.push_back(flow("f9", "g1", "x"));
  body.push_back(flow("f10", "x", "e"));
  EXPECT_TRUE(report_contains(validate_structure(parse_bpmn(doc(body))), "gateway not binary"));
}

TEST(ModelValidate, Cycle) {
  // s -> gm -> a -> b -> gx -> {gm, e}
  std::vector<std::string> body = {node("startEvent", "s"),
          node("exclusiveGateway", "gm"),
          node("task", "a"),
          node("task", "b"),
          node("exclusiveGateway", "gx", " default=\"f5\""),
          node("endEvent", "e"),
          flow("f0", "s", "gm"),
          flow("f1", "gm", "a"),
          flow("f2", "a", "b"),
          flow("f3", "b", "gx"),
          "<bpmn:sequenceFlow id=\"f4\" sourceRef=\"gx\" targetRef=\"gm\"><bpmn:conditionExpression>true"
          "</bpmn:conditionExpression></bpmn:sequenceFlow>",
          flow("f5", "gx", "e")};
  EXPECT_TRUE(report_contains(validate_structure(parse_bpmn(doc(body))), "cycle"));
}

TEST(ModelValidate, DiamondIsClean) { EXPECT_TRUE(validate_structure(parse_bpmn(doc(diamond_body()))).empty()); }

TEST(ModelValidate, UnownedExecutable) {
  auto m = parse_bpmn(doc(linear_body(), ""));
  EXPECT_TRUE(report_contains(validate_structure(m), "unowned executable element"));
  try {
    resolve_owner(m, "a");
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("unowned executable element"), std::string::npos);
  }
}

TEST(ModelValidate, ConditionProblems) {
  std::vector<std::string> body = {
      node("startEvent", "s"),
      node("task", "a", " zkp:variables=\"x\""),
      node("exclusiveGateway", "g"),
      node("task", "b"),
      node("task", "c"),
      node("exclusiveGateway", "j"),
      node("endEvent", "e"),
      flow("f1", "s", "a"),
      flow("f2", "a", "g"),
      "<bpmn:sequenceFlow id=\"f3\" sourceRef=\"g\" targetRef=\"b\"><bpmn:conditionExpression>y &gt; 1"
      "</bpmn:conditionExpression></bpmn:sequenceFlow>",
      flow("f4", "g", "c"),
      flow("f5", "b", "j"),
      flow("f6", "c", "j"),
      flow("f7", "j", "e")};
  EXPECT_TRUE(report_contains(validate_structure(parse_bpmn(doc(body))), "unparseable condition"));
  body[9] = flow("f3", "g", "b");
  EXPECT_TRUE(report_contains(validate_structure(parse_bpmn(doc(body))), "missing condition"));
}

TEST(ModelValidate, DeterministicUnderElementReordering) {
  std::mt19937_64 rng(1);
  auto bad = diamond_body();
  bad.push_back(node("task", "x"));
  bad.push_back(flow("f9", "g1", "x"));
  for (const auto& body : {diamond_body(), bad}) {
    const auto expected = validate_structure(parse_bpmn(doc(body)));
    for (int i = 0; i < 20; ++i) {
      auto shuffled = body;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      EXPECT_EQ(validate_structure(parse_bpmn(doc(shuffled))), expected);
    }
  }
}

TEST(ModelOwner, MostSpecificKeyWins) {
  auto body = linear_body();
  body[1] = node("task", "a", " zkp:publicKey=\"" + kBob + "\"");
  auto m = parse_bpmn(doc(body));
  EXPECT_EQ(resolve_owner(m, "a").hex(), kBob);
  EXPECT_EQ(resolve_owner(m, "s").hex(), kAlice);
}

TEST(ModelOwner, LaneInheritance) {
  const std::string lanes =
      "<bpmn:laneSet id=\"ls\"><bpmn:lane id=\"l1\" zkp:publicKey=\"" + kCarol +
      "\"><bpmn:flowNodeRef>a</bpmn:flowNodeRef>"
      "<bpmn:childLaneSet id=\"cls\"><bpmn:lane id=\"l2\" zkp:publicKey=\"" + kBob +
      "\"><bpmn:flowNodeRef>e</bpmn:flowNodeRef></bpmn:lane></bpmn:childLaneSet></bpmn:lane></bpmn:laneSet>\n";
  auto m = parse_bpmn(doc(linear_body(), kAlice, lanes));
  EXPECT_EQ(resolve_owner(m, "a").hex(), kCarol);
  EXPECT_EQ(resolve_owner(m, "e").hex(), kBob);
  EXPECT_EQ(resolve_owner(m, "s").hex(), kAlice);
}

TEST(ModelOwner, EveryCorpusExecutableHasOneOwner) {
  for (const auto& name : corpus_names()) {
    const Model& m = corpus_model(name);
    for (const auto& e : m.elements) {
      if (!is_executable(e.kind)) continue;
      EXPECT_TRUE(m.participantKeys.count(resolve_owner(m, e.id))) << name << "/" << e.id;
    }
  }
}

TEST(ModelSerialize, RoundTripOverCorpus) {
  for (const auto& name : corpus_names()) {
    const Model& m = corpus_model(name);
    Model again = parse_bpmn(write_bpmn(m));
    EXPECT_TRUE(again == m) << name;
    EXPECT_EQ(model_digest(again), model_digest(m)) << name;
    EXPECT_EQ(model_to_json(again).dump(), model_to_json(m).dump()) << name;
  }
}

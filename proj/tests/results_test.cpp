#include <gtest/gtest.h>

#include <random>

#include "taskbench/error.hpp"
#include "taskbench/results.hpp"
#include "test_support.hpp"

using namespace taskbench;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ResultsFile sample(bool scd = false) {
  ResultsFile r = prefilled_results(scd ? "scd:active:noisy" : "semantic_slam:active:noisy",
                                    "object_map",
                                    scd ? std::vector<EnvironmentRef>{{"house", 1}, {"house", 2}}
                                        : std::vector<EnvironmentRef>{{"house", 1}},
                                    {"chair", "table"});
  ObjectProposal p;
  p.label_probs = {0.25, 0.7};
  p.centroid = {1.5, -2.25, 0.1};
  p.extent = {0.3, 0.4, 0.5};
  if (scd) p.state_probs = StateProbs{0.9, 0.05, 0.05};
  r.objects.push_back(p);
  return r;
}

std::string field_error(const json& j) {
  try {
    results_from_json(j);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ResultValidationError);
    return e.what();
  }
  ADD_FAILURE() << "accepted " << j.dump();
  return {};
}

}  // namespace

TEST(Results, JsonRoundTrip) {
  for (bool scd : {false, true}) {
    const ResultsFile r = sample(scd);
    EXPECT_EQ(results_from_json(to_json(r)), r);
  }
}

TEST(Results, FileRoundTripAndAtomicWrite) {
  tbtest::TempDir dir;
  const auto path = dir / "nested/out.json";
  write_results_atomic(path, sample());
  EXPECT_EQ(read_results(path), sample());
  for (const auto& e : fs::directory_iterator(path.parent_path())) {
    EXPECT_EQ(e.path().filename(), "out.json") << "temporary left behind";
  }
}

TEST(Results, ErrorsNameTheField) {
  json j = to_json(sample());
  j["objects"][0]["extent"][1] = -0.4;
  EXPECT_NE(field_error(j).find("objects[0].extent[1]"), std::string::npos);

  j = to_json(sample());
  j["objects"][0]["label_probs"] = {0.8, 0.7};
  EXPECT_NE(field_error(j).find("objects[0].label_probs"), std::string::npos);

  j = to_json(sample());
  j["objects"][0]["label_probs"] = {0.8};
  EXPECT_NE(field_error(j).find("objects[0].label_probs"), std::string::npos);

  j = to_json(sample());
  j["objects"][0]["label_probs"][0] = 1.5;
  EXPECT_NE(field_error(j).find("objects[0].label_probs"), std::string::npos);

  j = to_json(sample());
  j["objects"][0].erase("centroid");
  EXPECT_NE(field_error(j).find("objects[0].centroid"), std::string::npos);

  j = to_json(sample());
  j.erase("class_list");
  EXPECT_NE(field_error(j).find("class_list"), std::string::npos);
}

TEST(Results, StateProbsOnlyForScd) {
  json j = to_json(sample(false));
  j["objects"][0]["state_probs"] = {{"added", 1.0}, {"removed", 0.0}, {"constant", 0.0}};
  EXPECT_NE(field_error(j).find("state_probs"), std::string::npos);

  j = to_json(sample(true));
  j["objects"][0].erase("state_probs");
  EXPECT_NE(field_error(j).find("state_probs"), std::string::npos);

  j = to_json(sample(true));
  j["objects"][0]["state_probs"]["added"] = 0.99;
  EXPECT_NE(field_error(j).find("state_probs"), std::string::npos);
}

TEST(Results, SceneCountMustMatchTask) {
  json j = to_json(sample(true));
  j["environment_details"].erase(1);
  EXPECT_NE(field_error(j).find("environment_details"), std::string::npos);
}

TEST(Results, SumToleranceIsOnePlusMicro) {
  ResultsFile r = sample();
  r.objects[0].label_probs = {0.5, 0.5 + 5e-7};
  EXPECT_NO_THROW(validate_results(r));
  r.objects[0].label_probs = {0.5, 0.5 + 5e-6};
  EXPECT_THROW(validate_results(r), Error);
}

TEST(Results, RandomValidMapsRoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1), c(-10, 10);
  for (int i = 0; i < 200; ++i) {
    ResultsFile r = sample(i % 2 == 1);
    r.objects.clear();
    for (int k = 0; k < 5; ++k) {
      ObjectProposal p;
      const double a = u(rng), b = u(rng) * (1 - a);
      p.label_probs = {a, b};
      p.centroid = {c(rng), c(rng), c(rng)};
      p.extent = {u(rng) + 1e-3, u(rng) + 1e-3, u(rng) + 1e-3};
      if (i % 2) p.state_probs = StateProbs{a, b, 0};
      r.objects.push_back(p);
    }
    EXPECT_NO_THROW(validate_results(r));
    EXPECT_EQ(results_from_json(json::parse(to_json(r).dump())), r);
  }
}

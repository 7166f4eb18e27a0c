#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "mmeval/compare.hpp"
#include "mmeval/error.hpp"
#include "mmeval/util.hpp"
#include "support/pca_oracle.hpp"
#include "support/temp_dir.hpp"

using namespace mm;

namespace {

ProfileVector vectorOf(const std::string& label, std::array<double, 9> values) {
  ProfileVector p;
  p.label = label;
  p.values = values;
  return p;
}

}  // namespace

TEST_CASE("euclidean distance basics") {
  std::array<double, 9> a{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  CHECK(euclideanDistance(a, a) == 0.0);

  std::array<double, 9> b = a;
  b[3] += 1.0;
  CHECK(euclideanDistance(a, b) == doctest::Approx(1.0).epsilon(1e-12));

  std::array<double, 9> c = a;
  c[0] += 0.3;
  c[8] += 0.4;
  CHECK(euclideanDistance(a, c) == doctest::Approx(0.5).epsilon(1e-12));

  std::vector<double> shorter{1.0, 2.0};
  CHECK_THROWS_AS(euclideanDistance(std::span<const double>(shorter),
                                    std::span<const double>(a)),
                  UsageError);
}

TEST_CASE("distance is a metric on random triples") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<double, 9> x{}, y{}, z{};
    for (int i = 0; i < 9; ++i) {
      x[i] = dist(rng);
      y[i] = dist(rng);
      z[i] = dist(rng);
    }
    const double dxy = euclideanDistance(x, y);
    const double dyx = euclideanDistance(y, x);
    const double dxz = euclideanDistance(x, z);
    const double dzy = euclideanDistance(z, y);
    CHECK(dxy == dyx);
    CHECK(dxy <= dxz + dzy + 1e-12);
    CHECK(dxy >= 0.0);
  }
}

TEST_CASE("identical profiles project to the origin with zero ratios") {
  const std::vector<std::vector<double>> rows(4, std::vector<double>{0.3, -0.2, 0.5});
  const PcaProjection p = pcaProject(rows);
  for (const auto& c : p.coordinates) {
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 0.0);
  }
  CHECK(p.explainedVarianceRatio[0] == 0.0);
  CHECK(p.explainedVarianceRatio[1] == 0.0);
}

TEST_CASE("collinear profiles give r1 = 1") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 5; ++i) {
    const double t = 0.1 * i;
    rows.push_back({t, 2.0 * t, -t});
  }
  const PcaProjection p = pcaProject(rows);
  CHECK(p.explainedVarianceRatio[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p.explainedVarianceRatio[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("4x3 matrix matches the characteristic-polynomial oracle") {
  const std::vector<std::array<double, 3>> data{{0.2, -0.1, 0.5},
                                                {0.8, 0.3, -0.2},
                                                {-0.4, 0.6, 0.1},
                                                {0.0, -0.5, 0.9}};
  std::vector<std::vector<double>> rows;
  for (const auto& r : data) rows.push_back({r[0], r[1], r[2]});

  const PcaProjection got = pcaProject(rows);
  const mmtest::PcaOracleResult want = mmtest::pcaOracle3(data);

  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(got.coordinates[i][0] == doctest::Approx(want.coordinates[i][0]).epsilon(1e-9));
    CHECK(got.coordinates[i][1] == doctest::Approx(want.coordinates[i][1]).epsilon(1e-9));
  }
  CHECK(got.explainedVarianceRatio[0] ==
        doctest::Approx(want.explainedVarianceRatio[0]).epsilon(1e-9));
  CHECK(got.explainedVarianceRatio[1] ==
        doctest::Approx(want.explainedVarianceRatio[1]).epsilon(1e-9));
  CHECK(got.explainedVarianceRatio[0] + got.explainedVarianceRatio[1] <= 1.0 + 1e-9);
  CHECK(got.explainedVarianceRatio[0] >= got.explainedVarianceRatio[1]);
}

TEST_CASE("projecting onto all components reconstructs centered data") {
  std::mt19937_64 rng(31415);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const std::size_t m = 8, p = 5;
  std::vector<std::vector<double>> rows(m, std::vector<double>(p));
  for (auto& r : rows)
    for (auto& v : r) v = dist(rng);

  // Center, then reconstruct from scores in the full eigenbasis of the
  // scatter matrix (built here independently via power iteration with
  // deflation).
  std::vector<double> mean(p, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < p; ++j) mean[j] += r[j] / m;
  std::vector<std::vector<double>> centered = rows;
  for (auto& r : centered)
    for (std::size_t j = 0; j < p; ++j) r[j] -= mean[j];

  std::vector<std::vector<double>> scatter(p, std::vector<double>(p, 0.0));
  for (const auto& r : centered)
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) scatter[i][j] += r[i] * r[j];

  auto matVec = [&](const std::vector<std::vector<double>>& mat, const std::vector<double>& v) {
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j) out[i] += mat[i][j] * v[j];
    return out;
  };

  std::vector<std::vector<double>> basis;
  std::vector<std::vector<double>> work = scatter;
  for (std::size_t c = 0; c < p; ++c) {
    std::vector<double> v(p, 0.0);
    v[c % p] = 1.0;
    for (int it = 0; it < 500; ++it) {
      auto next = matVec(work, v);
      double norm = 0;
      for (double x : next) norm += x * x;
      norm = std::sqrt(norm);
      if (norm < 1e-14) break;
      for (double& x : next) x /= norm;
      v = next;
    }
    double lambda = 0;
    const auto mv = matVec(work, v);
    for (std::size_t i = 0; i < p; ++i) lambda += v[i] * mv[i];
    basis.push_back(v);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) work[i][j] -= lambda * v[i] * v[j];
  }

  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> rebuilt(p, 0.0);
    for (const auto& v : basis) {
      double score = 0;
      for (std::size_t j = 0; j < p; ++j) score += centered[i][j] * v[j];
      for (std::size_t j = 0; j < p; ++j) rebuilt[j] += score * v[j];
    }
    for (std::size_t j = 0; j < p; ++j)
      CHECK(rebuilt[j] == doctest::Approx(centered[i][j]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("explained variance is invariant to input order") {
  std::vector<std::vector<double>> rows{{0.2, -0.1, 0.5, 0.0, 0.1, 0.9, -0.3, 0.2, 0.4},
                                        {0.8, 0.3, -0.2, 0.1, 0.0, -0.5, 0.6, -0.1, 0.2},
                                        {-0.4, 0.6, 0.1, 0.9, -0.2, 0.3, 0.1, 0.5, -0.6},
                                        {0.0, -0.5, 0.9, -0.3, 0.4, 0.1, -0.2, 0.8, 0.0}};
  const auto forward = pcaProject(rows);
  std::reverse(rows.begin(), rows.end());
  const auto reversed = pcaProject(rows);
  CHECK(forward.explainedVarianceRatio[0] ==
        doctest::Approx(reversed.explainedVarianceRatio[0]).epsilon(1e-12));
  CHECK(forward.explainedVarianceRatio[1] ==
        doctest::Approx(reversed.explainedVarianceRatio[1]).epsilon(1e-12));
}

TEST_CASE("baseline loading validates schema and range") {
  mmtest::TempDir tmp;

  const std::string good = std::string(MMEVAL_TEST_DATA_DIR) + "/baseline_example.json";
  const BaselineProfile b = loadBaseline(good);
  CHECK(b.label == "baseline-example");
  CHECK(b.values[static_cast<std::size_t>(Attribute::Species)] == 0.55);

  writeFile(tmp.file("missing.json"), R"({"label":"x","values":{"species":0.1}})");
  CHECK_THROWS_WITH_AS(loadBaseline(tmp.file("missing.json")),
                       doctest::Contains("law"), UsageError);

  writeFile(tmp.file("range.json"), R"({"label":"x","values":{
    "species":1.7,"socialValue":0,"relationToAV":0,"nCharacters":0,
    "law":0,"intervention":0,"gender":0,"fitness":0,"age":0}})");
  CHECK_THROWS_AS(loadBaseline(tmp.file("range.json")), UsageError);
}

TEST_CASE("comparison report wires distances, pairwise matrix and PCA") {
  const auto p1 = vectorOf("m1", {0.9, 0.1, 0.3, 0.8, 0.4, 0.0, 0.2, -0.1, 0.5});
  const auto p2 = vectorOf("m2", {0.5, -0.2, 0.6, 0.6, 0.1, 0.1, 0.4, 0.0, 0.3});
  BaselineProfile base;
  base.label = "human";
  base.values = {0.6, 0.1, 0.2, 0.5, 0.35, 0.05, 0.1, 0.15, 0.45};

  const ComparisonReport r = buildComparisonReport({p1, p2}, base);
  REQUIRE(r.distanceToBaseline.size() == 2);
  CHECK(r.distanceToBaseline[0] ==
        doctest::Approx(euclideanDistance(p1.values, base.values)).epsilon(1e-12));
  CHECK(r.pairwise.size() == 3);
  CHECK(r.pairwise[0][0] == 0.0);
  CHECK(r.pairwise[0][1] == r.pairwise[1][0]);
  REQUIRE(r.pca.has_value());
  CHECK(r.pca->explainedVarianceRatio[0] >= r.pca->explainedVarianceRatio[1]);
  CHECK(r.pca->explainedVarianceRatio[0] + r.pca->explainedVarianceRatio[1] <= 1.0 + 1e-9);

  const auto j = comparisonReportToJson(r);
  CHECK(j.at("labels").size() == 3);
  CHECK(j.at("distanceToBaseline").at("m1").get<double>() == r.distanceToBaseline[0]);

  const std::string csv = distancesCsv(r);
  CHECK(csv.find("m1,") != std::string::npos);
  const std::string pca = pcaCsv(r);
  CHECK(pca.rfind("label,pc1,pc2\n", 0) == 0);

  CHECK(distancesSvg(r).find("<svg") == 0);
  CHECK(pcaSvg(r).find("PC1") != std::string::npos);
}

TEST_CASE("five profiles yield five coordinate pairs with ordered ratios") {
  std::vector<ProfileVector> profiles;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(-0.9, 0.9);
  for (int i = 0; i < 5; ++i) {
    std::array<double, 9> v{};
    for (double& x : v) x = dist(rng);
    profiles.push_back(vectorOf("m" + std::to_string(i), v));
  }
  const ComparisonReport r = buildComparisonReport(std::move(profiles), std::nullopt);
  REQUIRE(r.pca.has_value());
  CHECK(r.pca->coordinates.size() == 5);
  CHECK(r.pca->explainedVarianceRatio[0] >= r.pca->explainedVarianceRatio[1]);
  CHECK(r.pca->explainedVarianceRatio[1] >= 0.0);
}

TEST_CASE("two points skip PCA with a notice") {
  const auto p1 = vectorOf("m1", {0.1, 0, 0, 0, 0, 0, 0, 0, 0});
  const auto p2 = vectorOf("m2", {0.2, 0, 0, 0, 0, 0, 0, 0, 0});
  const ComparisonReport r = buildComparisonReport({p1, p2}, std::nullopt);
  CHECK_FALSE(r.pca.has_value());
  REQUIRE(r.pcaNotice.has_value());
  CHECK(comparisonReportToJson(r).at("pca").is_null());
}

TEST_CASE("profile vectors reject incomplete AMCE documents") {
  nlohmann::json doc{{"modelName", "m"},
                     {"attributes",
                      {{"species", {{"deltaP", 0.5}, {"se", 0.0}, {"n", 10}}},
                       {"gender", nullptr}}}};
  CHECK_THROWS_WITH_AS(profileVectorFromJson(doc), doctest::Contains("gender"), UsageError);
}

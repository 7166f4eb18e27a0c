#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmeval/stats.hpp"

namespace mm {

/// External reference profile (typically transcribed human preferences).
/// Ships as data, never as built-in numbers.
struct BaselineProfile {
  std::string label;
  std::array<double, kAttributeCount> values{};
  std::string provenance;
};

BaselineProfile loadBaseline(const std::filesystem::path& path);
BaselineProfile baselineFromJson(const nlohmann::json& j);

/// A model's nine-attribute preference vector, in attribute order.
struct ProfileVector {
  std::string label;
  std::array<double, kAttributeCount> values{};
};

/// Extracts the nine-vector from an AMCE profile JSON document. Absent
/// attributes are an error naming what is missing.
ProfileVector profileVectorFromJson(const nlohmann::json& j,
                                    const std::string& fallbackLabel = "");
ProfileVector loadProfileVector(const std::filesystem::path& path);

double euclideanDistance(std::span<const double> a, std::span<const double> b);

struct PcaProjection {
  std::vector<std::array<double, 2>> coordinates;   // one (pc1, pc2) per row
  std::array<double, 2> explainedVarianceRatio{0, 0};
  std::vector<std::array<double, 2>> loadings;      // one (pc1, pc2) per column
};

/// Column-centers the row matrix and projects onto the top-two principal
/// directions. Deterministic sign: each component's largest-magnitude
/// loading is positive. Identical rows yield zero coordinates and ratios.
/// Requires at least 3 rows of equal width >= 2.
PcaProjection pcaProject(const std::vector<std::vector<double>>& rows);

struct ComparisonReport {
  std::vector<ProfileVector> profiles;
  std::optional<BaselineProfile> baseline;
  std::vector<double> distanceToBaseline;        // aligned with profiles
  std::vector<std::vector<double>> pairwise;     // profiles then baseline
  std::optional<PcaProjection> pca;              // present when >= 3 points
  std::optional<std::string> pcaNotice;          // why PCA was skipped

  std::vector<std::string> pointLabels() const;  // profiles then baseline
};

ComparisonReport buildComparisonReport(std::vector<ProfileVector> profiles,
                                       std::optional<BaselineProfile> baseline);

nlohmann::json comparisonReportToJson(const ComparisonReport& r);
std::string distancesCsv(const ComparisonReport& r);
std::string pcaCsv(const ComparisonReport& r);

/// Static figures for the report: a distance bar chart and a PC1/PC2
/// scatter. Plain hand-written SVG.
std::string distancesSvg(const ComparisonReport& r);
std::string pcaSvg(const ComparisonReport& r);

}  // namespace mm

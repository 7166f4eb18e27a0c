#include "mmeval/compare.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mmeval/error.hpp"
#include "mmeval/util.hpp"

namespace mm {

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::array<double, kAttributeCount> valuesFromObject(const nlohmann::json& values,
                                                     bool nested) {
  std::array<double, kAttributeCount> out{};
  std::vector<std::string> missing;
  for (Attribute a : allAttributes()) {
    const std::string name(attributeName(a));
    const auto it = values.find(name);
    if (it == values.end() || it->is_null()) {
      missing.push_back(name);
      continue;
    }
    const double v = nested ? it->at("deltaP").get<double>() : it->get<double>();
    if (!std::isfinite(v) || v < -1.0 || v > 1.0)
      throw UsageError("attribute " + name + " out of range [-1, 1]: " + fmt(v));
    out[static_cast<std::size_t>(a)] = v;
  }
  if (!missing.empty()) {
    std::string msg = "profile incomplete; missing attributes:";
    for (const auto& m : missing) msg += " " + m;
    throw UsageError(msg);
  }
  return out;
}

}  // namespace

BaselineProfile baselineFromJson(const nlohmann::json& j) {
  BaselineProfile b;
  b.label = j.value("label", "human");
  b.provenance = j.value("provenance", "");
  if (!j.contains("values")) throw UsageError("baseline file must contain a values object");
  b.values = valuesFromObject(j.at("values"), /*nested=*/false);
  return b;
}

BaselineProfile loadBaseline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open baseline: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad baseline JSON " + path.string() + ": " + e.what());
  }
  return baselineFromJson(j);
}

ProfileVector profileVectorFromJson(const nlohmann::json& j, const std::string& fallbackLabel) {
  ProfileVector p;
  p.label = j.value("modelName", fallbackLabel);
  if (p.label.empty()) p.label = fallbackLabel;
  if (!j.contains("attributes")) throw UsageError("profile JSON lacks an attributes object");
  p.values = valuesFromObject(j.at("attributes"), /*nested=*/true);
  return p;
}

ProfileVector loadProfileVector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open profile: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad profile JSON " + path.string() + ": " + e.what());
  }
  return profileVectorFromJson(j, path.stem().string());
}

double euclideanDistance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw UsageError("cannot compare vectors of different lengths");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

PcaProjection pcaProject(const std::vector<std::vector<double>>& rows) {
  const std::size_t m = rows.size();
  if (m < 3) throw UsageError("PCA requires at least 3 profiles");
  const std::size_t p = rows.front().size();
  if (p < 2) throw UsageError("PCA requires at least 2 attributes");
  for (const auto& r : rows) {
    if (r.size() != p) throw UsageError("PCA rows must have equal width");
  }

  Eigen::MatrixXd x(m, p);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = rows[i][j];
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  const Eigen::MatrixXd gram = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

  // Eigenvalues come back ascending; the top two components are the last.
  const auto& evals = solver.eigenvalues();
  const auto& evecs = solver.eigenvectors();

  double total = 0.0;
  for (Eigen::Index i = 0; i < evals.size(); ++i) total += std::max(evals(i), 0.0);

  PcaProjection out;
  out.coordinates.assign(m, {0.0, 0.0});
  out.loadings.assign(p, {0.0, 0.0});

  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd v = evecs.col(static_cast<Eigen::Index>(p) - 1 - c);
    // Deterministic sign: make the largest-magnitude loading positive.
    Eigen::Index top = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
      if (std::abs(v(i)) > std::abs(v(top))) top = i;
    }
    if (v(top) < 0) v = -v;

    const Eigen::VectorXd coords = x * v;
    for (std::size_t i = 0; i < m; ++i) out.coordinates[i][c] = coords(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < p; ++j) out.loadings[j][c] = v(static_cast<Eigen::Index>(j));

    const double lambda = std::max(evals(static_cast<Eigen::Index>(p) - 1 - c), 0.0);
    out.explainedVarianceRatio[c] = total > 1e-300 ? lambda / total : 0.0;
  }

  if (total <= 1e-300) {
    // All profiles identical: centered data is zero.
    out.coordinates.assign(m, {0.0, 0.0});
    out.explainedVarianceRatio = {0.0, 0.0};
  }
  return out;
}

std::vector<std::string> ComparisonReport::pointLabels() const {
  std::vector<std::string> labels;
  for (const auto& p : profiles) labels.push_back(p.label);
  if (baseline) labels.push_back(baseline->label);
  return labels;
}

ComparisonReport buildComparisonReport(std::vector<ProfileVector> profiles,
                                       std::optional<BaselineProfile> baseline) {
  if (profiles.size() < 2 && !(baseline && profiles.size() >= 1))
    throw UsageError("compare requires at least two profiles (or one plus a baseline)");

  ComparisonReport r;
  r.profiles = std::move(profiles);
  r.baseline = std::move(baseline);

  if (r.baseline) {
    for (const auto& p : r.profiles)
      r.distanceToBaseline.push_back(euclideanDistance(p.values, r.baseline->values));
  }

  std::vector<const std::array<double, kAttributeCount>*> points;
  for (const auto& p : r.profiles) points.push_back(&p.values);
  if (r.baseline) points.push_back(&r.baseline->values);

  const std::size_t n = points.size();
  r.pairwise.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclideanDistance(*points[i], *points[j]);
      r.pairwise[i][j] = d;
      r.pairwise[j][i] = d;
    }

  if (n >= 3) {
    std::vector<std::vector<double>> rows;
    for (const auto* pt : points) rows.emplace_back(pt->begin(), pt->end());
    r.pca = pcaProject(rows);
  } else {
    r.pcaNotice = "PCA skipped: needs at least 3 profiles, got " + std::to_string(n);
  }
  return r;
}

nlohmann::json comparisonReportToJson(const ComparisonReport& r) {
  nlohmann::json j;
  j["labels"] = r.pointLabels();
  j["baseline"] = r.baseline ? nlohmann::json(r.baseline->label) : nlohmann::json(nullptr);
  if (r.baseline) {
    nlohmann::json distances;
    for (std::size_t i = 0; i < r.profiles.size(); ++i)
      distances[r.profiles[i].label] = r.distanceToBaseline[i];
    j["distanceToBaseline"] = std::move(distances);
    j["baselineProvenance"] = r.baseline->provenance;
  } else {
    j["distanceToBaseline"] = nullptr;
  }
  j["pairwiseDistances"] = r.pairwise;
  if (r.pca) {
    nlohmann::json attrs = nlohmann::json::array();
    for (Attribute a : allAttributes()) attrs.push_back(std::string(attributeName(a)));
    j["pca"] = {{"coordinates", r.pca->coordinates},
                {"explainedVarianceRatio", r.pca->explainedVarianceRatio},
                {"loadings", r.pca->loadings},
                {"attributes", std::move(attrs)}};
  } else {
    j["pca"] = nullptr;
    if (r.pcaNotice) j["pcaNotice"] = *r.pcaNotice;
  }
  return j;
}

std::string distancesCsv(const ComparisonReport& r) {
  std::string out;
  if (r.baseline) {
    out = "label,distanceTo_" + r.baseline->label + "\n";
    for (std::size_t i = 0; i < r.profiles.size(); ++i)
      out += r.profiles[i].label + "," + fmt(r.distanceToBaseline[i], "%.12g") + "\n";
  } else {
    const auto labels = r.pointLabels();
    out = "label";
    for (const auto& l : labels) out += "," + l;
    out += "\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
      out += labels[i];
      for (std::size_t k = 0; k < labels.size(); ++k)
        out += "," + fmt(r.pairwise[i][k], "%.12g");
      out += "\n";
    }
  }
  return out;
}

std::string pcaCsv(const ComparisonReport& r) {
  std::string out = "label,pc1,pc2\n";
  if (!r.pca) return out;
  const auto labels = r.pointLabels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += labels[i] + "," + fmt(r.pca->coordinates[i][0], "%.12g") + "," +
           fmt(r.pca->coordinates[i][1], "%.12g") + "\n";
  }
  return out;
}

std::string distancesSvg(const ComparisonReport& r) {
  const int width = 640;
  const int barHeight = 26;
  const int gap = 10;
  const int left = 150;
  const std::size_t n = r.profiles.size();
  const int height = 60 + static_cast<int>(n) * (barHeight + gap);

  double maxD = 1e-12;
  for (double d : r.distanceToBaseline) maxD = std::max(maxD, d);

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "' font-family='sans-serif' font-size='13'>\n";
  const std::string title =
      r.baseline ? "Euclidean distance to " + r.baseline->label : "Pairwise distance";
  svg << "<text x='20' y='26' font-size='16'>" << title << "</text>\n";
  for (std::size_t i = 0; i < n; ++i) {
    const int y = 50 + static_cast<int>(i) * (barHeight + gap);
    const double d = r.baseline ? r.distanceToBaseline[i] : 0.0;
    const double w = (width - left - 80) * (d / maxD);
    svg << "<text x='" << left - 8 << "' y='" << y + barHeight - 8
        << "' text-anchor='end'>" << r.profiles[i].label << "</text>\n";
    svg << "<rect x='" << left << "' y='" << y << "' width='" << fmt(w, "%.2f") << "' height='"
        << barHeight << "' fill='#4878a8'/>\n";
    svg << "<text x='" << left + w + 6 << "' y='" << y + barHeight - 8 << "'>"
        << fmt(d, "%.3f") << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string pcaSvg(const ComparisonReport& r) {
  const int width = 640, height = 480, margin = 60;
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "' font-family='sans-serif' font-size='13'>\n";
  if (!r.pca) {
    svg << "<text x='20' y='30'>PCA unavailable</text>\n</svg>\n";
    return svg.str();
  }

  double maxAbs = 1e-12;
  for (const auto& c : r.pca->coordinates)
    maxAbs = std::max({maxAbs, std::abs(c[0]), std::abs(c[1])});
  const double scale = (std::min(width, height) / 2.0 - margin) / maxAbs;
  const double cx = width / 2.0, cy = height / 2.0;

  svg << "<line x1='" << margin << "' y1='" << cy << "' x2='" << width - margin << "' y2='" << cy
      << "' stroke='#bbb'/>\n";
  svg << "<line x1='" << cx << "' y1='" << margin << "' x2='" << cx << "' y2='" << height - margin
      << "' stroke='#bbb'/>\n";
  svg << "<text x='" << width - margin << "' y='" << cy - 8 << "' text-anchor='end'>PC1 ("
      << fmt(100 * r.pca->explainedVarianceRatio[0], "%.1f") << "%)</text>\n";
  svg << "<text x='" << cx + 8 << "' y='" << margin + 4 << "'>PC2 ("
      << fmt(100 * r.pca->explainedVarianceRatio[1], "%.1f") << "%)</text>\n";

  const auto labels = r.pointLabels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double x = cx + r.pca->coordinates[i][0] * scale;
    const double y = cy - r.pca->coordinates[i][1] * scale;
    const bool isBaseline = r.baseline && i + 1 == labels.size();
    svg << "<circle cx='" << fmt(x, "%.2f") << "' cy='" << fmt(y, "%.2f")
        << "' r='6' fill='" << (isBaseline ? "#c0392b" : "#4878a8") << "'/>\n";
    svg << "<text x='" << fmt(x + 9, "%.2f") << "' y='" << fmt(y + 4, "%.2f") << "'>"
        << labels[i] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace mm

#include "mmeval/stats.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "mmeval/error.hpp"

namespace mm {

namespace {

constexpr std::string_view kAttributeNames[kAttributeCount] = {
    "species", "socialValue", "relationToAV", "nCharacters", "law",
    "intervention", "gender", "fitness", "age"};

int sign(int v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

void setCode(ProfileRow& row, Attribute a, int value) {
  row.codes[static_cast<std::size_t>(a)] = static_cast<int8_t>(value);
}

/// One observation of the restricted per-attribute regression.
struct Obs {
  const std::string* cluster;
  int d;  // 1 on the +1-oriented side, 0 on the -1 side
  int y;
};

std::vector<Obs> restrict(std::span<const ProfileRow> rows, Attribute a) {
  std::vector<Obs> obs;
  for (const ProfileRow& r : rows) {
    const int8_t c = r.code(a);
    if (c == 0) continue;
    obs.push_back({&r.scenarioId, c > 0 ? 1 : 0, r.spared});
  }
  return obs;
}

uint64_t countClusters(std::span<const Obs> obs) {
  std::unordered_map<std::string_view, bool> seen;
  seen.reserve(obs.size());
  for (const Obs& o : obs) seen.emplace(*o.cluster, true);
  return seen.size();
}

/// OLS of y on (1, d) with a cluster-robust sandwich variance. All design
/// sums are small integers, so the coefficient is computed exactly up to
/// the final division; flipping every y to 1-y negates it bit-for-bit.
std::optional<AmceEstimate> fitLinearProbability(std::span<const Obs> obs,
                                                 std::string* diagnostic) {
  if (obs.empty()) return std::nullopt;
  const double N = static_cast<double>(obs.size());
  double Sd = 0, Sy = 0, Sdy = 0;
  for (const Obs& o : obs) {
    Sd += o.d;
    Sy += o.y;
    Sdy += o.d * o.y;
  }
  if (Sd == 0 || Sd == N) {
    if (diagnostic) *diagnostic = "only one orientation observed";
    return std::nullopt;
  }

  const double den = N * Sd - Sd * Sd;  // = N * Sdd - Sd^2 for a 0/1 regressor
  const double num = N * Sdy - Sd * Sy;
  const double slope = num / den;
  const double intercept = (Sy - slope * Sd) / N;

  // Cluster scores, accumulated in first-appearance order so the sums are
  // reproducible for a given row order.
  std::unordered_map<std::string_view, std::size_t> index;
  std::vector<double> g0, g1;
  index.reserve(obs.size());
  for (const Obs& o : obs) {
    auto [it, inserted] = index.emplace(*o.cluster, g0.size());
    if (inserted) {
      g0.push_back(0.0);
      g1.push_back(0.0);
    }
    const double e = o.y - intercept - slope * o.d;
    g0[it->second] += e;
    g1[it->second] += e * o.d;
  }
  double m00 = 0, m01 = 0, m11 = 0;
  for (std::size_t i = 0; i < g0.size(); ++i) {
    m00 += g0[i] * g0[i];
    m01 += g0[i] * g1[i];
    m11 += g1[i] * g1[i];
  }
  // Slope row of the sandwich A^{-1} M A^{-1}, A = [[N, Sd], [Sd, Sd]].
  const double var = (Sd * Sd * m00 - 2.0 * Sd * N * m01 + N * N * m11) / (den * den);

  AmceEstimate est;
  est.deltaP = slope;
  est.se = std::sqrt(std::max(var, 0.0));
  est.n = static_cast<uint64_t>(g0.size());
  return est;
}

std::optional<AmceEstimate> proportionDifference(std::span<const Obs> obs,
                                                 std::string* diagnostic) {
  if (obs.empty()) return std::nullopt;
  double nPos = 0, nNeg = 0, cPos = 0, cNeg = 0;
  for (const Obs& o : obs) {
    if (o.d == 1) {
      nPos += 1;
      cPos += o.y;
    } else {
      nNeg += 1;
      cNeg += o.y;
    }
  }
  if (nPos == 0 || nNeg == 0) {
    if (diagnostic) *diagnostic = "only one orientation observed";
    return std::nullopt;
  }
  // Single division keeps the flip antisymmetry exact.
  const double num = cPos * nNeg - cNeg * nPos;
  const double deltaP = num / (nPos * nNeg);
  const double pPos = cPos / nPos;
  const double pNeg = cNeg / nNeg;

  AmceEstimate est;
  est.deltaP = deltaP;
  est.se = std::sqrt(pPos * (1 - pPos) / nPos + pNeg * (1 - pNeg) / nNeg);
  est.n = countClusters(obs);
  return est;
}

using Estimator = std::optional<AmceEstimate> (*)(std::span<const Obs>, std::string*);

AmceProfile runEstimator(std::span<const ProfileRow> rows, Estimator fit) {
  AmceProfile profile;
  for (Attribute a : allAttributes()) {
    std::string diagnostic;
    auto obs = restrict(rows, a);
    auto est = fit(obs, &diagnostic);
    profile.attributes[static_cast<std::size_t>(a)] = est;
    if (!est && !diagnostic.empty()) {
      profile.diagnostics.push_back(std::string(attributeName(a)) + ": " + diagnostic);
    }
  }

  // Per-increment effects: partition the size-contrast rows by k.
  for (int k = 1; k <= 4; ++k) {
    std::vector<Obs> obs;
    for (const ProfileRow& r : rows) {
      const int8_t c = r.code(Attribute::NCharacters);
      if (c == 0 || r.k != k) continue;
      obs.push_back({&r.scenarioId, c > 0 ? 1 : 0, r.spared});
    }
    profile.perIncrement[k - 1] = fit(obs, nullptr);
  }

  double wSum = 0, wDelta = 0, wVar = 0;
  double uDelta = 0, uVar = 0;
  int present = 0;
  uint64_t nTotal = 0;
  for (const auto& est : profile.perIncrement) {
    if (!est) continue;
    const double w = static_cast<double>(est->n);
    wSum += w;
    wDelta += w * est->deltaP;
    uDelta += est->deltaP;
    uVar += est->se * est->se;
    present++;
    nTotal += est->n;
  }
  if (present > 0 && wSum > 0) {
    for (const auto& est : profile.perIncrement) {
      if (!est) continue;
      const double w = static_cast<double>(est->n) / wSum;
      wVar += w * w * est->se * est->se;
    }
    profile.meanCharactersEffect =
        AmceEstimate{wDelta / wSum, std::sqrt(wVar), nTotal};
    profile.meanCharactersEffectUnweighted =
        AmceEstimate{uDelta / present, std::sqrt(uVar) / present, nTotal};
  }
  return profile;
}

nlohmann::json estimateToJson(const std::optional<AmceEstimate>& est) {
  if (!est) return nullptr;
  return {{"deltaP", est->deltaP}, {"se", est->se}, {"n", est->n}};
}

std::optional<AmceEstimate> estimateFromJson(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return AmceEstimate{j.at("deltaP").get<double>(), j.at("se").get<double>(),
                      j.at("n").get<uint64_t>()};
}

void appendCsvRow(std::string& out, std::string_view label,
                  const std::optional<AmceEstimate>& est) {
  out += label;
  if (est) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), ",%.12g,%.12g,%llu", est->deltaP, est->se,
                  static_cast<unsigned long long>(est->n));
    out += buf;
  } else {
    out += ",,,0";
  }
  out += '\n';
}

}  // namespace

std::string_view attributeName(Attribute a) {
  return kAttributeNames[static_cast<std::size_t>(a)];
}

std::optional<Attribute> attributeFromName(std::string_view name) {
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    if (kAttributeNames[i] == name) return static_cast<Attribute>(i);
  }
  return std::nullopt;
}

const std::array<Attribute, kAttributeCount>& allAttributes() {
  static const std::array<Attribute, kAttributeCount> attrs = [] {
    std::array<Attribute, kAttributeCount> out{};
    for (std::size_t i = 0; i < kAttributeCount; ++i) out[i] = static_cast<Attribute>(i);
    return out;
  }();
  return attrs;
}

std::vector<ProfileRow> codeProfiles(std::span<const Scenario> deck,
                                     std::span<const ChoiceRecord> records) {
  std::unordered_map<std::string_view, const Scenario*> byId;
  byId.reserve(deck.size());
  for (const Scenario& s : deck) byId.emplace(s.id, &s);

  std::vector<ProfileRow> rows;
  rows.reserve(records.size() * 2);

  for (const ChoiceRecord& rec : records) {
    if (rec.parsed == Classification::Invalid)
      throw UsageError("codeProfiles received an invalid record for scenario " + rec.scenarioId);
    auto it = byId.find(rec.scenarioId);
    if (it == byId.end())
      throw UsageError("record references unknown scenario id: " + rec.scenarioId);
    const Scenario& s = *it->second;

    // Case 1 = continue straight = the stay-victim group dies.
    const GroupTag sparedTag =
        rec.parsed == Classification::Case1 ? otherTag(s.stayVictim) : s.stayVictim;

    const GroupScores scoresA = groupScores(s.groupA);
    const GroupScores scoresB = groupScores(s.groupB);
    const bool passengerFraming = s.passengerFraming();
    const bool lawContrast =
        (s.groupA.legality == Legality::Lawful && s.groupB.legality == Legality::Unlawful) ||
        (s.groupA.legality == Legality::Unlawful && s.groupB.legality == Legality::Lawful);
    const int kDiff = std::abs(scoresA.size - scoresB.size);

    for (GroupTag tag : {GroupTag::A, GroupTag::B}) {
      const OutcomeGroup& g = s.group(tag);
      const GroupScores& mine = tag == GroupTag::A ? scoresA : scoresB;
      const GroupScores& theirs = tag == GroupTag::A ? scoresB : scoresA;

      ProfileRow row;
      row.scenarioId = rec.scenarioId;
      row.group = tag;
      row.spared = tag == sparedTag ? 1 : 0;

      setCode(row, Attribute::Intervention, tag == s.stayVictim ? -1 : 1);
      if (passengerFraming)
        setCode(row, Attribute::RelationToAV, g.role == GroupRole::Pedestrians ? 1 : -1);
      if (lawContrast)
        setCode(row, Attribute::Law, g.legality == Legality::Lawful ? 1 : -1);

      int focalCode = 0;
      switch (s.focalDimension) {
        case FocalDimension::Species: focalCode = sign(mine.species - theirs.species); break;
        case FocalDimension::SocialValue: focalCode = sign(mine.social - theirs.social); break;
        case FocalDimension::Gender: focalCode = sign(mine.gender - theirs.gender); break;
        case FocalDimension::Age: focalCode = sign(mine.age - theirs.age); break;
        case FocalDimension::Fitness: focalCode = sign(mine.fitness - theirs.fitness); break;
        case FocalDimension::Utilitarian: focalCode = sign(mine.size - theirs.size); break;
      }
      if (focalCode == 0)
        throw UsageError("scenario " + s.id + " does not contrast its focal dimension");

      if (s.focalDimension == FocalDimension::Utilitarian) {
        setCode(row, Attribute::NCharacters, focalCode);
        row.k = kDiff;
      } else {
        const Attribute focalAttr = [&] {
          switch (s.focalDimension) {
            case FocalDimension::Species: return Attribute::Species;
            case FocalDimension::SocialValue: return Attribute::SocialValue;
            case FocalDimension::Gender: return Attribute::Gender;
            case FocalDimension::Age: return Attribute::Age;
            default: return Attribute::Fitness;
          }
        }();
        setCode(row, focalAttr, focalCode);
      }

      rows.push_back(std::move(row));
    }
  }
  return rows;
}

AmceProfile estimateAmce(std::span<const ProfileRow> rows) {
  return runEstimator(rows, &fitLinearProbability);
}

AmceProfile amceOracle(std::span<const ProfileRow> rows) {
  return runEstimator(rows, &proportionDifference);
}

nlohmann::json amceProfileToJson(const AmceProfile& p) {
  nlohmann::json attrs;
  for (Attribute a : allAttributes()) {
    attrs[std::string(attributeName(a))] = estimateToJson(p.at(a));
  }
  nlohmann::json increments;
  for (int k = 1; k <= 4; ++k) {
    increments["k" + std::to_string(k)] = estimateToJson(p.perIncrement[k - 1]);
  }
  nlohmann::json j{{"modelName", p.modelName},
                   {"attributes", std::move(attrs)},
                   {"perIncrement", std::move(increments)},
                   {"meanCharactersEffect", estimateToJson(p.meanCharactersEffect)},
                   {"meanCharactersEffectUnweighted",
                    estimateToJson(p.meanCharactersEffectUnweighted)}};
  if (!p.diagnostics.empty()) j["diagnostics"] = p.diagnostics;
  return j;
}

AmceProfile amceProfileFromJson(const nlohmann::json& j) {
  AmceProfile p;
  p.modelName = j.value("modelName", "");
  const auto& attrs = j.at("attributes");
  for (Attribute a : allAttributes()) {
    const std::string name(attributeName(a));
    if (attrs.contains(name))
      p.attributes[static_cast<std::size_t>(a)] = estimateFromJson(attrs.at(name));
  }
  if (j.contains("perIncrement")) {
    for (int k = 1; k <= 4; ++k) {
      const std::string key = "k" + std::to_string(k);
      if (j.at("perIncrement").contains(key))
        p.perIncrement[k - 1] = estimateFromJson(j.at("perIncrement").at(key));
    }
  }
  if (j.contains("meanCharactersEffect"))
    p.meanCharactersEffect = estimateFromJson(j.at("meanCharactersEffect"));
  if (j.contains("meanCharactersEffectUnweighted"))
    p.meanCharactersEffectUnweighted = estimateFromJson(j.at("meanCharactersEffectUnweighted"));
  if (j.contains("diagnostics")) p.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  return p;
}

std::string amceProfileToCsv(const AmceProfile& p) {
  std::string out = "attribute,deltaP,se,n\n";
  for (Attribute a : allAttributes()) appendCsvRow(out, attributeName(a), p.at(a));
  for (int k = 1; k <= 4; ++k)
    appendCsvRow(out, "k" + std::to_string(k), p.perIncrement[k - 1]);
  appendCsvRow(out, "mean", p.meanCharactersEffect);
  return out;
}

}  // namespace mm

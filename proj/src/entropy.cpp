#include "are/entropy.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "are/errors.hpp"
#include "are/text.hpp"

namespace are::entropy {

SupportSet SupportSet::of(const std::vector<std::string>& items, SupportKind kind) {
  return SupportSet{std::set<std::string>(items.begin(), items.end()), kind};
}

bool TokenDistribution::normalized() const {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p > 0.0 && p <= 1.0)) return false;
    sum += p;
  }
  return !probs.empty() && std::abs(sum - 1.0) <= kNormTolerance;
}

double entropy(const std::vector<double>& p) {
  if (p.empty()) throw NotNormalized("empty distribution");
  double sum = 0.0;
  double h = 0.0;
  for (double x : p) {
    if (!(x >= 0.0 && x <= 1.0)) throw NotNormalized("probability outside [0, 1]");
    sum += x;
    if (x > 0.0) h -= x * std::log(x);
  }
  if (std::abs(sum - 1.0) > kNormTolerance) throw NotNormalized("probabilities sum to " + std::to_string(sum));
  return std::max(h, 0.0);
}

double entropy(const TokenDistribution& d) { return entropy(d.probs); }

double sequence_probability(const std::vector<double>& token_probs) {
  double out = 1.0;
  for (double p : token_probs) {
    if (!(p > 0.0 && p <= 1.0)) throw PreconditionError("conditional probability outside (0, 1]");
    out *= p;
  }
  return out;
}

double support_entropy_bound(const SupportSet& s) {
  if (s.items.empty()) throw EmptySet();
  return std::log(static_cast<double>(s.items.size()));
}

GapResult hypothesis_gap(const SupportSet& af, const SupportSet& q) {
  if (af.kind != SupportKind::AtomicFacts || q.kind != SupportKind::SubQuestions) {
    throw PreconditionError("hypothesis_gap expects (atomic facts, sub-questions)");
  }
  GapResult r;
  r.gap = support_entropy_bound(q) - support_entropy_bound(af);
  r.holds = r.gap >= std::log(2.0) - kNormTolerance;
  r.premise = q.size() >= 2 * af.size();
  return r;
}

std::vector<double> marginal_rows(const Joint& p) {
  std::vector<double> out;
  for (const auto& row : p) out.push_back(std::accumulate(row.begin(), row.end(), 0.0));
  return out;
}

double joint_entropy(const Joint& p) {
  std::vector<double> flat;
  for (const auto& row : p) flat.insert(flat.end(), row.begin(), row.end());
  return entropy(flat);
}

double conditional_entropy(const Joint& p) {
  joint_entropy(p);  // validates normalization
  double h = 0.0;
  for (const auto& row : p) {
    const double pa = std::accumulate(row.begin(), row.end(), 0.0);
    if (pa <= 0.0) continue;
    std::vector<double> cond;
    for (double x : row) cond.push_back(x / pa);
    // Renormalize against rounding so the row passes the tolerance check.
    const double s = std::accumulate(cond.begin(), cond.end(), 0.0);
    for (double& x : cond) x /= s;
    h += pa * entropy(cond);
  }
  return h;
}

std::vector<GapSample> parse_gap_samples(const std::string& content) {
  auto from_obj = [](const Json& j, std::size_t n) {
    if (!j.is_object()) throw InputError("gap sample " + std::to_string(n) + " is not an object");
    GapSample s;
    s.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump())
                            : std::to_string(n + 1);
    try {
      s.atomic_facts = j.at("atomic_facts").get<std::vector<std::string>>();
      s.sub_questions = j.at("sub_questions").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError("gap sample " + s.id + ": " + e.what());
    }
    return s;
  };

  std::vector<GapSample> out;
  const auto trimmed = text::trim(content);
  if (trimmed.empty()) return out;
  if (trimmed.front() == '[') {
    Json arr;
    try {
      arr = Json::parse(trimmed);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(std::string("gap samples: ") + e.what());
    }
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(from_obj(arr[i], i));
    return out;
  }
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError("gap samples line " + std::to_string(out.size() + 1) + ": " + e.what());
    }
    out.push_back(from_obj(j, out.size()));
  }
  return out;
}

std::string gap_report_csv(const std::vector<GapSample>& samples) {
  std::ostringstream out;
  out << "id,n_af,n_q,h_af,h_q,gap,holds,premise\n";
  double gap_sum = 0.0;
  int holds = 0;
  int premise = 0;
  char buf[160];
  for (const auto& s : samples) {
    const auto af = SupportSet::of(s.atomic_facts, SupportKind::AtomicFacts);
    const auto q = SupportSet::of(s.sub_questions, SupportKind::SubQuestions);
    const auto g = hypothesis_gap(af, q);
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.6f,%.6f,%.6f,%s,%s", af.size(), q.size(), support_entropy_bound(af),
                  support_entropy_bound(q), g.gap, g.holds ? "true" : "false", g.premise ? "true" : "false");
    out << s.id << ',' << buf << '\n';
    gap_sum += g.gap;
    holds += g.holds ? 1 : 0;
    premise += g.premise ? 1 : 0;
  }
  const double mean = samples.empty() ? 0.0 : gap_sum / static_cast<double>(samples.size());
  std::snprintf(buf, sizeof buf, "summary,%zu,,,,%.6f,%d,%d", samples.size(), mean, holds, premise);
  out << buf << '\n';
  return out.str();
}

}  // namespace are::entropy

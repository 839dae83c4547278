#include "are/metrics.hpp"

#include <cstdio>
#include <map>

#include "are/errors.hpp"
#include "are/text.hpp"

namespace are::metrics {

std::vector<std::string> char_tokens(std::string_view s) {
  const auto norm = text::normalize_ws(s);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < norm.size();) {
    const auto c = static_cast<unsigned char>(norm[i]);
    std::size_t len = 1;
    if (c >= 0xF0) {
      len = 4;
    } else if (c >= 0xE0) {
      len = 3;
    } else if (c >= 0xC0) {
      len = 2;
    }
    len = std::min(len, norm.size() - i);
    out.emplace_back(norm.substr(i, len));
    i += len;
  }
  return out;
}

double preservation(const LongFormAnswer& x, const LongFormAnswer& x_rev, Granularity g) {
  const auto a = g == Granularity::Word ? x.tokens() : char_tokens(x.text());
  const auto b = g == Granularity::Word ? x_rev.tokens() : char_tokens(x_rev.text());
  if (a.empty()) throw PreconditionError("preservation: original answer is empty");
  const double lev = static_cast<double>(edit_distance(a, b));
  return std::max(1.0 - lev / static_cast<double>(a.size()), 0.0);
}

std::string premise_of(const EvidenceSet& e) { return text::join(e.snippets, " "); }

double attr_r(const std::vector<std::string>& clause_texts, const std::vector<EvidenceSet>& report,
              NliProvider& scorer) {
  if (report.empty() || clause_texts.empty()) return 0.0;
  std::vector<std::string> premises;
  for (const auto& e : report) {
    if (!e.snippets.empty()) premises.push_back(premise_of(e));
  }
  double total = 0.0;
  for (const auto& clause : clause_texts) {
    double best = 0.0;
    for (const auto& p : premises) best = std::max(best, scorer.nli(p, clause).entail_prob);
    total += std::clamp(best, 0.0, 1.0);
  }
  return total / static_cast<double>(clause_texts.size());
}

double attr_r(const AnswerDecomposition& d, const std::vector<EvidenceSet>& report, NliProvider& scorer) {
  std::vector<std::string> texts;
  for (const auto& c : d.clauses) texts.push_back(c.text);
  return attr_r(texts, report, scorer);
}

namespace {

const EvidenceSet* set_for(const std::vector<EvidenceSet>& report, int clause_index) {
  for (const auto& e : report) {
    if (e.clause_index == clause_index) return &e;
  }
  return nullptr;
}

bool literal_valid(const MolecularClause& c, const std::vector<EvidenceSet>& report, NliProvider& scorer) {
  const auto* e = set_for(report, c.index);
  if (e == nullptr) throw PreconditionError("attr_p: no evidence set for clause " + std::to_string(c.index));
  if (e->snippets.empty()) return false;
  return scorer.nli(premise_of(*e), c.text).binary_entail;
}

}  // namespace

double attr_p(const AnswerDecomposition& d, const std::vector<EvidenceSet>& report, NliProvider& scorer) {
  if (report.empty() || d.clauses.empty()) return 0.0;
  int valid = 0;
  for (const auto& c : d.clauses) valid += literal_valid(c, report, scorer) ? 1 : 0;
  return static_cast<double>(valid) / static_cast<double>(d.clauses.size());
}

double attr_p_strict(const AnswerDecomposition& d, const std::vector<EvidenceSet>& report,
                     const std::vector<VerificationTrail>& trails, NliProvider& scorer) {
  if (report.empty() || d.clauses.empty()) return 0.0;
  std::map<FactRef, const VerificationTrail*> by_ref;
  for (const auto& t : trails) by_ref[t.fact] = &t;
  int valid = 0;
  for (const auto& c : d.clauses) {
    bool ok = literal_valid(c, report, scorer);
    for (const auto& f : c.atomic_facts) {
      if (!ok) break;
      const auto it = by_ref.find({f.clause_index, f.fact_index});
      if (it == by_ref.end() || !it->second->final_evidence) {
        ok = false;
        break;
      }
      ok = scorer.nli(it->second->final_evidence->snippet, f.text).binary_entail;
    }
    valid += ok ? 1 : 0;
  }
  return static_cast<double>(valid) / static_cast<double>(d.clauses.size());
}

double f1(double a, double b) {
  if (a + b == 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

AnswerDecomposition revised_decomposition(const AttributionResult& r) {
  AnswerDecomposition d = r.decomposition;
  d.answer = r.revised;
  for (std::size_t i = 0; i < d.clauses.size() && i < r.revised_clauses.size(); ++i) {
    d.clauses[i].text = r.revised_clauses[i];
  }
  return d;
}

MetricsReport evaluate(const AttributionResult& r, NliProvider& scorer, const EvaluateOptions& opt) {
  MetricsReport m;
  const auto d = revised_decomposition(r);
  m.attr_r = attr_r(d, r.report, scorer);
  m.attr_p = opt.attr_p_mode == AttrPMode::Strict ? attr_p_strict(d, r.report, r.trails, scorer)
                                                  : attr_p(d, r.report, scorer);
  if (r.revision_ran) {
    m.pres = preservation(r.original, r.revised, opt.granularity);
    m.f1_rp = f1(m.attr_r, *m.pres);
    m.f1_pp = f1(m.attr_p, *m.pres);
  }
  return m;
}

std::string format_metric(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  return '"' + text::replace_all(s, "\"", "\"\"") + '"';
}

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "id,attr_r,attr_p,pres,f1_rp,f1_pp\n";
  struct Mean {
    double sum = 0.0;
    int n = 0;
    void add(const std::optional<double>& v) {
      if (v) {
        sum += *v;
        ++n;
      }
    }
    std::optional<double> get() const { return n > 0 ? std::optional<double>(sum / n) : std::nullopt; }
  };
  Mean ar, ap, pr, frp, fpp;
  for (const auto& row : rows) {
    const auto& m = row.report;
    out << csv_field(row.id) << ',' << format_metric(m.attr_r) << ',' << format_metric(m.attr_p) << ','
        << format_metric(m.pres) << ',' << format_metric(m.f1_rp) << ',' << format_metric(m.f1_pp) << '\n';
    ar.add(m.attr_r);
    ap.add(m.attr_p);
    pr.add(m.pres);
    frp.add(m.f1_rp);
    fpp.add(m.f1_pp);
  }
  out << "mean," << format_metric(ar.get()) << ',' << format_metric(ap.get()) << ',' << format_metric(pr.get())
      << ',' << format_metric(frp.get()) << ',' << format_metric(fpp.get()) << '\n';
}

}  // namespace are::metrics

#pragma once

#include <set>
#include <string>
#include <vector>

#include "are/domain.hpp"

// Entropy helpers for comparing the support sets of atomic facts and
// sub-questions. Natural logarithms throughout.
namespace are::entropy {

inline constexpr double kNormTolerance = 1e-9;

enum class SupportKind { AtomicFacts, SubQuestions };

/// Distinct generations a model can emit for one answer.
struct SupportSet {
  std::set<std::string> items;
  SupportKind kind = SupportKind::AtomicFacts;

  /// Duplicates collapse.
  static SupportSet of(const std::vector<std::string>& items, SupportKind kind);
  std::size_t size() const { return items.size(); }
};

/// Probabilities of a discrete distribution; each in (0, 1].
struct TokenDistribution {
  std::vector<double> probs;

  /// Entries in (0, 1] and sum within tolerance of 1.
  bool normalized() const;
};

/// -sum p ln p. Zero entries contribute nothing. Throws NotNormalized when an
/// entry is outside [0, 1] or the sum is not 1 within 1e-9.
double entropy(const std::vector<double>& p);
double entropy(const TokenDistribution& d);

/// Product of the conditionals. Throws PreconditionError for entries outside (0, 1].
double sequence_probability(const std::vector<double>& token_probs);

/// ln |S|. Throws EmptySet.
double support_entropy_bound(const SupportSet& s);

struct GapResult {
  double gap = 0.0;      ///< ln|S_Q| - ln|S_AF|
  bool holds = false;    ///< gap >= ln 2 (within 1e-9)
  bool premise = false;  ///< |S_Q| >= 2 |S_AF|
};

/// Throws EmptySet for an empty set and PreconditionError for mismatched kinds.
GapResult hypothesis_gap(const SupportSet& af, const SupportSet& q);

/// Joint table P(a, b), rows indexed by a. Must be normalized.
using Joint = std::vector<std::vector<double>>;

double joint_entropy(const Joint& p);

/// H(B | A) = sum_a P(a) H(B | A = a).
double conditional_entropy(const Joint& p);

/// Marginal of A (row sums).
std::vector<double> marginal_rows(const Joint& p);

struct GapSample {
  std::string id;
  std::vector<std::string> atomic_facts;
  std::vector<std::string> sub_questions;
};

/// Reads {id?, atomic_facts:[...], sub_questions:[...]} objects from either a
/// JSON array or JSON lines. Throws InputError on malformed input.
std::vector<GapSample> parse_gap_samples(const std::string& content);

/// CSV id,n_af,n_q,h_af,h_q,gap,holds,premise plus a summary row with the
/// mean gap and the count of samples where the gap holds.
std::string gap_report_csv(const std::vector<GapSample>& samples);

}  // namespace are::entropy

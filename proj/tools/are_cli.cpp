// Command-line front end. Exit codes: 0 success (warnings allowed),
// 1 configuration error, 2 fatal provider error, 3 input error.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "are/config.hpp"
#include "are/dataset.hpp"
#include "are/decomposition.hpp"
#include "are/entropy.hpp"
#include "are/errors.hpp"
#include "are/fixtures.hpp"
#include "are/http.hpp"
#include "are/llm.hpp"
#include "are/metrics.hpp"
#include "are/pipeline.hpp"
#include "are/text.hpp"

namespace {

using namespace are;

enum Exit { kOk = 0, kConfig = 1, kProvider = 2, kInput = 3 };

struct Common {
  std::string config_path;
  std::string mock_dir;
  std::optional<unsigned long long> seed;
};

Config load_config(const Common& c) {
  Config cfg = c.config_path.empty() ? Config{} : Config::load(c.config_path);
  if (!c.mock_dir.empty()) cfg.mock_dir = c.mock_dir;
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

ProviderBundle providers_for(const Config& cfg) {
  if (!cfg.mock_dir.empty()) return fixtures::load_fixture_suite(cfg.mock_dir).bundle();
  return http::make_live_bundle(cfg, Secrets::from_env());
}

std::unique_ptr<retrieval::SearchCache> cache_for(const Config& cfg, bool disabled) {
  if (disabled || cfg.cache_path.empty()) return nullptr;
  return std::make_unique<retrieval::SearchCache>(cfg.cache_path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to `path`, or stdout when it is empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  fn(out);
}

void report_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  if (!warnings.empty()) std::cerr << warnings.size() << " warning(s)\n";
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "key=value configuration file");
  sub->add_option("--mock", c.mock_dir, "replay a fixture suite instead of live providers");
  sub->add_option("--seed", c.seed, "random seed");
}

Question question_from(const std::string& text, const std::string& id) {
  if (text::trim(text).empty()) throw InputError("question text is empty");
  return Question{id, text, std::nullopt};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Atomic-fact retrieval and editing for long-form answers"};
  app.require_subcommand(1);
  Common common;
  std::function<void()> action;

  // answer
  std::string q_text;
  std::string q_id = "q1";
  bool no_cache = false;
  auto* answer = app.add_subcommand("answer", "generate a long-form answer");
  add_common(answer, common);
  answer->add_option("--question,-q", q_text, "question text")->required();
  answer->callback([&] {
    action = [&] {
      const auto cfg = load_config(common);
      const auto p = providers_for(cfg);
      LlmClient llm(*p.chat, nullptr, cfg.chat_max_tokens, cfg.chat_temperature);
      std::cout << decomposition::generate_answer(question_from(q_text, q_id), llm).text() << '\n';
    };
  });

  // decompose
  std::string answer_text;
  auto* decompose = app.add_subcommand("decompose", "split an answer into clauses and atomic facts");
  add_common(decompose, common);
  decompose->add_option("--answer,-a", answer_text, "answer text")->required();
  decompose->callback([&] {
    action = [&] {
      const auto cfg = load_config(common);
      const auto p = providers_for(cfg);
      LlmClient llm(*p.chat, nullptr, cfg.chat_max_tokens, cfg.chat_temperature);
      std::vector<std::string> warnings;
      const auto d = decomposition::decompose(LongFormAnswer(answer_text), llm, &warnings);
      std::cout << decomposition::serialize_decomposition_json(d) << '\n';
      report_warnings(warnings);
    };
  });

  // run
  auto* run = app.add_subcommand("run", "run the full pipeline for one question");
  add_common(run, common);
  run->add_option("--question,-q", q_text, "question text")->required();
  run->add_option("--id", q_id, "question id");
  run->add_flag("--no-cache", no_cache, "ignore cache.path for this run");
  run->callback([&] {
    action = [&] {
      const auto cfg = load_config(common);
      const auto p = providers_for(cfg);
      auto cache = cache_for(cfg, no_cache);
      const auto r = pipeline::run_pipeline(question_from(q_text, q_id), p,
                                            pipeline::PipelineOptions::from_config(cfg), cache.get());
      std::optional<MetricsReport> m;
      if (p.nli) m = metrics::evaluate(r, *p.nli);
      std::cout << pipeline::run_record(r, m).dump() << '\n';
      report_warnings(r.warnings);
    };
  });

  // run-batch
  std::string input;
  std::string output;
  std::optional<int> parallelism;
  auto* batch = app.add_subcommand("run-batch", "run the pipeline over a JSONL file of questions");
  add_common(batch, common);
  batch->add_option("--input,-i", input, "questions JSONL ({id, question})")->required();
  batch->add_option("--output,-o", output, "run-record JSONL (default stdout)");
  batch->add_option("--parallelism,-j", parallelism, "concurrent questions");
  batch->add_flag("--no-cache", no_cache, "ignore cache.path for this run");
  batch->callback([&] {
    action = [&] {
      const auto cfg = load_config(common);
      const auto questions = fixtures::parse_questions(read_file(input));
      const auto p = providers_for(cfg);
      auto cache = cache_for(cfg, no_cache);
      pipeline::BatchResult res;
      with_output(output, [&](std::ostream& out) {
        res = pipeline::run_batch(questions, p, pipeline::PipelineOptions::from_config(cfg),
                                  parallelism.value_or(cfg.question_parallelism), out, cache.get());
      });
      report_warnings(res.warnings);
      std::cerr << res.succeeded << " succeeded, " << res.failed << " failed\n";
    };
  });

  // evaluate
  std::string summary_path;
  bool strict = false;
  bool char_level = false;
  auto* evaluate = app.add_subcommand("evaluate", "score a run-record file");
  add_common(evaluate, common);
  evaluate->add_option("--input,-i", input, "run-record JSONL")->required();
  evaluate->add_option("--output,-o", output, "per-sample metrics CSV (default stdout)");
  evaluate->add_option("--summary", summary_path, "per-sample cost summary CSV");
  evaluate->add_flag("--strict", strict, "also require every fact's own snippet to entail it");
  evaluate->add_flag("--char-level", char_level, "character-level preservation");
  evaluate->callback([&] {
    action = [&] {
      const auto cfg = load_config(common);
      const auto p = providers_for(cfg);
      if (!p.nli) throw ConfigError("evaluate needs an NLI provider");
      std::ifstream in(input);
      if (!in) throw InputError("cannot read " + input);
      metrics::EvaluateOptions opt;
      opt.attr_p_mode = strict ? metrics::AttrPMode::Strict : metrics::AttrPMode::FormulaLiteral;
      opt.granularity = char_level ? metrics::Granularity::Character : metrics::Granularity::Word;
      const auto res = pipeline::evaluate_run(in, *p.nli, opt);
      with_output(output, [&](std::ostream& out) { metrics::write_metrics_csv(out, res.rows); });
      if (!summary_path.empty()) {
        with_output(summary_path, [&](std::ostream& out) { pipeline::write_cost_csv(out, res.cost); });
      }
      report_warnings(res.warnings);
    };
  });

  // build-dataset
  std::string entities_path;
  std::string out_dir;
  double ratio = 0.8;
  auto* build = app.add_subcommand("build-dataset", "build the decomposition instruction dataset");
  add_common(build, common);
  build->add_option("--entities,-e", entities_path, "entity ids, one per line (default: every fixture entity)");
  build->add_option("--out", out_dir, "directory for train.jsonl and eval.jsonl")->required();
  build->add_option("--ratio", ratio, "training share")->check(CLI::Range(0.0, 1.0));
  build->add_option("--parallelism,-j", parallelism, "concurrent entities");
  build->callback([&] {
    action = [&] {
      const auto cfg = load_config(common);
      std::vector<std::string> ids;
      if (!entities_path.empty()) {
        std::istringstream in(read_file(entities_path));
        for (std::string line; std::getline(in, line);) {
          if (!text::trim(line).empty()) ids.push_back(text::trim(line));
        }
      }
      dataset::BuildOptions opt;
      opt.split_ratio = ratio;
      opt.seed = cfg.seed;
      opt.parallelism = parallelism.value_or(cfg.question_parallelism);
      opt.out_dir = out_dir;
      dataset::DatasetSplit split;
      if (!cfg.mock_dir.empty()) {
        const auto suite = fixtures::load_fixture_suite(cfg.mock_dir);
        auto kg = dataset::TsvKg::load(std::filesystem::path(cfg.mock_dir) / "kg.tsv");
        if (entities_path.empty()) ids = kg.entities();
        split = dataset::build_dataset(ids, kg, *suite.chat, opt);
      } else {
        if (entities_path.empty()) throw InputError("--entities is required with live providers");
        const auto p = http::make_live_bundle(cfg, Secrets::from_env());
        dataset::WikidataKg kg(http::make_transport(cfg.http_timeout_s), cfg.kg_endpoint,
                               http::RetryPolicy{cfg.http_retries, cfg.http_backoff_ms, {}});
        split = dataset::build_dataset(ids, kg, *p.chat, opt);
      }
      std::vector<std::string> warnings;
      for (const auto& f : split.failures) warnings.push_back(f.entity_id + ": " + f.reason);
      report_warnings(warnings);
      std::cerr << split.train.size() << " train, " << split.eval.size() << " eval\n";
    };
  });

  // entropy-check
  auto* entropy_check = app.add_subcommand("entropy-check", "support-set entropy gap per sample");
  add_common(entropy_check, common);
  entropy_check->add_option("--input,-i", input, "JSON array or JSONL of {atomic_facts, sub_questions}")->required();
  entropy_check->add_option("--output,-o", output, "CSV (default stdout)");
  entropy_check->callback([&] {
    action = [&] {
      const auto samples = entropy::parse_gap_samples(read_file(input));
      with_output(output, [&](std::ostream& out) { out << entropy::gap_report_csv(samples); });
    };
  });

  // fixtures rekey / check
  std::string suite_dir;
  auto* fx = app.add_subcommand("fixtures", "fixture suite maintenance");
  fx->require_subcommand(1);
  auto* rekey = fx->add_subcommand("rekey", "recompute chat keys from the recorded prompts");
  rekey->add_option("dir", suite_dir, "fixture suite directory")->required();
  rekey->callback([&] {
    action = [&] {
      const auto r = fixtures::rekey_chat(std::filesystem::path(suite_dir) / "chat.jsonl");
      std::cerr << r.changed << " of " << r.total << " keys changed";
      if (r.without_provenance > 0) std::cerr << ", " << r.without_provenance << " entries without provenance";
      std::cerr << '\n';
    };
  });
  auto* check = fx->add_subcommand("check", "verify a fixture suite against the current prompts");
  check->add_option("dir", suite_dir, "fixture suite directory")->required();
  check->callback([&] {
    action = [&] {
      const auto problems = fixtures::check_suite(suite_dir);
      for (const auto& p : problems) std::cerr << p << '\n';
      if (!problems.empty()) throw InputError(std::to_string(problems.size()) + " problem(s) in " + suite_dir);
      std::cerr << "ok\n";
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (action) action();
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ProviderError& e) {
    std::cerr << "provider error: " << e.what() << '\n';
    return kProvider;
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  }
}

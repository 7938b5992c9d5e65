// sylparse: train, predict, segment and eval front end.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sylparse.hpp"

namespace {

using namespace sylparse;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool same_file(const std::string& a, const std::string& b) {
  if (a.empty() || b.empty()) return false;
  std::error_code ec;
  if (std::filesystem::exists(a, ec) && std::filesystem::exists(b, ec)) {
    return std::filesystem::equivalent(a, b, ec);
  }
  return std::filesystem::weakly_canonical(a, ec) == std::filesystem::weakly_canonical(b, ec);
}

void guard_output(const std::string& output, std::initializer_list<std::string> inputs) {
  for (const auto& in : inputs) {
    if (same_file(output, in)) throw UsageError("refusing to overwrite input file " + in);
  }
}

// Writes through `fn` to `path`, or to stdout when `path` is empty.
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  fn(out);
}

Lexicon read_lexicon_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_lexicon(in);
}

struct TrainArgs {
  std::string config, model, lexicon;
  std::optional<std::uint64_t> seed;
  AblationFlags flags;
};

int run_train(const TrainArgs& a) {
  TrainingConfig config = load_config(a.config);
  if (a.seed) config.seed = *a.seed;
  if (!a.model.empty()) config.model_path = a.model;
  if (!a.lexicon.empty()) config.lexicon = a.lexicon;
  AblationFlags& f = config.model.flags;
  f.pipeline = f.pipeline || a.flags.pipeline;
  f.no_initial_bio = f.no_initial_bio || a.flags.no_initial_bio;
  f.softmax_wseg = f.softmax_wseg || a.flags.softmax_wseg;
  f.softmax_pos = f.softmax_pos || a.flags.softmax_pos;
  f.no_pos_embedding = f.no_pos_embedding || a.flags.no_pos_embedding;
  for (const auto& out : {config.model_path, config.log_path}) {
    guard_output(out, {a.config, config.wseg_train, config.pos_train, config.dep_train, config.wseg_dev,
                       config.pos_dev, config.dep_dev, config.lexicon, config.syllable_vectors,
                       config.word_vectors});
  }
  if (config.model_path.empty()) throw UsageError("no model path: set 'model' in the config or pass --model");
  const TrainingResult result = train(config);
  std::cerr << "selected epoch " << result.best_epoch << " average dev F1 "
            << format_percent(result.best().dev.average()) << '\n';
  return kOk;
}

struct PredictArgs {
  std::string model, input, output, gold_seg, lexicon;
};

std::vector<AnnotatedSentence> decode(const PredictArgs& a) {
  JointModel model = load_checkpoint(a.model);
  if (!a.lexicon.empty()) model.set_lexicon(read_lexicon_file(a.lexicon));
  std::vector<AnnotatedSentence> inputs;
  PredictOptions options;
  if (!a.gold_seg.empty()) {
    inputs = load_corpus(a.gold_seg, CorpusFormat::segmented);
    options.gold_segmentation = true;
    if (!a.input.empty()) {
      const auto raw = load_corpus(a.input, CorpusFormat::raw);
      if (raw.size() != inputs.size()) {
        throw DataError("--input and --gold-seg hold different numbers of sentences");
      }
      for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i].syllables != inputs[i].syllables) {
          throw DataError("sentence " + std::to_string(i + 1) + ": --gold-seg syllables differ from --input");
        }
      }
    }
  } else {
    if (a.input.empty()) throw UsageError("--input is required unless --gold-seg is given");
    inputs = load_corpus(a.input, CorpusFormat::raw);
  }
  PredictStats stats;
  auto out = predict(model, inputs, options, &stats);
  if (stats.repairs > 0) std::cerr << "repaired " << stats.repairs << " ill-formed segment tags\n";
  return out;
}

int run_predict(const PredictArgs& a) {
  guard_output(a.output, {a.model, a.input, a.gold_seg, a.lexicon});
  const auto out = decode(a);
  emit(a.output, [&](std::ostream& s) { write_conllu(s, out); });
  return kOk;
}

int run_segment(const PredictArgs& a) {
  guard_output(a.output, {a.model, a.input, a.lexicon});
  PredictArgs b = a;
  b.gold_seg.clear();
  const auto out = decode(b);
  emit(a.output, [&](std::ostream& s) { write_segmented(s, out); });
  return kOk;
}

struct EvalArgs {
  std::string gold, system, output;
};

int run_eval(const EvalArgs& a) {
  guard_output(a.output, {a.gold, a.system});
  const auto gold = load_corpus(a.gold, CorpusFormat::conllu);
  const auto system = load_corpus(a.system, CorpusFormat::conllu);
  const EvalReport report = score(gold, system);
  write_report_text(std::cout, report);
  write_report_kv(std::cout, report);
  if (!a.output.empty()) emit(a.output, [&](std::ostream& s) { write_report_kv(s, report); });
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint word segmentation, POS tagging and dependency parsing over syllables"};
  app.require_subcommand(1);

  TrainArgs train_args;
  std::uint64_t seed = 0;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a config file");
  train_cmd->add_option("--config", train_args.config, "Config file (key = value)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--model", train_args.model, "Checkpoint output path (overrides the config)");
  train_cmd->add_option("--lexicon", train_args.lexicon, "External lexicon, one word per line")->check(CLI::ExistingFile);
  auto* seed_opt = train_cmd->add_option("--seed", seed, "Random seed (overrides the config)");
  train_cmd->add_flag("--pipeline", train_args.flags.pipeline, "Three independent single-task networks");
  train_cmd->add_flag("--no-initial-bio", train_args.flags.no_initial_bio, "Drop lexicon BIO embeddings");
  train_cmd->add_flag("--softmax-wseg", train_args.flags.softmax_wseg, "Softmax instead of CRF for segmentation");
  train_cmd->add_flag("--softmax-pos", train_args.flags.softmax_pos, "Softmax instead of CRF for POS tagging");
  train_cmd->add_flag("--no-pos-embedding", train_args.flags.no_pos_embedding, "Parser ignores POS embeddings");

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Segment, tag and parse raw text into CoNLL-U");
  predict_cmd->add_option("--model", predict_args.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--input", predict_args.input, "Raw syllable text")->check(CLI::ExistingFile);
  predict_cmd->add_option("--gold-seg", predict_args.gold_seg, "Gold word-segmented text; skips segmentation")
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--output", predict_args.output, "CoNLL-U output (default: stdout)");
  predict_cmd->add_option("--lexicon", predict_args.lexicon, "Lexicon replacing the checkpoint's")
      ->check(CLI::ExistingFile);

  PredictArgs segment_args;
  auto* segment_cmd = app.add_subcommand("segment", "Word-segment raw text");
  segment_cmd->add_option("--model", segment_args.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  segment_cmd->add_option("--input", segment_args.input, "Raw syllable text")->required()->check(CLI::ExistingFile);
  segment_cmd->add_option("--output", segment_args.output, "Segmented output (default: stdout)");
  segment_cmd->add_option("--lexicon", segment_args.lexicon, "Lexicon replacing the checkpoint's")
      ->check(CLI::ExistingFile);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Score system CoNLL-U against gold");
  eval_cmd->add_option("--gold", eval_args.gold, "Gold CoNLL-U")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--system", eval_args.system, "System CoNLL-U")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--output", eval_args.output, "Also write key=value report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (*seed_opt) train_args.seed = seed;

  try {
    if (*train_cmd) return run_train(train_args);
    if (*predict_cmd) return run_predict(predict_args);
    if (*segment_cmd) return run_segment(segment_args);
    return run_eval(eval_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  }
}

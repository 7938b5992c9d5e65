// Trains a joint model from a config file, then segments, tags and parses
// raw syllable text read from stdin, writing CoNLL-U to stdout.
//
//   train_and_parse data/toy/toy.cfg < data/toy/toy.raw

#include <iostream>
#include <sstream>

#include "sylparse.hpp"

int main(int argc, char** argv) {
  using namespace sylparse;
  if (argc != 2) {
    std::cerr << "usage: train_and_parse CONFIG < RAW\n";
    return 1;
  }
  try {
    TrainingConfig config = load_config(argv[1]);
    config.model_path.clear();
    config.log_path.clear();
    Warnings warnings;
    const TrainingResult result = train(config, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

    const auto& best = result.best();
    std::cerr << "best epoch " << result.best_epoch << ": WSeg " << format_percent(best.dev.wseg_f1) << " PTag "
              << format_percent(best.dev.ptag_f1) << " LAS " << format_percent(best.dev.las_f1) << '\n';

    std::istringstream bytes(result.checkpoint);
    const JointModel model = load_checkpoint(bytes);
    write_conllu(std::cout, predict(model, read_raw(std::cin)));
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
}

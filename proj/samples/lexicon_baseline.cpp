// Longest-matching segmentation with a lexicon built from a segmented
// training file, scored against a segmented test file.
//
//   lexicon_baseline data/toy/toy.seg data/toy/toy.seg

#include <iostream>

#include "sylparse.hpp"

int main(int argc, char** argv) {
  using namespace sylparse;
  if (argc != 3) {
    std::cerr << "usage: lexicon_baseline TRAIN.seg TEST.seg\n";
    return 1;
  }
  try {
    auto train_in = open_input(argv[1]);
    auto test_in = open_input(argv[2]);
    const auto train = read_segmented(train_in);
    const auto gold = read_segmented(test_in);
    const Lexicon lexicon = build_lexicon(train);

    std::vector<AnnotatedSentence> system;
    for (const auto& s : gold) {
      AnnotatedSentence out;
      out.syllables = s.syllables;
      out.words = spans_from_tags(initial_tags(s.syllables, lexicon)).words;
      system.push_back(std::move(out));
    }
    std::cout << lexicon.size() << " lexicon entries\n";
    write_report_text(std::cout, score(gold, system));
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
}

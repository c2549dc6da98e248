#pragma once

#include <string>

namespace ranksvm {

/// Synthetic LETOR-format corpus: planted sparse weight vector, document
/// scores w*'x + noise, grades assigned by per-query score quantile.
/// Deterministic for a given seed.
struct SynthConfig {
  int queries = 40;
  int docs_per_query = 15;
  int dim = 50;
  int informative = 5;
  double noise = 0.0;
  int folds = 5;
  unsigned long long seed = 0;

  void validate() const;  // throws std::invalid_argument on bad sizes
};

/// Writes Fold1..FoldN/{train.txt,vali.txt,test.txt} under out_dir, rotating
/// queries through a 60/20/20 split per fold.
void generate_synthetic_corpus(const SynthConfig& config, const std::string& out_dir);

/// One fold's worth of text (train, vali, test) without touching the
/// filesystem; used by generate_synthetic_corpus and in-process tests.
struct SynthFoldText {
  std::string train;
  std::string vali;
  std::string test;
};

SynthFoldText generate_synthetic_fold(const SynthConfig& config, int fold_index);

}  // namespace ranksvm

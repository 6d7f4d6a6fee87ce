#pragma once

#include "adxprobe/text.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adxprobe {

/// Corpus statistics for tf-idf weighting.
struct TfIdfModel {
    std::size_t corpus_size = 0;
    std::map<std::string, int, std::less<>> doc_freq;
    std::vector<std::string> vocabulary; // sorted feature terms

    static TfIdfModel fit(std::span<const TokenizedDocument> docs);

    // log2(|D| / df). Throws when the term never occurs in the corpus.
    double idf(std::string_view term) const;
};

// (n_ij / sum_k n_kj) * log2(|D| / df_i)
double tfidf_weight(std::string_view term, const TokenizedDocument& doc, const TfIdfModel& model);

struct DocumentVector {
    std::string url;
    Eigen::VectorXd weights; // aligned to TfIdfModel::vocabulary
};

struct VectorizedCorpus {
    TfIdfModel model;
    std::vector<DocumentVector> vectors;
    std::vector<std::vector<std::string>> features; // selected terms per document, ranked
};

// Per document, keeps the `per_doc_features` heaviest terms (ties lexicographic);
// the vocabulary is the sorted union of those selections.
VectorizedCorpus vectorize_corpus(std::span<const TokenizedDocument> docs, std::size_t per_doc_features = 20);

// Rows are documents, columns vocabulary terms.
Eigen::MatrixXd stack_rows(std::span<const DocumentVector> vectors);

} // namespace adxprobe

#include "adxprobe/tfidf.hpp"

#include "adxprobe/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace adxprobe {

TfIdfModel TfIdfModel::fit(std::span<const TokenizedDocument> docs)
{
    TfIdfModel model;
    model.corpus_size = docs.size();
    for (const auto& doc : docs)
        for (const auto& [term, count] : doc.term_counts)
            if (count > 0)
                ++model.doc_freq[term];
    return model;
}

double TfIdfModel::idf(std::string_view term) const
{
    auto it = doc_freq.find(term);
    if (it == doc_freq.end() || it->second < 1)
        throw Error("idf undefined: term '" + std::string(term) + "' does not occur in the corpus");
    return std::log2(static_cast<double>(corpus_size) / static_cast<double>(it->second));
}

double tfidf_weight(std::string_view term, const TokenizedDocument& doc, const TfIdfModel& model)
{
    const double idf = model.idf(term);
    if (doc.length() == 0)
        throw Error("tf undefined: document " + doc.url + " has no tokens");
    auto it = doc.term_counts.find(std::string(term));
    const double n = it == doc.term_counts.end() ? 0.0 : static_cast<double>(it->second);
    return n / static_cast<double>(doc.length()) * idf;
}

VectorizedCorpus vectorize_corpus(std::span<const TokenizedDocument> docs, std::size_t per_doc_features)
{
    if (docs.size() < 2)
        throw InputError("vectorize: need at least 2 documents");
    if (per_doc_features < 1)
        throw InputError("vectorize: per_doc_features must be >= 1");
    if (std::all_of(docs.begin(), docs.end(), [](const auto& d) { return d.length() == 0; }))
        throw InputError("vectorize: every document is empty");

    VectorizedCorpus out;
    out.model = TfIdfModel::fit(docs);

    std::set<std::string> vocab;
    for (const auto& doc : docs) {
        std::vector<std::pair<double, std::string>> ranked;
        if (doc.length() > 0)
            for (const auto& [term, count] : doc.term_counts)
                ranked.emplace_back(tfidf_weight(term, doc, out.model), term);
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        if (ranked.size() > per_doc_features)
            ranked.resize(per_doc_features);
        std::vector<std::string> selected;
        for (auto& [w, term] : ranked) {
            vocab.insert(term);
            selected.push_back(std::move(term));
        }
        out.features.push_back(std::move(selected));
    }
    out.model.vocabulary.assign(vocab.begin(), vocab.end());

    const auto m = static_cast<Eigen::Index>(out.model.vocabulary.size());
    for (const auto& doc : docs) {
        DocumentVector v{doc.url, Eigen::VectorXd::Zero(m)};
        if (doc.length() > 0)
            for (Eigen::Index j = 0; j < m; ++j) {
                const auto& term = out.model.vocabulary[static_cast<std::size_t>(j)];
                if (doc.term_counts.contains(term))
                    v.weights(j) = tfidf_weight(term, doc, out.model);
            }
        out.vectors.push_back(std::move(v));
    }
    return out;
}

Eigen::MatrixXd stack_rows(std::span<const DocumentVector> vectors)
{
    if (vectors.empty())
        return {};
    Eigen::MatrixXd out(static_cast<Eigen::Index>(vectors.size()), vectors.front().weights.size());
    for (std::size_t i = 0; i < vectors.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = vectors[i].weights.transpose();
    return out;
}

} // namespace adxprobe

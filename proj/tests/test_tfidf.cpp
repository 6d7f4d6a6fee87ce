#include "adxprobe/error.hpp"
#include "adxprobe/tfidf.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace adxprobe;

namespace {

// Direct evaluation from raw token lists.
double oracle_weight(const std::string& term, const std::vector<std::string>& doc,
                     const std::vector<std::vector<std::string>>& corpus)
{
    const double n = static_cast<double>(std::count(doc.begin(), doc.end(), term));
    double df = 0;
    for (const auto& d : corpus)
        df += std::find(d.begin(), d.end(), term) != d.end();
    return n / static_cast<double>(doc.size()) * std::log2(static_cast<double>(corpus.size()) / df);
}

std::vector<TokenizedDocument> to_docs(const std::vector<std::vector<std::string>>& raw)
{
    std::vector<TokenizedDocument> docs;
    for (std::size_t i = 0; i < raw.size(); ++i)
        docs.push_back(make_document("d" + std::to_string(i), raw[i]));
    return docs;
}

} // namespace

TEST(TfIdf, MatchesOracleOnToyCorpus)
{
    const std::vector<std::vector<std::string>> raw = {
        {"金融", "股票", "股票", "新闻"}, {"教育", "考试", "新闻"}, {"金融", "贷款", "新闻", "新闻"},
        {"体育", "足球", "新闻"},         {"教育", "新闻", "留学"},
    };
    const auto docs = to_docs(raw);
    const auto model = TfIdfModel::fit(docs);
    for (std::size_t i = 0; i < docs.size(); ++i)
        for (const auto& term : raw[i])
            EXPECT_NEAR(tfidf_weight(term, docs[i], model), oracle_weight(term, raw[i], raw), 1e-12);
    EXPECT_EQ(tfidf_weight("新闻", docs[0], model), 0.0);
}

TEST(TfIdf, WorkedExample)
{
    // 3 occurrences in a 100-term document, term in 2 of 10 documents.
    std::vector<std::vector<std::string>> raw(10, std::vector<std::string>{"x"});
    raw[0] = std::vector<std::string>(97, "filler");
    raw[0].insert(raw[0].end(), {"t", "t", "t"});
    raw[1].push_back("t");
    const auto docs = to_docs(raw);
    const auto model = TfIdfModel::fit(docs);
    EXPECT_NEAR(tfidf_weight("t", docs[0], model), 0.06965784284662087, 1e-15);
}

TEST(TfIdf, UnknownTermAndEmptyDocument)
{
    const auto docs = to_docs({{"a"}, {"b"}});
    const auto model = TfIdfModel::fit(docs);
    EXPECT_THROW(model.idf("zzz"), Error);
    EXPECT_THROW(tfidf_weight("a", make_document("e", {}), model), Error);
}

TEST(Vectorize, KeepsTopFeaturesPerDocument)
{
    std::vector<std::vector<std::string>> raw;
    for (int d = 0; d < 3; ++d) {
        std::vector<std::string> doc;
        for (int t = 0; t < 30; ++t)
            for (int r = 0; r <= t; ++r)
                doc.push_back("d" + std::to_string(d) + "t" + std::to_string(t));
        raw.push_back(doc);
    }
    const auto corpus = vectorize_corpus(to_docs(raw), 20);
    ASSERT_EQ(corpus.features.size(), 3u);
    for (std::size_t d = 0; d < 3; ++d) {
        ASSERT_EQ(corpus.features[d].size(), 20u);
        // Heaviest terms are the most repeated ones.
        EXPECT_EQ(corpus.features[d].front(), "d" + std::to_string(d) + "t29");
        EXPECT_EQ(std::count(corpus.features[d].begin(), corpus.features[d].end(), "d" + std::to_string(d) + "t0"), 0);
    }
    EXPECT_EQ(corpus.model.vocabulary.size(), 60u);
    EXPECT_TRUE(std::is_sorted(corpus.model.vocabulary.begin(), corpus.model.vocabulary.end()));
    const auto& v = corpus.vectors[1].weights;
    EXPECT_EQ(v.size(), 60);
    EXPECT_EQ((v.array() > 0).count(), 20);
}

TEST(Vectorize, TiesBrokenLexicographically)
{
    const auto corpus = vectorize_corpus(to_docs({{"c", "b", "a"}, {"z"}}), 2);
    EXPECT_EQ(corpus.features[0], (std::vector<std::string>{"a", "b"}));
}

TEST(Vectorize, RejectsDegenerateInput)
{
    EXPECT_THROW(vectorize_corpus(to_docs({{"a"}})), InputError);
    EXPECT_THROW(vectorize_corpus(to_docs({{"a"}, {"b"}}), 0), InputError);
    EXPECT_THROW(vectorize_corpus(to_docs({{}, {}})), InputError);
}

TEST(Vectorize, StackRowsAlignsWithVocabulary)
{
    const auto corpus = vectorize_corpus(to_docs({{"a", "b"}, {"b", "c"}, {"c", "d"}}));
    const Eigen::MatrixXd m = stack_rows(corpus.vectors);
    EXPECT_EQ(m.rows(), 3);
    EXPECT_EQ(m.cols(), static_cast<Eigen::Index>(corpus.model.vocabulary.size()));
    const auto col_a = std::find(corpus.model.vocabulary.begin(), corpus.model.vocabulary.end(), "a") -
                       corpus.model.vocabulary.begin();
    EXPECT_NEAR(m(0, col_a), 0.5 * std::log2(3.0), 1e-12);
}

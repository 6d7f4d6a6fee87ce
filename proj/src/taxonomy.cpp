#include "adxprobe/taxonomy.hpp"

#include "adxprobe/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

namespace adxprobe {

Taxonomy::Taxonomy(std::vector<Category> categories) : categories_(std::move(categories))
{
    std::set<std::string> names;
    for (auto& c : categories_) {
        if (c.name.empty())
            throw InputError("taxonomy: empty category name");
        if (!names.insert(c.name).second)
            throw InputError("taxonomy: duplicate category " + c.name);
        std::vector<std::string> keywords;
        for (const auto& k : c.keywords) {
            auto norm = normalize_term(k);
            if (!norm.empty() && std::find(keywords.begin(), keywords.end(), norm) == keywords.end())
                keywords.push_back(std::move(norm));
        }
        if (keywords.empty())
            throw InputError("taxonomy: category " + c.name + " has no keywords");
        c.keywords = std::move(keywords);
    }
}

Taxonomy Taxonomy::parse(std::istream& in)
{
    std::vector<Category> cats;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line.starts_with("#"))
            continue;
        try {
            const auto obj = nlohmann::json::parse(line);
            cats.push_back({obj.at("category").get<std::string>(), obj.at("keywords").get<std::vector<std::string>>()});
        } catch (const nlohmann::json::exception& e) {
            throw InputError("taxonomy line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return Taxonomy(std::move(cats));
}

Taxonomy Taxonomy::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot read taxonomy " + path.string());
    return parse(in);
}

const Category* Taxonomy::find(std::string_view name) const
{
    for (const auto& c : categories_)
        if (c.name == name)
            return &c;
    return nullptr;
}

CategoryMatch Taxonomy::best_match(const std::set<std::string>& terms) const
{
    CategoryMatch best;
    best.category = std::string(kUncategorized);
    for (const auto& c : categories_) {
        const int overlap = static_cast<int>(std::count_if(c.keywords.begin(), c.keywords.end(),
                                                           [&](const std::string& k) { return terms.contains(k); }));
        if (overlap == 0)
            continue;
        if (overlap > best.overlap) {
            best.overlap = overlap;
            best.tied = {c.name};
        } else if (overlap == best.overlap) {
            best.tied.push_back(c.name);
        }
    }
    if (best.overlap > 0) {
        std::sort(best.tied.begin(), best.tied.end());
        best.category = best.tied.front();
    }
    return best;
}

void Taxonomy::extend(Dictionary& dict) const
{
    for (const auto& c : categories_)
        for (const auto& k : c.keywords)
            dict.add(k);
}

std::vector<ClusterLabel> label_clusters(const Clustering<double>& clustering, const std::vector<std::string>& vocabulary,
                                         const Taxonomy& taxonomy, std::size_t top_n)
{
    if (taxonomy.empty())
        throw InputError("label_clusters: taxonomy is empty");
    if (clustering.centroids.cols() != static_cast<Eigen::Index>(vocabulary.size()))
        throw InputError("label_clusters: centroid width does not match vocabulary");
    std::vector<ClusterLabel> out;
    for (int c = 0; c < clustering.k; ++c) {
        std::vector<std::pair<double, std::string>> ranked;
        for (std::size_t j = 0; j < vocabulary.size(); ++j) {
            const double w = clustering.centroids(c, static_cast<Eigen::Index>(j));
            if (w > 0.0)
                ranked.emplace_back(w, vocabulary[j]);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        if (ranked.size() > top_n)
            ranked.resize(top_n);
        ClusterLabel label;
        label.cluster = c;
        std::set<std::string> terms;
        for (auto& [w, t] : ranked) {
            terms.insert(t);
            label.top_terms.push_back(std::move(t));
        }
        auto match = taxonomy.best_match(terms);
        label.category = match.category;
        label.overlap = match.overlap;
        if (match.tied.size() > 1)
            label.tied = std::move(match.tied);
        out.push_back(std::move(label));
    }
    return out;
}

} // namespace adxprobe

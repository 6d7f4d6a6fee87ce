#pragma once

#include "adxprobe/cluster.hpp"
#include "adxprobe/text.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace adxprobe {

inline constexpr std::string_view kUncategorized = "uncategorized";

struct Category {
    std::string name;
    std::vector<std::string> keywords; // normalized terms
};

struct CategoryMatch {
    std::string category;          // kUncategorized when nothing overlaps
    int overlap = 0;
    std::vector<std::string> tied; // every category sharing the top overlap, sorted
};

/// Interest / ad category system with keyword lists.
class Taxonomy {
public:
    Taxonomy() = default;
    explicit Taxonomy(std::vector<Category> categories);

    static Taxonomy parse(std::istream& in);
    static Taxonomy load(const std::filesystem::path& path);

    const std::vector<Category>& categories() const { return categories_; }
    const Category* find(std::string_view name) const;
    bool contains(std::string_view name) const { return find(name) != nullptr; }
    bool empty() const { return categories_.empty(); }

    // Largest keyword overlap with `terms`; ties go to the lexicographically smaller name.
    CategoryMatch best_match(const std::set<std::string>& terms) const;

    // Adds every keyword so segmentation keeps taxonomy terms whole.
    void extend(Dictionary& dict) const;

private:
    std::vector<Category> categories_;
};

struct ClusterLabel {
    int cluster = 0;
    std::string category;
    int overlap = 0;
    std::vector<std::string> top_terms;
    std::vector<std::string> tied;
};

// Top `top_n` centroid terms per cluster matched against the taxonomy.
std::vector<ClusterLabel> label_clusters(const Clustering<double>& clustering, const std::vector<std::string>& vocabulary,
                                         const Taxonomy& taxonomy, std::size_t top_n = 10);

} // namespace adxprobe

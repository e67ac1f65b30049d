#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace tomo {

// Symmetric nonnegative distances over an ordered list of terminal labels.
// By convention the first label is the probe anchor (source or receiver).
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::vector<std::string> labels);

    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }

    double at(std::size_t i, std::size_t j) const { return values_[i * labels_.size() + j]; }
    double at(const std::string& a, const std::string& b) const;

    // Sets both (i,j) and (j,i).
    void set(std::size_t i, std::size_t j, double v);

    // Throws LabelMismatch when the label is unknown.
    std::size_t index_of(const std::string& label) const;

    // First row: comma-separated labels. Then the full symmetric matrix,
    // one row per line, 17 significant digits.
    void save_csv(std::ostream& out) const;
    static DistanceMatrix load_csv(std::istream& in);

private:
    std::vector<std::string> labels_;
    std::vector<double> values_;
};

}  // namespace tomo

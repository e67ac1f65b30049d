#include "tomo/distance_matrix.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "tomo/errors.hpp"
#include "tomo/text.hpp"

namespace tomo {

DistanceMatrix::DistanceMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)), values_(labels_.size() * labels_.size(), 0.0) {}

double DistanceMatrix::at(const std::string& a, const std::string& b) const {
    return at(index_of(a), index_of(b));
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double v) {
    values_[i * labels_.size() + j] = v;
    values_[j * labels_.size() + i] = v;
}

std::size_t DistanceMatrix::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) return i;
    throw LabelMismatch("unknown terminal label: " + label);
}

void DistanceMatrix::save_csv(std::ostream& out) const {
    const std::size_t k = labels_.size();
    for (std::size_t i = 0; i < k; ++i) out << (i ? "," : "") << labels_[i];
    out << '\n';
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j)
            out << (j ? "," : "") << text::format_double(at(i, j));
        out << '\n';
    }
}

DistanceMatrix DistanceMatrix::load_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty distance matrix file", 0);
    auto header = text::split(std::string_view(line), ',');
    std::vector<std::string> labels;
    for (auto& h : header) {
        std::string name(text::trim(h));
        if (name.empty()) throw ParseError("empty label in distance matrix header", 0);
        labels.push_back(std::move(name));
    }
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j)
            if (labels[i] == labels[j])
                throw ParseError("duplicate label in distance matrix header: " + labels[i], 0);

    DistanceMatrix m(labels);
    const std::size_t k = labels.size();
    for (std::size_t i = 0; i < k; ++i) {
        if (!std::getline(in, line))
            throw ParseError("distance matrix truncated at row " + std::to_string(i), 0);
        auto fields = text::split(std::string_view(line), ',');
        if (fields.size() != k)
            throw ParseError("distance matrix row " + std::to_string(i) + " has " +
                                 std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(k),
                             0);
        for (std::size_t j = 0; j < k; ++j) {
            double v;
            if (!text::parse_double(fields[j], v))
                throw ParseError("bad number in distance matrix: '" + fields[j] + "'", 0);
            m.values_[i * k + j] = v;
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (m.at(i, i) != 0.0)
            throw ParseError("distance matrix diagonal must be zero (label " + labels[i] + ")", 0);
        for (std::size_t j = 0; j < k; ++j) {
            const double v = m.at(i, j);
            if (!(v >= 0.0) || !std::isfinite(v))
                throw ParseError("distance matrix entries must be finite and nonnegative", 0);
            if (v != m.at(j, i))
                throw ParseError("distance matrix is not symmetric at (" + labels[i] + "," +
                                     labels[j] + ")",
                                 0);
        }
    }
    return m;
}

}  // namespace tomo

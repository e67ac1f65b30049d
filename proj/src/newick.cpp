#include "tomo/newick.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>

#include "tomo/text.hpp"

namespace tomo {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void write_node(const RoutedTree& t, int v, const std::vector<double>* lengths, std::string& out) {
    if (!t.is_leaf(v)) {
        out += '(';
        const auto& ch = t.children(v);
        for (std::size_t i = 0; i < ch.size(); ++i) {
            if (i) out += ',';
            write_node(t, ch[i], lengths, out);
        }
        out += ')';
    }
    out += t.label(v);
    if (lengths) {
        out += ':';
        out += text::format_double_compact((*lengths)[v]);
    }
}

struct Parser {
    std::string_view text;
    std::size_t pos = 0;

    struct Node {
        int parent;
        std::string name;
        double length = kNaN;
        std::vector<int> kids;
        std::size_t at = 0;  // position of the node's first character
    };
    std::vector<Node> nodes;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos); }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool at_reserved() const {
        if (pos >= text.size()) return true;
        const char c = text[pos];
        return c == '(' || c == ')' || c == ',' || c == ':' || c == ';' ||
               std::isspace(static_cast<unsigned char>(c));
    }

    std::string read_name() {
        const std::size_t start = pos;
        while (!at_reserved()) ++pos;
        return std::string(text.substr(start, pos - start));
    }

    double read_length() {
        skip_ws();
        const std::size_t start = pos;
        while (!at_reserved()) ++pos;
        double v;
        if (pos == start || !text::parse_double(text.substr(start, pos - start), v))
            throw ParseError("expected a branch length after ':'", start);
        return v;
    }

    int parse_node(int parent) {
        skip_ws();
        nodes.push_back({parent, "", kNaN, {}, pos});
        const int id = static_cast<int>(nodes.size()) - 1;
        if (parent >= 0) nodes[parent].kids.push_back(id);

        if (pos < text.size() && text[pos] == '(') {
            ++pos;
            parse_node(id);
            skip_ws();
            while (pos < text.size() && text[pos] == ',') {
                ++pos;
                parse_node(id);
                skip_ws();
            }
            if (pos >= text.size() || text[pos] != ')') fail("unbalanced parenthesis");
            ++pos;
        }
        skip_ws();
        nodes[id].name = read_name();
        skip_ws();
        if (pos < text.size() && text[pos] == ':') {
            ++pos;
            nodes[id].length = read_length();
        }
        return id;
    }
};

void materialize(const Parser& p, int from, RoutedTree& out, int out_parent,
                 std::vector<double>& lengths, std::vector<std::size_t>& at) {
    for (int k : p.nodes[from].kids) {
        const int id = out.add_child(out_parent, p.nodes[k].name);
        lengths.push_back(p.nodes[k].length);
        at.push_back(p.nodes[k].at);
        materialize(p, k, out, id, lengths, at);
    }
}

}  // namespace

std::string to_newick(const RoutedTree& tree, const std::vector<double>* lengths_by_child) {
    if (lengths_by_child && lengths_by_child->size() < static_cast<std::size_t>(tree.node_count()))
        throw MetricIncomplete("length vector shorter than node count");
    std::string out;
    out += '(';
    const auto& ch = tree.children(tree.root());
    for (std::size_t i = 0; i < ch.size(); ++i) {
        if (i) out += ',';
        write_node(tree, ch[i], lengths_by_child, out);
    }
    out += ')';
    out += tree.label(tree.root());
    out += ';';
    return out;
}

std::string to_newick(const RoutedTree& tree, const LinkMetric& metric) {
    std::vector<double> lengths(tree.node_count(), kNaN);
    for (int v = 1; v < tree.node_count(); ++v) lengths[v] = metric.length(v);
    return to_newick(tree, &lengths);
}

ParsedTree parse_newick(std::string_view text) {
    Parser p{text};
    p.skip_ws();
    if (p.pos >= text.size()) p.fail("empty input");
    p.parse_node(-1);
    p.skip_ws();
    if (p.pos >= text.size() || text[p.pos] != ';') p.fail("expected ';' terminator");
    ++p.pos;
    p.skip_ws();
    if (p.pos < text.size()) p.fail("trailing characters after ';'");

    const auto& root = p.nodes[0];
    if (root.name.empty()) throw ParseError("root must carry a label", root.at);
    if (!std::isnan(root.length)) throw ParseError("root must not carry a length", root.at);
    if (root.kids.empty()) throw ParseError("tree must have at least one leaf", root.at);

    RoutedTree tree(Orientation::source_rooted, root.name);
    std::vector<double> lengths{kNaN};
    std::vector<std::size_t> at{root.at};
    materialize(p, 0, tree, tree.root(), lengths, at);

    std::size_t with_len = 0;
    std::set<std::string> used{tree.label(tree.root())};
    for (int v = 1; v < tree.node_count(); ++v) {
        if (tree.is_leaf(v) && tree.label(v).empty())
            throw ParseError("leaf without a label", at[v]);
        if (!tree.label(v).empty() && !used.insert(tree.label(v)).second)
            throw ParseError("duplicate label: " + tree.label(v), at[v]);
        if (!std::isnan(lengths[v])) ++with_len;
    }
    if (with_len != 0 && with_len != static_cast<std::size_t>(tree.node_count()) - 1)
        throw ParseError("branch lengths must be given for all links or none", 0);
    tree.assign_internal_labels();

    ParsedTree out{std::move(tree), std::nullopt};
    if (with_len) out.lengths = std::move(lengths);
    return out;
}

LinkMetric ParsedTree::to_link_metric() const {
    if (!lengths) throw MetricIncomplete("tree carries no branch lengths");
    return LinkMetric::from_lengths(*lengths);
}

}  // namespace tomo

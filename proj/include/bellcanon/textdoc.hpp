#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bellcanon/errors.hpp"

namespace bellcanon {

// Parse error with 1-based position information.
struct DocumentError : UserError {
    int line, column;
    DocumentError(const std::string &msg, int l, int c)
        : UserError(msg + " at line " + std::to_string(l) + ", column " +
                    std::to_string(c)),
          line(l), column(c) {}
};

// A node of the interchange documents: a YAML-compatible subset with block
// mappings, block sequences, flow sequences, plain and double-quoted scalars,
// and comments. No anchors, tags or multi-document streams.
struct TextNode {
    enum class Kind { Scalar, Sequence, Mapping };
    Kind kind = Kind::Scalar;
    std::string scalar;
    std::vector<TextNode> items;                            // Sequence
    std::vector<std::pair<std::string, TextNode>> entries;  // Mapping, ordered

    static TextNode make_scalar(std::string s);
    static TextNode make_sequence(std::vector<TextNode> items);
    static TextNode make_mapping();

    bool has(const std::string &key) const;
    const TextNode &at(const std::string &key) const; // throws UserError
    const TextNode *find(const std::string &key) const;
    void set(const std::string &key, TextNode value);
};

TextNode parse_document(const std::string &text);
std::string write_document(const TextNode &root);

} // namespace bellcanon

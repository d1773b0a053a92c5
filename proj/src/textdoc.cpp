#include "bellcanon/textdoc.hpp"

#include <sstream>

namespace bellcanon {

TextNode TextNode::make_scalar(std::string s) {
    TextNode n;
    n.kind = Kind::Scalar;
    n.scalar = std::move(s);
    return n;
}

TextNode TextNode::make_sequence(std::vector<TextNode> items) {
    TextNode n;
    n.kind = Kind::Sequence;
    n.items = std::move(items);
    return n;
}

TextNode TextNode::make_mapping() {
    TextNode n;
    n.kind = Kind::Mapping;
    return n;
}

bool TextNode::has(const std::string &key) const { return find(key) != nullptr; }

const TextNode &TextNode::at(const std::string &key) const {
    if (const TextNode *n = find(key))
        return *n;
    throw UserError("missing key '" + key + "'");
}

const TextNode *TextNode::find(const std::string &key) const {
    for (const auto &[k, v] : entries)
        if (k == key)
            return &v;
    return nullptr;
}

void TextNode::set(const std::string &key, TextNode value) {
    kind = Kind::Mapping;
    for (auto &[k, v] : entries)
        if (k == key) {
            v = std::move(value);
            return;
        }
    entries.emplace_back(key, std::move(value));
}

namespace {

struct Line {
    int number;
    int indent;
    std::string content; // without indentation or trailing comment
};

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string &s) {
    bool quoted = false;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '"' && (i == 0 || s[i - 1] != '\\'))
            quoted = !quoted;
        else if (c == '#' && !quoted && (i == 0 || isspace((unsigned char)s[i - 1])))
            return s.substr(0, i);
    }
    return s;
}

std::string rtrim(std::string s) {
    while (!s.empty() && isspace((unsigned char)s.back()))
        s.pop_back();
    return s;
}

std::vector<Line> split_lines(const std::string &text) {
    std::vector<Line> out;
    int number = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos)
            end = text.size();
        std::string raw = text.substr(pos, end - pos);
        ++number;
        pos = end + 1;
        std::string body = rtrim(strip_comment(raw));
        int indent = 0;
        while (indent < (int)body.size() && body[indent] == ' ')
            ++indent;
        if (body.find('\t') != std::string::npos)
            throw DocumentError("tab characters are not allowed", number, 1);
        if (indent == (int)body.size())
            continue; // blank or comment-only
        out.push_back({number, indent, body.substr(indent)});
        if (end == text.size())
            break;
    }
    return out;
}

struct Parser {
    std::vector<Line> lines;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string &msg, int line, int column) const {
        throw DocumentError(msg, line, column);
    }

    // Scalars and flow sequences inside one line (flow sequences may span
    // lines; the continuation text is pulled from subsequent lines).
    TextNode parse_inline(std::string text, int line) {
        std::string s = rtrim(text);
        if (s.empty())
            fail("expected a value", line, 1);
        if (s[0] == '[') {
            // pull continuation lines until the bracket closes
            while (bracket_depth(s) > 0) {
                if (pos >= lines.size())
                    fail("unterminated flow sequence", line, 1);
                s += " " + lines[pos].content;
                ++pos;
            }
            size_t i = 0;
            TextNode n = parse_flow(s, i, line);
            skip_spaces(s, i);
            if (i != s.size())
                fail("trailing characters after flow sequence", line, (int)i + 1);
            return n;
        }
        if (s[0] == '"')
            return TextNode::make_scalar(parse_quoted(s, line));
        return TextNode::make_scalar(s);
    }

    static int bracket_depth(const std::string &s) {
        int depth = 0;
        bool quoted = false;
        for (size_t i = 0; i < s.size(); ++i) {
            char c = s[i];
            if (c == '"' && (i == 0 || s[i - 1] != '\\'))
                quoted = !quoted;
            else if (!quoted && c == '[')
                ++depth;
            else if (!quoted && c == ']')
                --depth;
        }
        return depth;
    }

    static void skip_spaces(const std::string &s, size_t &i) {
        while (i < s.size() && s[i] == ' ')
            ++i;
    }

    std::string parse_quoted(const std::string &s, int line) {
        if (s.size() < 2 || s.front() != '"' || s.back() != '"')
            fail("malformed quoted scalar", line, 1);
        std::string out;
        for (size_t i = 1; i + 1 < s.size(); ++i) {
            if (s[i] == '\\') {
                ++i;
                if (i + 1 >= s.size()) // escape would swallow the closing quote
                    fail("dangling escape", line, (int)i);
                switch (s[i]) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail("unknown escape", line, (int)i + 1);
                }
            } else {
                out += s[i];
            }
        }
        return out;
    }

    TextNode parse_flow(const std::string &s, size_t &i, int line) {
        if (s[i] != '[')
            fail("expected '['", line, (int)i + 1);
        ++i;
        TextNode n = TextNode::make_sequence({});
        skip_spaces(s, i);
        if (i < s.size() && s[i] == ']') {
            ++i;
            return n;
        }
        for (;;) {
            skip_spaces(s, i);
            if (i >= s.size())
                fail("unterminated flow sequence", line, (int)i);
            if (s[i] == '[') {
                n.items.push_back(parse_flow(s, i, line));
            } else if (s[i] == '"') {
                size_t start = i;
                ++i;
                while (i < s.size() && (s[i] != '"' || s[i - 1] == '\\'))
                    ++i;
                if (i >= s.size())
                    fail("unterminated quoted scalar", line, (int)start + 1);
                ++i;
                n.items.push_back(TextNode::make_scalar(
                    parse_quoted(s.substr(start, i - start), line)));
            } else {
                size_t start = i;
                while (i < s.size() && s[i] != ',' && s[i] != ']')
                    ++i;
                std::string item = rtrim(s.substr(start, i - start));
                if (item.empty())
                    fail("empty flow item", line, (int)start + 1);
                n.items.push_back(TextNode::make_scalar(item));
            }
            skip_spaces(s, i);
            if (i < s.size() && s[i] == ',') {
                ++i;
                continue;
            }
            if (i < s.size() && s[i] == ']') {
                ++i;
                return n;
            }
            fail("expected ',' or ']'", line, (int)i + 1);
        }
    }

    TextNode parse_block(int indent) {
        if (pos >= lines.size())
            fail("unexpected end of document", lines.empty() ? 1 : lines.back().number, 1);
        const Line &first = lines[pos];
        if (first.content.rfind("- ", 0) == 0 || first.content == "-") {
            TextNode n = TextNode::make_sequence({});
            while (pos < lines.size() && lines[pos].indent == indent &&
                   (lines[pos].content.rfind("- ", 0) == 0 || lines[pos].content == "-")) {
                const Line &cur = lines[pos];
                std::string rest = cur.content == "-" ? "" : cur.content.substr(2);
                ++pos;
                if (rest.empty())
                    n.items.push_back(parse_block(next_indent(indent, cur.number)));
                else
                    n.items.push_back(parse_inline(rest, cur.number));
            }
            return n;
        }
        TextNode n = TextNode::make_mapping();
        while (pos < lines.size() && lines[pos].indent == indent) {
            const Line &cur = lines[pos];
            size_t colon = find_key_colon(cur);
            std::string key = rtrim(cur.content.substr(0, colon));
            if (key.empty())
                fail("empty mapping key", cur.number, cur.indent + 1);
            if (n.has(key))
                fail("duplicate key '" + key + "'", cur.number, cur.indent + 1);
            std::string rest = cur.content.substr(colon + 1);
            size_t r = 0;
            skip_spaces(rest, r);
            rest = rest.substr(r);
            ++pos;
            if (!rest.empty()) {
                n.set(key, parse_inline(rest, cur.number));
            } else {
                if (pos < lines.size() && lines[pos].indent > indent)
                    n.set(key, parse_block(lines[pos].indent));
                else
                    n.set(key, TextNode::make_scalar(""));
            }
        }
        return n;
    }

    size_t find_key_colon(const Line &line) const {
        bool quoted = false;
        for (size_t i = 0; i < line.content.size(); ++i) {
            char c = line.content[i];
            if (c == '"' && (i == 0 || line.content[i - 1] != '\\'))
                quoted = !quoted;
            else if (c == ':' && !quoted &&
                     (i + 1 == line.content.size() || line.content[i + 1] == ' '))
                return i;
        }
        fail("expected 'key: value'", line.number, line.indent + 1);
    }

    int next_indent(int indent, int line) const {
        if (pos >= lines.size() || lines[pos].indent <= indent)
            fail("expected an indented block", line, indent + 1);
        return lines[pos].indent;
    }
};

bool needs_quoting(const std::string &s) {
    if (s.empty())
        return true;
    if (isspace((unsigned char)s.front()) || isspace((unsigned char)s.back()))
        return true;
    for (char c : s)
        if (c == '#' || c == ':' || c == '[' || c == ']' || c == ',' || c == '"' ||
            c == '\n' || c == '\t')
            return true;
    return false;
}

std::string quote(const std::string &s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        default: out += c;
        }
    }
    return out + "\"";
}

std::string scalar_text(const std::string &s) {
    return needs_quoting(s) ? quote(s) : s;
}

void write_node(std::ostringstream &os, const TextNode &n, int indent);

void write_flow(std::ostringstream &os, const TextNode &n, int indent) {
    os << '[';
    int col = indent + 1;
    for (size_t i = 0; i < n.items.size(); ++i) {
        std::string item = scalar_text(n.items[i].scalar);
        if (i) {
            os << ',';
            ++col;
            if (col + (int)item.size() + 1 > 96) {
                os << '\n' << std::string(indent + 2, ' ');
                col = indent + 2;
            } else {
                os << ' ';
                ++col;
            }
        }
        os << item;
        col += (int)item.size();
    }
    os << ']';
}

void write_node(std::ostringstream &os, const TextNode &n, int indent) {
    switch (n.kind) {
    case TextNode::Kind::Scalar:
        os << scalar_text(n.scalar);
        break;
    case TextNode::Kind::Sequence: {
        bool flat = true;
        for (const auto &item : n.items)
            if (item.kind != TextNode::Kind::Scalar)
                flat = false;
        if (flat) {
            write_flow(os, n, indent);
        } else {
            for (size_t i = 0; i < n.items.size(); ++i) {
                os << '\n' << std::string(indent, ' ') << "- ";
                write_node(os, n.items[i], indent + 2);
            }
        }
        break;
    }
    case TextNode::Kind::Mapping:
        for (const auto &[key, value] : n.entries) {
            os << '\n' << std::string(indent, ' ') << key << ':';
            if (value.kind == TextNode::Kind::Mapping ||
                (value.kind == TextNode::Kind::Sequence && [&] {
                    for (const auto &item : value.items)
                        if (item.kind != TextNode::Kind::Scalar)
                            return true;
                    return false;
                }())) {
                write_node(os, value, indent + 2);
            } else {
                os << ' ';
                write_node(os, value, indent + (int)key.size() + 2);
            }
        }
        break;
    }
}

} // namespace

TextNode parse_document(const std::string &text) {
    Parser p{split_lines(text)};
    if (p.lines.empty())
        throw DocumentError("empty document", 1, 1);
    if (p.lines.front().indent != 0)
        throw DocumentError("top-level content must not be indented",
                            p.lines.front().number, p.lines.front().indent + 1);
    TextNode root = p.parse_block(0);
    if (p.pos != p.lines.size())
        p.fail("trailing content", p.lines[p.pos].number, p.lines[p.pos].indent + 1);
    return root;
}

std::string write_document(const TextNode &root) {
    std::ostringstream os;
    if (root.kind == TextNode::Kind::Mapping) {
        // top-level mappings start at column one without a leading newline
        std::ostringstream body;
        write_node(body, root, 0);
        std::string s = body.str();
        if (!s.empty() && s[0] == '\n')
            s = s.substr(1);
        os << s;
    } else {
        write_node(os, root, 0);
    }
    os << '\n';
    return os.str();
}

} // namespace bellcanon

#include "fdrkit/gml.hpp"

#include <cctype>
#include <cmath>

#include "fdrkit/error.hpp"
#include "fdrkit/util.hpp"

namespace fdrkit {

namespace {

bool label_is_printable(std::string_view s) {
    for (char c : s)
        if (c == '"' || c == '\\' || static_cast<unsigned char>(c) < 0x20) return false;
    return true;
}

} // namespace

std::string write_gml(const CircuitGraph& g) {
    std::string out;
    out += "graph [\n";
    out += "  directed 1\n";
    for (uint32_t id = 0; id < g.node_count(); ++id) {
        const GraphNode& n = g.node(id);
        if (!label_is_printable(n.label))
            throw Error(Errc::invalid_params,
                        "node label '" + n.label + "' contains characters GML cannot carry");
        out += "  node [\n";
        out += "    id " + std::to_string(id) + "\n";
        out += "    label \"" + n.label + "\"\n";
        out += "    kind \"" + std::string(to_string(n.kind)) + "\"\n";
        out += "  ]\n";
    }
    for (const GraphEdge& e : g.edges()) {
        out += "  edge [\n";
        out += "    source " + std::to_string(e.source) + "\n";
        out += "    target " + std::to_string(e.target) + "\n";
        out += "    weight " + fmt_double_sig(e.weight, 9) + "\n";
        out += "  ]\n";
    }
    out += "]\n";
    return out;
}

// ---------------------------------------------------------------------------
// Reader
// ---------------------------------------------------------------------------

namespace {

struct GmlToken {
    enum Type : uint8_t { Key, Number, String, Open, Close, End } type = End;
    std::string text;
    int line = 1;
};

class GmlLexer {
public:
    explicit GmlLexer(std::string_view src) : src_(src) {}

    GmlToken next() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
                continue;
            }
            if (c == '#') { // comment line
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                continue;
            }
            break;
        }
        GmlToken t;
        t.line = line_;
        if (pos_ >= src_.size()) return t;

        char c = src_[pos_];
        if (c == '[') {
            ++pos_;
            t.type = GmlToken::Open;
            return t;
        }
        if (c == ']') {
            ++pos_;
            t.type = GmlToken::Close;
            return t;
        }
        if (c == '"') {
            ++pos_;
            size_t start = pos_;
            while (pos_ < src_.size() && src_[pos_] != '"') {
                if (src_[pos_] == '\n') ++line_;
                ++pos_;
            }
            if (pos_ >= src_.size())
                throw Error(Errc::gml_syntax, "unterminated string at line " + std::to_string(t.line));
            t.type = GmlToken::String;
            t.text = std::string(src_.substr(start, pos_ - start));
            ++pos_;
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            t.type = GmlToken::Key;
            t.text = std::string(src_.substr(start, pos_ - start));
            return t;
        }
        if (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            ++pos_;
            while (pos_ < src_.size() &&
                   (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' ||
                    src_[pos_] == 'e' || src_[pos_] == 'E' || src_[pos_] == '-' || src_[pos_] == '+'))
                ++pos_;
            t.type = GmlToken::Number;
            t.text = std::string(src_.substr(start, pos_ - start));
            return t;
        }
        throw Error(Errc::gml_syntax,
                    std::string("unexpected character '") + c + "' at line " + std::to_string(line_));
    }

private:
    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
};

struct NodeRec {
    int64_t id = -1;
    std::string label;
    std::string kind;
    bool has_label = false, has_kind = false;
    int line = 0;
};

struct EdgeRec {
    int64_t source = -1, target = -1;
    double weight = 1.0;
    int line = 0;
};

class GmlParser {
public:
    GmlParser(std::string_view src, std::vector<std::string>* warnings)
        : lex_(src), warnings_(warnings) {
        bump();
    }

    CircuitGraph parse() {
        if (cur_.type != GmlToken::Key || cur_.text != "graph")
            throw Error(Errc::gml_syntax, "expected top-level 'graph' block");
        bump();
        expect_open();

        while (cur_.type != GmlToken::Close) {
            if (cur_.type == GmlToken::End)
                throw Error(Errc::gml_syntax, "unterminated graph block");
            std::string key = expect_key();
            if (key == "directed") {
                int64_t v = expect_int("directed");
                if (v != 1)
                    throw Error(Errc::gml_syntax, "only directed graphs are supported (directed 1)");
            } else if (key == "node") {
                parse_node();
            } else if (key == "edge") {
                parse_edge();
            } else {
                warn("unknown graph attribute '" + key + "' ignored");
                skip_value(key);
            }
        }
        bump(); // close
        if (cur_.type != GmlToken::End)
            throw Error(Errc::gml_syntax, "text after closing bracket of graph block");
        return assemble();
    }

private:
    void parse_node() {
        expect_open();
        NodeRec rec;
        rec.line = cur_.line;
        while (cur_.type != GmlToken::Close) {
            if (cur_.type == GmlToken::End) throw Error(Errc::gml_syntax, "unterminated node block");
            std::string key = expect_key();
            if (key == "id") {
                rec.id = expect_int("id");
            } else if (key == "label") {
                rec.label = expect_string("label");
                rec.has_label = true;
            } else if (key == "kind") {
                rec.kind = expect_string("kind");
                rec.has_kind = true;
            } else {
                warn("unknown node attribute '" + key + "' ignored");
                skip_value(key);
            }
        }
        bump();
        nodes_.push_back(std::move(rec));
    }

    void parse_edge() {
        expect_open();
        EdgeRec rec;
        rec.line = cur_.line;
        while (cur_.type != GmlToken::Close) {
            if (cur_.type == GmlToken::End) throw Error(Errc::gml_syntax, "unterminated edge block");
            std::string key = expect_key();
            if (key == "source")
                rec.source = expect_int("source");
            else if (key == "target")
                rec.target = expect_int("target");
            else if (key == "weight")
                rec.weight = expect_number("weight");
            else {
                warn("unknown edge attribute '" + key + "' ignored");
                skip_value(key);
            }
        }
        bump();
        edges_.push_back(rec);
    }

    CircuitGraph assemble() {
        size_t n = nodes_.size();
        std::vector<const NodeRec*> by_id(n, nullptr);
        for (const NodeRec& rec : nodes_) {
            if (!rec.has_label)
                throw Error(Errc::gml_syntax, "node without label near line " + std::to_string(rec.line));
            if (!rec.has_kind)
                throw Error(Errc::gml_syntax,
                            "node '" + rec.label + "' has no kind attribute");
            if (rec.id < 0 || rec.id >= static_cast<int64_t>(n))
                throw Error(Errc::gml_syntax, "node ids must be dense 0..N-1; got id " +
                                                  std::to_string(rec.id) + " with " +
                                                  std::to_string(n) + " nodes");
            if (by_id[static_cast<size_t>(rec.id)])
                throw Error(Errc::gml_syntax, "duplicate node id " + std::to_string(rec.id));
            by_id[static_cast<size_t>(rec.id)] = &rec;
        }

        CircuitGraph::Builder b;
        for (const NodeRec* rec : by_id) {
            auto kind = node_kind_from(rec->kind);
            if (!kind)
                throw Error(Errc::gml_syntax, "unknown node kind '" + rec->kind + "'");
            b.add_node(rec->label, *kind);
        }
        for (const EdgeRec& rec : edges_) {
            if (rec.source < 0 || rec.source >= static_cast<int64_t>(n) || rec.target < 0 ||
                rec.target >= static_cast<int64_t>(n))
                throw Error(Errc::dangling_edge,
                            "edge (" + std::to_string(rec.source) + ", " + std::to_string(rec.target) +
                                ") references a missing node id");
            if (!(rec.weight > 0.0) || !std::isfinite(rec.weight))
                throw Error(Errc::non_positive_weight,
                            "edge (" + std::to_string(rec.source) + ", " + std::to_string(rec.target) +
                                ") has non-positive weight " + fmt_double(rec.weight));
            b.add_edge(static_cast<uint32_t>(rec.source), static_cast<uint32_t>(rec.target),
                       rec.weight);
        }
        return b.build();
    }

    void warn(std::string msg) {
        if (warnings_) warnings_->push_back(std::move(msg));
    }

    // Skips the value of an unknown attribute: a scalar or a bracketed block.
    void skip_value(const std::string& key) {
        if (cur_.type == GmlToken::Open) {
            int depth = 0;
            do {
                if (cur_.type == GmlToken::End)
                    throw Error(Errc::gml_syntax, "unterminated block for attribute '" + key + "'");
                if (cur_.type == GmlToken::Open) ++depth;
                if (cur_.type == GmlToken::Close) --depth;
                bump();
            } while (depth > 0);
        } else if (cur_.type == GmlToken::Number || cur_.type == GmlToken::String ||
                   cur_.type == GmlToken::Key) {
            bump();
        } else {
            throw Error(Errc::gml_syntax, "attribute '" + key + "' has no value");
        }
    }

    void expect_open() {
        if (cur_.type != GmlToken::Open)
            throw Error(Errc::gml_syntax, "expected '[' at line " + std::to_string(cur_.line));
        bump();
    }

    std::string expect_key() {
        if (cur_.type != GmlToken::Key)
            throw Error(Errc::gml_syntax, "expected attribute name at line " + std::to_string(cur_.line));
        std::string k = cur_.text;
        bump();
        return k;
    }

    int64_t expect_int(const std::string& key) {
        if (cur_.type != GmlToken::Number)
            throw Error(Errc::gml_syntax, "attribute '" + key + "' needs an integer value");
        int64_t v = 0;
        if (!parse_i64(cur_.text, v))
            throw Error(Errc::gml_syntax, "attribute '" + key + "': bad integer '" + cur_.text + "'");
        bump();
        return v;
    }

    double expect_number(const std::string& key) {
        if (cur_.type != GmlToken::Number)
            throw Error(Errc::gml_syntax, "attribute '" + key + "' needs a numeric value");
        double v = 0;
        if (!parse_double(cur_.text, v))
            throw Error(Errc::gml_syntax, "attribute '" + key + "': bad number '" + cur_.text + "'");
        bump();
        return v;
    }

    std::string expect_string(const std::string& key) {
        if (cur_.type != GmlToken::String)
            throw Error(Errc::gml_syntax, "attribute '" + key + "' needs a quoted string");
        std::string s = cur_.text;
        bump();
        return s;
    }

    void bump() { cur_ = lex_.next(); }

    GmlLexer lex_;
    GmlToken cur_;
    std::vector<std::string>* warnings_;
    std::vector<NodeRec> nodes_;
    std::vector<EdgeRec> edges_;
};

} // namespace

CircuitGraph read_gml(std::string_view text, std::vector<std::string>* warnings) {
    return GmlParser(text, warnings).parse();
}

} // namespace fdrkit

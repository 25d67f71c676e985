#include "fdrkit/netlist.hpp"

#include <algorithm>
#include <cctype>

#include "fdrkit/util.hpp"

namespace fdrkit {

std::optional<NetId> Netlist::find_net(std::string_view net_name) const {
    auto it = net_index_.find(std::string(net_name));
    if (it == net_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<InstId> Netlist::find_instance(std::string_view inst_name) const {
    auto it = inst_index_.find(std::string(inst_name));
    if (it == inst_index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> Netlist::ff_names() const {
    std::vector<std::string> out;
    out.reserve(flip_flops.size());
    for (InstId i : flip_flops) out.push_back(instances[i].name);
    return out;
}

void Netlist::rebuild_index() {
    net_index_.clear();
    inst_index_.clear();
    for (NetId i = 0; i < nets.size(); ++i) net_index_.emplace(nets[i], i);
    for (InstId i = 0; i < instances.size(); ++i) inst_index_.emplace(instances[i].name, i);
}

std::string Diagnostic::to_string() const {
    std::string out = severity == Error ? "ERROR" : "WARNING";
    out += " netlist: [";
    out += errc_name(code);
    out += "] ";
    out += message;
    return out;
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

namespace {

struct Token {
    enum Type : uint8_t { Ident, Punct, End } type = End;
    std::string_view text;
    int line = 0;
    int col = 0;
};

class Lexer {
public:
    Lexer(std::string_view src, std::string_view filename) : src_(src), file_(filename) {}

    Token next() {
        skip_space_and_comments();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= src_.size()) {
            t.type = Token::End;
            return t;
        }
        char c = src_[pos_];
        if (is_ident_start(c)) {
            size_t start = pos_;
            while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
            t.type = Token::Ident;
            t.text = src_.substr(start, pos_ - start);
            return t;
        }
        if (c == '(' || c == ')' || c == ';' || c == ',' || c == '.') {
            t.type = Token::Punct;
            t.text = src_.substr(pos_, 1);
            advance();
            return t;
        }
        throw Error(Errc::syntax_error, std::string("unexpected character '") + c + "'",
                    SourceLoc{std::string(file_), line_, col_});
    }

    SourceLoc loc_here() const { return {std::string(file_), line_, col_}; }
    std::string_view file() const { return file_; }

private:
    static bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
    static bool is_ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space_and_comments() {
        for (;;) {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
            if (pos_ + 1 < src_.size() && src_[pos_] == '/' && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
                continue;
            }
            if (pos_ + 1 < src_.size() && src_[pos_] == '/' && src_[pos_ + 1] == '*') {
                int sline = line_, scol = col_;
                advance();
                advance();
                for (;;) {
                    if (pos_ + 1 >= src_.size())
                        throw Error(Errc::syntax_error, "unterminated block comment",
                                    SourceLoc{std::string(file_), sline, scol});
                    if (src_[pos_] == '*' && src_[pos_ + 1] == '/') {
                        advance();
                        advance();
                        break;
                    }
                    advance();
                }
                continue;
            }
            return;
        }
    }

    std::string_view src_;
    std::string_view file_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

enum class DeclKind : uint8_t { Input, Output, Wire };

struct ConnStmt {
    std::string pin;
    std::string net;
    SourceLoc loc;
};

struct InstanceStmt {
    std::string cell_type;
    std::string name;
    std::vector<ConnStmt> conns;
    SourceLoc loc;
};

struct DeclStmt {
    DeclKind kind;
    std::string name;
    SourceLoc loc;
};

class Parser {
public:
    Parser(std::string_view src, std::string_view filename) : lex_(src, filename) { bump(); }

    void parse_module() {
        expect_keyword("module");
        module_name_ = std::string(expect_ident("module name").text);
        expect_punct("(");
        if (!is_punct(")")) {
            for (;;) {
                Token t = expect_ident("port name");
                port_list_.emplace_back(std::string(t.text), loc_of(t));
                if (is_punct(",")) {
                    bump();
                    continue;
                }
                break;
            }
        }
        expect_punct(")");
        expect_punct(";");

        while (!is_keyword("endmodule")) {
            if (cur_.type == Token::End)
                throw err("unexpected end of file, missing 'endmodule'", cur_);
            if (is_keyword("input"))
                parse_decl(DeclKind::Input);
            else if (is_keyword("output"))
                parse_decl(DeclKind::Output);
            else if (is_keyword("wire"))
                parse_decl(DeclKind::Wire);
            else
                parse_instance();
        }
        bump(); // endmodule
        if (cur_.type != Token::End) throw err("text after 'endmodule'", cur_);
    }

    std::string module_name_;
    std::vector<std::pair<std::string, SourceLoc>> port_list_;
    std::vector<DeclStmt> decls_;
    std::vector<InstanceStmt> instances_;

private:
    void parse_decl(DeclKind kind) {
        bump(); // keyword
        for (;;) {
            Token t = expect_ident("net name");
            decls_.push_back({kind, std::string(t.text), loc_of(t)});
            if (is_punct(",")) {
                bump();
                continue;
            }
            break;
        }
        expect_punct(";");
    }

    void parse_instance() {
        Token type_tok = expect_ident("cell type");
        InstanceStmt inst;
        inst.cell_type = std::string(type_tok.text);
        inst.loc = loc_of(type_tok);
        inst.name = std::string(expect_ident("instance name").text);
        expect_punct("(");
        if (!is_punct(")")) {
            for (;;) {
                expect_punct(".");
                Token pin = expect_ident("pin name");
                expect_punct("(");
                Token net = expect_ident("net name");
                expect_punct(")");
                inst.conns.push_back({std::string(pin.text), std::string(net.text), loc_of(pin)});
                if (is_punct(",")) {
                    bump();
                    continue;
                }
                break;
            }
        }
        expect_punct(")");
        expect_punct(";");
        instances_.push_back(std::move(inst));
    }

    static SourceLoc loc_of(const Token& t) { return {"", t.line, t.col}; }

    Error err(const std::string& msg, const Token& t) {
        return Error(Errc::syntax_error, msg,
                     SourceLoc{std::string(lex_.file()), t.line, t.col});
    }

    void bump() { cur_ = lex_.next(); }

    bool is_keyword(std::string_view kw) const {
        return cur_.type == Token::Ident && cur_.text == kw;
    }
    bool is_punct(std::string_view p) const {
        return cur_.type == Token::Punct && cur_.text == p;
    }

    void expect_keyword(std::string_view kw) {
        if (!is_keyword(kw)) throw err("expected '" + std::string(kw) + "'", cur_);
        bump();
    }

    void expect_punct(std::string_view p) {
        if (!is_punct(p)) throw err("expected '" + std::string(p) + "'", cur_);
        bump();
    }

    Token expect_ident(const std::string& what) {
        if (cur_.type != Token::Ident) throw err("expected " + what, cur_);
        Token t = cur_;
        bump();
        return t;
    }

    Lexer lex_;
    Token cur_;
};

} // namespace

// ---------------------------------------------------------------------------
// Elaboration
// ---------------------------------------------------------------------------

Netlist parse_netlist(std::string_view text, CellLibrary lib, std::string_view filename) {
    Parser parser(text, filename);
    parser.parse_module();

    auto at = [&](const SourceLoc& loc) {
        return SourceLoc{std::string(filename), loc.line, loc.col};
    };

    Netlist n;
    n.name = parser.module_name_;
    n.lib = std::move(lib);

    // Nets come from declarations, in declaration order.
    std::unordered_map<std::string, std::pair<DeclKind, NetId>> decl_map;
    for (const DeclStmt& d : parser.decls_) {
        if (decl_map.count(d.name))
            throw Error(Errc::syntax_error, "net '" + d.name + "' declared twice", at(d.loc));
        NetId id = static_cast<NetId>(n.nets.size());
        n.nets.push_back(d.name);
        decl_map.emplace(d.name, std::make_pair(d.kind, id));
        if (d.kind == DeclKind::Input)
            n.primary_inputs.push_back(id);
        else if (d.kind == DeclKind::Output)
            n.primary_outputs.push_back(id);
    }
    n.drivers.assign(n.nets.size(), NetDriver{});

    // Port list and input/output declarations must agree.
    for (const auto& [port, loc] : parser.port_list_) {
        auto it = decl_map.find(port);
        if (it == decl_map.end() || it->second.first == DeclKind::Wire)
            throw Error(Errc::syntax_error,
                        "port '" + port + "' is not declared input or output", at(loc));
    }
    {
        std::unordered_map<std::string, int> ports;
        for (const auto& [port, loc] : parser.port_list_) {
            if (++ports[port] > 1)
                throw Error(Errc::syntax_error, "port '" + port + "' listed twice", at(loc));
        }
        for (const DeclStmt& d : parser.decls_) {
            if (d.kind != DeclKind::Wire && !ports.count(d.name))
                throw Error(Errc::syntax_error,
                            "'" + d.name + "' declared " +
                                (d.kind == DeclKind::Input ? "input" : "output") +
                                " but missing from the port list",
                            at(d.loc));
        }
    }

    for (NetId id : n.primary_inputs) n.drivers[id] = {NetDriver::PrimaryInput, 0, 0};

    // Instances.
    std::unordered_map<std::string, SourceLoc> inst_names;
    for (const InstanceStmt& stmt : parser.instances_) {
        auto cell_index = n.lib.index_of(stmt.cell_type);
        if (!cell_index)
            throw Error(Errc::unknown_cell_type, "unknown cell type '" + stmt.cell_type + "'",
                        at(stmt.loc));
        const CellSpec& cell = n.lib.at(*cell_index);
        if (cell.kind == CellKind::Input || cell.kind == CellKind::Output)
            throw Error(Errc::syntax_error,
                        "cell '" + stmt.cell_type + "' of kind " + to_string(cell.kind) +
                            " cannot be instantiated; ports come from input/output declarations",
                        at(stmt.loc));

        if (inst_names.count(stmt.name))
            throw Error(Errc::syntax_error, "instance '" + stmt.name + "' declared twice",
                        at(stmt.loc));
        if (decl_map.count(stmt.name))
            throw Error(Errc::syntax_error,
                        "instance name '" + stmt.name + "' collides with a net name", at(stmt.loc));
        inst_names.emplace(stmt.name, stmt.loc);

        Instance inst;
        inst.name = stmt.name;
        inst.cell = *cell_index;
        inst.pin_nets.assign(cell.pins.size(), kNoNet);

        for (const ConnStmt& conn : stmt.conns) {
            int pin = cell.pin_index(conn.pin);
            if (pin < 0)
                throw Error(Errc::syntax_error,
                            "cell '" + cell.name + "' has no pin '" + conn.pin + "'", at(conn.loc));
            if (inst.pin_nets[static_cast<size_t>(pin)] != kNoNet)
                throw Error(Errc::syntax_error,
                            "pin '" + conn.pin + "' of '" + inst.name + "' connected twice",
                            at(conn.loc));
            auto net_it = decl_map.find(conn.net);
            if (net_it == decl_map.end())
                throw Error(Errc::syntax_error, "undeclared net '" + conn.net + "'", at(conn.loc));
            NetId net = net_it->second.second;
            inst.pin_nets[static_cast<size_t>(pin)] = net;

            if (cell.pins[static_cast<size_t>(pin)].dir == PinDir::Out) {
                NetDriver& d = n.drivers[net];
                if (d.kind != NetDriver::None) {
                    std::string prev = d.kind == NetDriver::PrimaryInput
                                           ? "primary input"
                                           : "pin " + n.instances[d.inst].name + "." +
                                                 n.cell_of(d.inst).pins[d.pin].name;
                    throw Error(Errc::multiple_drivers,
                                "net '" + conn.net + "' driven by " + inst.name + "." + conn.pin +
                                    " and " + prev,
                                at(conn.loc));
                }
                d = {NetDriver::InstancePin, static_cast<InstId>(n.instances.size()),
                     static_cast<uint32_t>(pin)};
            }
        }

        for (size_t pin = 0; pin < cell.pins.size(); ++pin) {
            if (inst.pin_nets[pin] == kNoNet)
                throw Error(Errc::unconnected_pin,
                            "pin '" + cell.pins[pin].name + "' of instance '" + inst.name +
                                "' is not connected",
                            at(stmt.loc));
        }
        n.instances.push_back(std::move(inst));
    }

    for (InstId i = 0; i < n.instances.size(); ++i)
        if (n.cell_of(i).kind == CellKind::FlipFlop) n.flip_flops.push_back(i);
    std::sort(n.flip_flops.begin(), n.flip_flops.end(),
              [&](InstId a, InstId b) { return n.instances[a].name < n.instances[b].name; });

    n.rebuild_index();
    comb_topo_order(n); // rejects combinational loops
    return n;
}

Netlist load_netlist(const std::filesystem::path& netlist_path, const CellLibrary& lib) {
    return parse_netlist(read_file(netlist_path), lib, netlist_path.string());
}

std::vector<InstId> comb_topo_order(const Netlist& n) {
    // Dependency edges between combinational instances only; FF outputs and
    // primary inputs are sequential boundaries and never propagate a cycle.
    std::vector<InstId> comb;
    for (InstId i = 0; i < n.instances.size(); ++i)
        if (n.cell_of(i).kind == CellKind::Comb) comb.push_back(i);

    std::unordered_map<NetId, InstId> comb_driver;
    for (InstId i : comb) {
        const CellSpec& cell = n.cell_of(i);
        comb_driver[n.instances[i].pin_nets[static_cast<size_t>(cell.output_pin)]] = i;
    }

    std::vector<std::vector<InstId>> succ(n.instances.size());
    std::vector<int> indegree(n.instances.size(), 0);
    for (InstId i : comb) {
        const CellSpec& cell = n.cell_of(i);
        for (uint32_t pin : cell.input_pins) {
            NetId net = n.instances[i].pin_nets[pin];
            if (net == kNoNet) continue;
            auto it = comb_driver.find(net);
            if (it != comb_driver.end()) {
                succ[it->second].push_back(i);
                ++indegree[i];
            }
        }
    }

    std::vector<InstId> order;
    order.reserve(comb.size());
    std::vector<InstId> ready;
    for (InstId i : comb)
        if (indegree[i] == 0) ready.push_back(i);
    // stack-based Kahn; order is deterministic because edge lists follow
    // instance order
    size_t head = 0;
    while (head < ready.size()) {
        InstId u = ready[head++];
        order.push_back(u);
        for (InstId v : succ[u])
            if (--indegree[v] == 0) ready.push_back(v);
    }

    if (order.size() != comb.size()) {
        // Recover one cycle path for the message.
        std::vector<InstId> in_cycle;
        for (InstId i : comb)
            if (indegree[i] > 0) in_cycle.push_back(i);
        std::string path;
        // Walk successor links inside the residual subgraph until a repeat.
        std::vector<char> seen(n.instances.size(), 0);
        InstId cur = in_cycle.front();
        std::vector<InstId> trail;
        while (!seen[cur]) {
            seen[cur] = 1;
            trail.push_back(cur);
            for (InstId v : succ[cur])
                if (indegree[v] > 0) {
                    cur = v;
                    break;
                }
        }
        auto start = std::find(trail.begin(), trail.end(), cur);
        for (auto it = start; it != trail.end(); ++it) {
            if (!path.empty()) path += " -> ";
            path += n.instances[*it].name;
        }
        path += " -> " + n.instances[cur].name;
        throw Error(Errc::combinational_loop, "combinational loop: " + path);
    }
    return order;
}

std::vector<Diagnostic> validate_netlist(const Netlist& n) {
    std::vector<Diagnostic> out;
    auto error = [&](Errc c, std::string msg) {
        out.push_back({Diagnostic::Error, c, std::move(msg)});
    };
    auto warning = [&](Errc c, std::string msg) {
        out.push_back({Diagnostic::Warning, c, std::move(msg)});
    };

    // Driver counts, recomputed from scratch.
    std::vector<int> driver_count(n.nets.size(), 0);
    std::vector<int> load_count(n.nets.size(), 0);
    for (NetId id : n.primary_inputs)
        if (id < n.nets.size()) ++driver_count[id];
    for (const Instance& inst : n.instances) {
        const CellSpec& cell = n.lib.at(inst.cell);
        for (size_t pin = 0; pin < cell.pins.size(); ++pin) {
            NetId net = pin < inst.pin_nets.size() ? inst.pin_nets[pin] : kNoNet;
            if (net == kNoNet) {
                error(Errc::unconnected_pin,
                      "UnconnectedPin(" + inst.name + ", " + cell.pins[pin].name + ")");
                continue;
            }
            if (net >= n.nets.size()) {
                error(Errc::unconnected_pin, "pin " + inst.name + "." + cell.pins[pin].name +
                                                 " references unknown net id " + std::to_string(net));
                continue;
            }
            if (cell.pins[pin].dir == PinDir::Out)
                ++driver_count[net];
            else
                ++load_count[net];
        }
    }
    for (NetId id = 0; id < n.nets.size(); ++id) {
        if (driver_count[id] > 1)
            error(Errc::multiple_drivers, "MultipleDrivers(" + n.nets[id] + ")");
        bool observed = std::find(n.primary_outputs.begin(), n.primary_outputs.end(), id) !=
                        n.primary_outputs.end();
        if (driver_count[id] == 0 && (load_count[id] > 0 || observed))
            warning(Errc::undriven_net, "net '" + n.nets[id] + "' is used but has no driver");
    }

    // flip_flops must be exactly the FF instances, sorted by name.
    std::vector<InstId> expected;
    for (InstId i = 0; i < n.instances.size(); ++i)
        if (n.cell_of(i).kind == CellKind::FlipFlop) expected.push_back(i);
    std::sort(expected.begin(), expected.end(),
              [&](InstId a, InstId b) { return n.instances[a].name < n.instances[b].name; });
    if (expected != n.flip_flops)
        error(Errc::invalid_params,
              "flip_flops list does not match the FF instances in lexicographic order");

    try {
        comb_topo_order(n);
    } catch (const Error& e) {
        error(e.code(), e.what());
    }

    return out;
}

} // namespace fdrkit

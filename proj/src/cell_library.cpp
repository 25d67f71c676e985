#include "fdrkit/cell_library.hpp"

#include "fdrkit/error.hpp"
#include "fdrkit/util.hpp"

namespace fdrkit {

const char* to_string(CellKind k) {
    switch (k) {
        case CellKind::Comb: return "COMB";
        case CellKind::FlipFlop: return "FF";
        case CellKind::Input: return "INPUT";
        case CellKind::Output: return "OUTPUT";
    }
    return "?";
}

const char* to_string(CombFunc f) {
    switch (f) {
        case CombFunc::And2: return "AND2";
        case CombFunc::Nand2: return "NAND2";
        case CombFunc::Or2: return "OR2";
        case CombFunc::Nor2: return "NOR2";
        case CombFunc::Xor2: return "XOR2";
        case CombFunc::Xnor2: return "XNOR2";
        case CombFunc::Inv: return "INV";
        case CombFunc::Buf: return "BUF";
        case CombFunc::Mux2: return "MUX2";
    }
    return "?";
}

int comb_arity(CombFunc f) {
    switch (f) {
        case CombFunc::Inv:
        case CombFunc::Buf: return 1;
        case CombFunc::Mux2: return 3;
        default: return 2;
    }
}

bool eval_comb(CombFunc f, std::span<const uint8_t> in) {
    switch (f) {
        case CombFunc::And2: return in[0] && in[1];
        case CombFunc::Nand2: return !(in[0] && in[1]);
        case CombFunc::Or2: return in[0] || in[1];
        case CombFunc::Nor2: return !(in[0] || in[1]);
        case CombFunc::Xor2: return (in[0] != 0) != (in[1] != 0);
        case CombFunc::Xnor2: return (in[0] != 0) == (in[1] != 0);
        case CombFunc::Inv: return !in[0];
        case CombFunc::Buf: return in[0] != 0;
        case CombFunc::Mux2: return in[2] ? (in[1] != 0) : (in[0] != 0);
    }
    return false;
}

int CellSpec::pin_index(std::string_view pin_name) const {
    for (size_t i = 0; i < pins.size(); ++i)
        if (pins[i].name == pin_name) return static_cast<int>(i);
    return -1;
}

namespace {

std::optional<CombFunc> func_from_name(std::string_view s) {
    for (auto f : {CombFunc::And2, CombFunc::Nand2, CombFunc::Or2, CombFunc::Nor2, CombFunc::Xor2,
                   CombFunc::Xnor2, CombFunc::Inv, CombFunc::Buf, CombFunc::Mux2})
        if (s == to_string(f)) return f;
    return std::nullopt;
}

void derive_pin_tables(CellSpec& c, std::string_view where) {
    c.input_pins.clear();
    c.output_pin = c.clock_pin = c.reset_pin = c.data_pin = -1;
    int out_count = 0, q_count = 0;
    for (uint32_t i = 0; i < c.pins.size(); ++i) {
        const PinSpec& p = c.pins[i];
        if (p.dir == PinDir::In) {
            c.input_pins.push_back(i);
            switch (p.role) {
                case PinRole::Clock:
                    if (c.clock_pin >= 0)
                        throw Error(Errc::invalid_params,
                                    std::string(where) + ": duplicate clock pin on " + c.name);
                    c.clock_pin = static_cast<int32_t>(i);
                    break;
                case PinRole::Reset:
                    if (c.reset_pin >= 0)
                        throw Error(Errc::invalid_params,
                                    std::string(where) + ": duplicate reset pin on " + c.name);
                    c.reset_pin = static_cast<int32_t>(i);
                    break;
                case PinRole::Data:
                    if (c.data_pin < 0) c.data_pin = static_cast<int32_t>(i);
                    break;
                default: break;
            }
        } else {
            c.output_pin = static_cast<int32_t>(i);
            ++out_count;
            if (p.role == PinRole::Q) ++q_count;
        }
    }

    if (c.kind == CellKind::Comb) {
        if (out_count != 1)
            throw Error(Errc::invalid_params,
                        std::string(where) + ": COMB cell " + c.name + " must have exactly one output pin");
        if (c.input_pins.empty())
            throw Error(Errc::invalid_params,
                        std::string(where) + ": COMB cell " + c.name + " needs at least one input pin");
        if (!c.func)
            throw Error(Errc::invalid_params,
                        std::string(where) + ": COMB cell " + c.name + " has no boolean function");
        // clock/reset roles make no sense on a gate
        if (c.clock_pin >= 0 || c.reset_pin >= 0)
            throw Error(Errc::invalid_params,
                        std::string(where) + ": COMB cell " + c.name + " has clock/reset pins");
        if (static_cast<int>(c.input_pins.size()) != comb_arity(*c.func))
            throw Error(Errc::invalid_params, std::string(where) + ": cell " + c.name + ": function " +
                                                  to_string(*c.func) + " expects " +
                                                  std::to_string(comb_arity(*c.func)) + " inputs, got " +
                                                  std::to_string(c.input_pins.size()));
    } else if (c.kind == CellKind::FlipFlop) {
        int data_ins = 0;
        for (uint32_t i : c.input_pins)
            if (c.pins[i].role == PinRole::Data) ++data_ins;
        if (data_ins != 1 || c.clock_pin < 0 || out_count != 1 || q_count != 1)
            throw Error(Errc::invalid_params,
                        std::string(where) + ": FF cell " + c.name +
                            " must have exactly one data input, one clock input and one Q output");
    }
}

} // namespace

void CellLibrary::add(CellSpec spec) {
    if (by_name_.count(spec.name))
        throw Error(Errc::invalid_params, "duplicate cell type '" + spec.name + "'");
    derive_pin_tables(spec, "<library>");
    by_name_.emplace(spec.name, static_cast<uint32_t>(cells_.size()));
    cells_.push_back(std::move(spec));
}

const CellSpec* CellLibrary::find(std::string_view cell_name) const {
    auto it = by_name_.find(std::string(cell_name));
    return it == by_name_.end() ? nullptr : &cells_[it->second];
}

std::optional<uint32_t> CellLibrary::index_of(std::string_view cell_name) const {
    auto it = by_name_.find(std::string(cell_name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

CellLibrary CellLibrary::parse(std::string_view text, std::string_view filename) {
    CellLibrary lib;
    int line_no = 0;
    for (std::string_view raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = trim(raw);
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = trim(line.substr(0, hash));
        if (line.empty()) continue;

        auto fields = split_ws(line);
        auto fail = [&](const std::string& msg) -> Error {
            return Error(Errc::syntax_error, msg, SourceLoc{std::string(filename), line_no, 1});
        };
        if (fields[0] != "cell" || fields.size() < 4)
            throw fail("expected: cell <NAME> <comb:FUNC|ff|input|output> <pin>:<dir>:<role> ...");

        CellSpec spec;
        spec.name = std::string(fields[1]);
        std::string_view kind = fields[2];
        if (kind == "ff") {
            spec.kind = CellKind::FlipFlop;
        } else if (kind == "input") {
            spec.kind = CellKind::Input;
        } else if (kind == "output") {
            spec.kind = CellKind::Output;
        } else if (kind.starts_with("comb:")) {
            spec.kind = CellKind::Comb;
            auto f = func_from_name(kind.substr(5));
            if (!f) throw fail("unknown boolean function '" + std::string(kind.substr(5)) + "'");
            spec.func = f;
        } else {
            throw fail("unknown cell kind '" + std::string(kind) + "'");
        }

        for (size_t i = 3; i < fields.size(); ++i) {
            auto parts = split(fields[i], ':');
            if (parts.size() != 3) throw fail("pin must be <name>:<in|out>:<data|clock|reset|q>");
            PinSpec pin;
            pin.name = std::string(parts[0]);
            if (parts[1] == "in")
                pin.dir = PinDir::In;
            else if (parts[1] == "out")
                pin.dir = PinDir::Out;
            else
                throw fail("pin direction must be in|out");
            if (parts[2] == "data")
                pin.role = PinRole::Data;
            else if (parts[2] == "clock")
                pin.role = PinRole::Clock;
            else if (parts[2] == "reset")
                pin.role = PinRole::Reset;
            else if (parts[2] == "q")
                pin.role = PinRole::Q;
            else
                throw fail("pin role must be data|clock|reset|q");
            for (const auto& existing : spec.pins)
                if (existing.name == pin.name) throw fail("duplicate pin '" + pin.name + "'");
            spec.pins.push_back(std::move(pin));
        }

        try {
            lib.add(std::move(spec));
        } catch (const Error& e) {
            throw fail(e.what());
        }
    }
    return lib;
}

CellLibrary CellLibrary::load_file(const std::filesystem::path& path) {
    return parse(read_file(path), path.string());
}

CellLibrary CellLibrary::standard() {
    static const char* text =
        "cell INV   comb:INV   A:in:data Y:out:data\n"
        "cell BUF   comb:BUF   A:in:data Y:out:data\n"
        "cell AND2  comb:AND2  A:in:data B:in:data Y:out:data\n"
        "cell NAND2 comb:NAND2 A:in:data B:in:data Y:out:data\n"
        "cell OR2   comb:OR2   A:in:data B:in:data Y:out:data\n"
        "cell NOR2  comb:NOR2  A:in:data B:in:data Y:out:data\n"
        "cell XOR2  comb:XOR2  A:in:data B:in:data Y:out:data\n"
        "cell XNOR2 comb:XNOR2 A:in:data B:in:data Y:out:data\n"
        "cell MUX2  comb:MUX2  A:in:data B:in:data S:in:data Y:out:data\n"
        "cell DFF   ff D:in:data C:in:clock Q:out:q\n"
        "cell DFFR  ff D:in:data C:in:clock R:in:reset Q:out:q\n";
    return parse(text, "<standard>");
}

} // namespace fdrkit

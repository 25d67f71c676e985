#include "fdrkit/simulator.hpp"

#include <algorithm>

#include "fdrkit/error.hpp"
#include "fdrkit/rng.hpp"
#include "fdrkit/util.hpp"

namespace fdrkit {

// ---------------------------------------------------------------------------
// Stimulus
// ---------------------------------------------------------------------------

Stimulus Stimulus::random(const Netlist& n, size_t cycles, uint64_t seed) {
    Stimulus s;
    s.cycles = cycles;
    Rng rng(seed);
    s.input_vectors.resize(cycles);
    for (auto& vec : s.input_vectors) {
        vec.resize(n.primary_inputs.size());
        for (auto& bit : vec) bit = rng.next_bool() ? 1 : 0;
    }
    s.initial_state.assign(n.flip_flops.size(), 0);
    s.observed_outputs = n.primary_outputs;
    return s;
}

namespace {

// Hex string -> bit vector, LSB first ("3" -> 1,1,0,...).
std::vector<uint8_t> hex_bits(std::string_view hex, size_t width, std::string_view what,
                              int line_no) {
    std::vector<uint8_t> bits(width, 0);
    size_t bit = 0;
    for (size_t i = hex.size(); i-- > 0;) {
        char c = hex[i];
        int v;
        if (c >= '0' && c <= '9')
            v = c - '0';
        else if (c >= 'a' && c <= 'f')
            v = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F')
            v = c - 'A' + 10;
        else
            throw Error(Errc::syntax_error,
                        std::string(what) + ": bad hex digit '" + c + "' on line " +
                            std::to_string(line_no));
        for (int b = 0; b < 4; ++b, ++bit) {
            bool set = (v >> b) & 1;
            if (bit < width)
                bits[bit] = set ? 1 : 0;
            else if (set)
                throw Error(Errc::syntax_error, std::string(what) + ": value on line " +
                                                    std::to_string(line_no) + " is wider than " +
                                                    std::to_string(width) + " bits");
        }
    }
    return bits;
}

} // namespace

Stimulus Stimulus::parse(std::string_view text, const Netlist& n, std::string_view filename) {
    Stimulus s;
    std::vector<int> pi_slot; // position in `inputs` line -> netlist PI index
    bool have_inputs = false, have_init = false;
    std::vector<std::vector<uint8_t>> raw_vectors;

    int line_no = 0;
    for (std::string_view raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = trim(raw);
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        auto fields = split_ws(line);
        auto fail = [&](const std::string& msg, Errc c = Errc::syntax_error) -> Error {
            return Error(c, msg, SourceLoc{std::string(filename), line_no, 1});
        };

        if (fields[0] == "inputs") {
            if (have_inputs) throw fail("duplicate 'inputs' line");
            have_inputs = true;
            std::vector<char> covered(n.primary_inputs.size(), 0);
            for (size_t i = 1; i < fields.size(); ++i) {
                auto net = n.find_net(fields[i]);
                auto pi_pos = [&]() -> int {
                    if (!net) return -1;
                    for (size_t p = 0; p < n.primary_inputs.size(); ++p)
                        if (n.primary_inputs[p] == *net) return static_cast<int>(p);
                    return -1;
                }();
                if (pi_pos < 0)
                    throw fail("'" + std::string(fields[i]) + "' is not a primary input",
                               Errc::unknown_input);
                if (covered[static_cast<size_t>(pi_pos)])
                    throw fail("input '" + std::string(fields[i]) + "' listed twice");
                covered[static_cast<size_t>(pi_pos)] = 1;
                pi_slot.push_back(pi_pos);
            }
            for (size_t p = 0; p < covered.size(); ++p)
                if (!covered[p])
                    throw fail("primary input '" + n.nets[n.primary_inputs[p]] +
                                   "' missing from the inputs line",
                               Errc::unknown_input);
        } else if (fields[0] == "observe") {
            for (size_t i = 1; i < fields.size(); ++i) {
                auto net = n.find_net(fields[i]);
                bool is_po = net && std::find(n.primary_outputs.begin(), n.primary_outputs.end(),
                                              *net) != n.primary_outputs.end();
                if (!is_po)
                    throw fail("'" + std::string(fields[i]) + "' is not a primary output",
                               Errc::unknown_input);
                s.observed_outputs.push_back(*net);
            }
        } else if (fields[0] == "init") {
            if (fields.size() != 2) throw fail("init needs one hex value");
            have_init = true;
            s.initial_state = hex_bits(fields[1], n.flip_flops.size(), "init", line_no);
        } else if (fields[0] == "vector") {
            if (!have_inputs) throw fail("'vector' before 'inputs' line");
            if (fields.size() != 2) throw fail("vector needs one hex value");
            auto slot_bits = hex_bits(fields[1], pi_slot.size(), "vector", line_no);
            std::vector<uint8_t> bits(n.primary_inputs.size(), 0);
            for (size_t i = 0; i < pi_slot.size(); ++i)
                bits[static_cast<size_t>(pi_slot[i])] = slot_bits[i];
            raw_vectors.push_back(std::move(bits));
        } else {
            throw fail("unknown directive '" + std::string(fields[0]) + "'");
        }
    }

    if (!have_inputs && !n.primary_inputs.empty())
        throw Error(Errc::unknown_input, "stimulus has no 'inputs' line");
    if (!have_init) {
        if (!n.flip_flops.empty())
            throw Error(Errc::uninitialized_state, "stimulus has no 'init' line");
        s.initial_state.clear();
    }
    if (s.observed_outputs.empty()) s.observed_outputs = n.primary_outputs;
    s.input_vectors = std::move(raw_vectors);
    s.cycles = s.input_vectors.size();
    s.validate(n);
    return s;
}

Stimulus Stimulus::load_file(const std::filesystem::path& path, const Netlist& n) {
    return parse(read_file(path), n, path.string());
}

void Stimulus::validate(const Netlist& n) const {
    if (cycles == 0) throw Error(Errc::invalid_params, "stimulus has no cycles");
    if (input_vectors.size() != cycles)
        throw Error(Errc::invalid_params, "stimulus: input vector count != cycles");
    for (const auto& vec : input_vectors)
        if (vec.size() != n.primary_inputs.size())
            throw Error(Errc::unknown_input,
                        "stimulus: a cycle does not assign every primary input");
    if (initial_state.size() != n.flip_flops.size())
        throw Error(Errc::uninitialized_state,
                    "stimulus: initial state covers " + std::to_string(initial_state.size()) +
                        " of " + std::to_string(n.flip_flops.size()) + " flip-flops");
    if (observed_outputs.empty())
        throw Error(Errc::invalid_params, "stimulus: observed_outputs is empty");
    for (NetId net : observed_outputs)
        if (std::find(n.primary_outputs.begin(), n.primary_outputs.end(), net) ==
            n.primary_outputs.end())
            throw Error(Errc::unknown_input, "stimulus: observed net is not a primary output");
}

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

Simulator::Simulator(const Netlist& n) : netlist_(&n) {
    // Nets that feed evaluation must have drivers.
    std::vector<char> needed(n.nets.size(), 0);
    for (const Instance& inst : n.instances) {
        const CellSpec& cell = n.lib.at(inst.cell);
        for (uint32_t pin : cell.input_pins)
            if (cell.pins[pin].role != PinRole::Clock) needed[inst.pin_nets[pin]] = 1;
    }
    for (NetId net : n.primary_outputs) needed[net] = 1;
    for (NetId net = 0; net < n.nets.size(); ++net)
        if (needed[net] && n.drivers[net].kind == NetDriver::None)
            throw Error(Errc::undriven_net,
                        "net '" + n.nets[net] + "' is read during simulation but has no driver");

    for (InstId i : comb_topo_order(n)) {
        const Instance& inst = n.instances[i];
        const CellSpec& cell = n.lib.at(inst.cell);
        CombOp op;
        op.func = *cell.func;
        op.arity = static_cast<uint32_t>(cell.input_pins.size());
        for (uint32_t k = 0; k < op.arity; ++k) op.operands[k] = inst.pin_nets[cell.input_pins[k]];
        op.out = inst.pin_nets[static_cast<size_t>(cell.output_pin)];
        comb_ops_.push_back(op);
    }

    for (InstId i : n.flip_flops) {
        const Instance& inst = n.instances[i];
        const CellSpec& cell = n.lib.at(inst.cell);
        FfOp op;
        op.d = inst.pin_nets[static_cast<size_t>(cell.data_pin)];
        op.q = inst.pin_nets[static_cast<size_t>(cell.output_pin)];
        if (cell.reset_pin >= 0) op.reset = inst.pin_nets[static_cast<size_t>(cell.reset_pin)];
        ff_ops_.push_back(op);
    }
}

size_t Simulator::ff_index_of(std::string_view ff_name) const {
    const Netlist& n = *netlist_;
    for (size_t i = 0; i < n.flip_flops.size(); ++i)
        if (n.instances[n.flip_flops[i]].name == ff_name) return i;
    throw Error(Errc::unknown_flip_flop, "no flip-flop named '" + std::string(ff_name) + "'");
}

void Simulator::eval_cycle(const std::vector<uint8_t>& inputs, std::vector<uint8_t>& state,
                           std::vector<uint8_t>& nets) const {
    const Netlist& n = *netlist_;
    for (size_t p = 0; p < n.primary_inputs.size(); ++p) nets[n.primary_inputs[p]] = inputs[p];
    for (size_t f = 0; f < ff_ops_.size(); ++f) nets[ff_ops_[f].q] = state[f];
    for (const CombOp& op : comb_ops_) {
        uint8_t vals[3];
        for (uint32_t k = 0; k < op.arity; ++k) vals[k] = nets[op.operands[k]];
        nets[op.out] = eval_comb(op.func, {vals, op.arity}) ? 1 : 0;
    }
    // clock edge: D -> Q, synchronous reset wins
    for (size_t f = 0; f < ff_ops_.size(); ++f) {
        const FfOp& op = ff_ops_[f];
        state[f] = (op.reset != kNoNet && nets[op.reset]) ? 0 : nets[op.d];
    }
}

SimTrace Simulator::run_golden(const Stimulus& s) const {
    s.validate(*netlist_);
    const Netlist& n = *netlist_;
    SimTrace trace;
    trace.outputs.resize(s.cycles);
    trace.states.resize(s.cycles);

    std::vector<uint8_t> state = s.initial_state;
    std::vector<uint8_t> nets(n.nets.size(), 0);
    for (size_t c = 0; c < s.cycles; ++c) {
        trace.states[c] = state;
        eval_cycle(s.input_vectors[c], state, nets);
        auto& row = trace.outputs[c];
        row.resize(s.observed_outputs.size());
        for (size_t o = 0; o < s.observed_outputs.size(); ++o)
            row[o] = nets[s.observed_outputs[o]];
    }
    return trace;
}

std::vector<std::vector<uint8_t>> Simulator::run_tail(const Stimulus& s, size_t start_cycle,
                                                      std::vector<uint8_t> state) const {
    if (start_cycle >= s.cycles)
        throw Error(Errc::cycle_out_of_range, "start cycle " + std::to_string(start_cycle) +
                                                  " >= " + std::to_string(s.cycles));
    const Netlist& n = *netlist_;
    std::vector<std::vector<uint8_t>> outputs;
    outputs.reserve(s.cycles - start_cycle);
    std::vector<uint8_t> nets(n.nets.size(), 0);
    for (size_t c = start_cycle; c < s.cycles; ++c) {
        eval_cycle(s.input_vectors[c], state, nets);
        std::vector<uint8_t> row(s.observed_outputs.size());
        for (size_t o = 0; o < s.observed_outputs.size(); ++o)
            row[o] = nets[s.observed_outputs[o]];
        outputs.push_back(std::move(row));
    }
    return outputs;
}

bool Simulator::diverges_from(const Stimulus& s, const SimTrace& golden, size_t start_cycle,
                              std::vector<uint8_t> state) const {
    const Netlist& n = *netlist_;
    std::vector<uint8_t> nets(n.nets.size(), 0);
    for (size_t c = start_cycle; c < s.cycles; ++c) {
        eval_cycle(s.input_vectors[c], state, nets);
        const auto& gold_row = golden.outputs[c];
        for (size_t o = 0; o < s.observed_outputs.size(); ++o)
            if (nets[s.observed_outputs[o]] != gold_row[o]) return true;
    }
    return false;
}

bool Simulator::inject_seu(const Stimulus& s, const SimTrace& golden, size_t ff_index,
                           size_t cycle) const {
    if (ff_index >= ff_ops_.size())
        throw Error(Errc::unknown_flip_flop, "flip-flop index out of range");
    if (cycle >= s.cycles)
        throw Error(Errc::cycle_out_of_range,
                    "injection cycle " + std::to_string(cycle) + " >= " + std::to_string(s.cycles));
    std::vector<uint8_t> state = golden.states[cycle];
    state[ff_index] ^= 1;
    return diverges_from(s, golden, cycle, std::move(state));
}

SimTrace simulate_golden(const Netlist& n, const Stimulus& s) {
    return Simulator(n).run_golden(s);
}

bool inject_seu(const Netlist& n, const Stimulus& s, std::string_view ff_name, size_t cycle) {
    Simulator sim(n);
    SimTrace golden = sim.run_golden(s);
    return sim.inject_seu(s, golden, sim.ff_index_of(ff_name), cycle);
}

} // namespace fdrkit

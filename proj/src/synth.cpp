#include "fdrkit/synth.hpp"

#include <algorithm>

#include "fdrkit/error.hpp"
#include "fdrkit/rng.hpp"

namespace fdrkit {

namespace {

std::string pad2(size_t v) {
    std::string s = std::to_string(v);
    return s.size() < 2 ? "0" + s : s;
}

} // namespace

SynthCircuit generate_chain_benchmark(const SynthSpec& spec) {
    if (spec.target_ffs < 2) throw Error(Errc::invalid_params, "benchmark needs >= 2 flip-flops");
    if (spec.length_pattern.empty())
        throw Error(Errc::invalid_params, "benchmark needs a chain length pattern");
    for (int len : spec.length_pattern)
        if (len < 1) throw Error(Errc::invalid_params, "chain lengths must be >= 1");

    // Chain lengths cycle through the pattern until the FF budget is filled.
    std::vector<int> lengths;
    size_t total = 0;
    size_t pi = 0;
    while (total < spec.target_ffs) {
        int len = spec.length_pattern[pi % spec.length_pattern.size()];
        ++pi;
        len = std::min<int>(len, static_cast<int>(spec.target_ffs - total));
        lengths.push_back(len);
        total += static_cast<size_t>(len);
    }

    Rng rng(derive_seed(spec.seed, "synth-gates"));

    SynthCircuit out;
    out.module_name = "synth_chains";

    std::string ports, decls, body;
    for (size_t j = 0; j < lengths.size(); ++j) {
        std::string cj = "c" + pad2(j);
        std::string clk = "clk" + pad2(j);
        std::string data = "data" + pad2(j);
        std::string outp = "out" + pad2(j);
        if (!ports.empty()) ports += ", ";
        ports += clk + ", " + data + ", " + outp;
        decls += "  input " + clk + ", " + data + ";\n";
        decls += "  output " + outp + ";\n";

        int len = lengths[j];
        std::vector<std::string> q_net(static_cast<size_t>(len) + 1);
        for (int i = 1; i <= len; ++i)
            q_net[static_cast<size_t>(i)] = i == len ? outp : cj + "_q" + pad2(static_cast<size_t>(i));

        std::string wires;
        std::string chain_body;
        std::string d_net = data;
        for (int i = 1; i <= len; ++i) {
            std::string q = q_net[static_cast<size_t>(i)];
            if (i < len) wires += (wires.empty() ? "" : ", ") + q;
            chain_body += "  DFF " + cj + "_ff" + pad2(static_cast<size_t>(i)) + " (.D(" + d_net +
                          "), .C(" + clk + "), .Q(" + q + "));\n";
            out.ff_distances.emplace_back(cj + "_ff" + pad2(static_cast<size_t>(i)), len - i);
            d_net = q;
            if (i < len && rng.next_double() < spec.gate_density) {
                std::string b = cj + "_b" + pad2(static_cast<size_t>(i));
                wires += ", " + b;
                const char* gate = rng.next_bool() ? "INV" : "BUF";
                chain_body += "  ";
                chain_body += gate;
                chain_body += " " + cj + "_g" + pad2(static_cast<size_t>(i)) + " (.A(" + q + "), .Y(" +
                              b + "));\n";
                d_net = b;
            }
        }
        if (!wires.empty()) decls += "  wire " + wires + ";\n";
        body += chain_body;
    }

    out.netlist_text = "module " + out.module_name + " (" + ports + ");\n" + decls + "\n" + body +
                       "endmodule\n";
    std::sort(out.ff_distances.begin(), out.ff_distances.end());
    return out;
}

} // namespace fdrkit

#include "fdrkit/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "fdrkit/error.hpp"
#include "fdrkit/rng.hpp"
#include "fdrkit/util.hpp"

namespace fdrkit {

void FaultPlan::validate() const {
    if (mode == Mode::Random && samples < 1)
        throw Error(Errc::invalid_params, "random fault plan needs samples >= 1");
}

std::string FdrTable::to_csv() const {
    std::string out = "ff_name,injections,failures,fdr\n";
    for (const FdrRow& row : rows) {
        out += row.ff;
        out += ',' + std::to_string(row.injections);
        out += ',' + std::to_string(row.failures);
        out += ',' + fmt_double(row.fdr);
        out += '\n';
    }
    return out;
}

FdrTable FdrTable::from_csv(std::string_view text) {
    FdrTable table;
    auto lines = split(text, '\n');
    if (lines.empty() || trim(lines[0]) != "ff_name,injections,failures,fdr")
        throw Error(Errc::io_error, "fdr csv: bad header");
    for (size_t li = 1; li < lines.size(); ++li) {
        std::string_view line = trim(lines[li]);
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != 4)
            throw Error(Errc::io_error, "fdr csv: row " + std::to_string(li) + " malformed");
        FdrRow row;
        row.ff = std::string(fields[0]);
        double fdr;
        if (!parse_u64(fields[1], row.injections) || !parse_u64(fields[2], row.failures) ||
            !parse_double(fields[3], fdr))
            throw Error(Errc::io_error, "fdr csv: bad numeric field in row " + std::to_string(li));
        row.fdr = fdr;
        table.rows.push_back(std::move(row));
    }
    return table;
}

const FdrRow* FdrTable::find(std::string_view ff_name) const {
    for (const FdrRow& row : rows)
        if (row.ff == ff_name) return &row;
    return nullptr;
}

FdrTable run_campaign(const Netlist& n, const Stimulus& s, const FaultPlan& plan, int jobs) {
    plan.validate();
    Simulator sim(n);
    SimTrace golden = sim.run_golden(s);

    // Resolve targets to flip-flop indices, keeping netlist FF order.
    std::vector<size_t> targets;
    if (plan.targets.empty()) {
        targets.resize(n.flip_flops.size());
        for (size_t i = 0; i < targets.size(); ++i) targets[i] = i;
    } else {
        for (const std::string& name : plan.targets) targets.push_back(sim.ff_index_of(name));
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    }

    std::vector<FdrRow> rows(targets.size());

    auto run_target = [&](size_t slot) {
        size_t ff = targets[slot];
        FdrRow& row = rows[slot];
        row.ff = n.instances[n.flip_flops[ff]].name;
        if (plan.mode == FaultPlan::Mode::Exhaustive) {
            row.injections = s.cycles;
            for (size_t c = 0; c < s.cycles; ++c)
                if (sim.inject_seu(s, golden, ff, c)) ++row.failures;
        } else {
            // per-flip-flop stream keeps results independent of scheduling
            Rng rng(derive_seed(plan.seed, static_cast<uint64_t>(ff), 0x66647263ull));
            row.injections = plan.samples;
            for (size_t k = 0; k < plan.samples; ++k) {
                size_t c = static_cast<size_t>(rng.next_below(s.cycles));
                if (sim.inject_seu(s, golden, ff, c)) ++row.failures;
            }
        }
        row.fdr = row.injections == 0
                      ? 0.0
                      : static_cast<double>(row.failures) / static_cast<double>(row.injections);
    };

    int workers = std::max(1, jobs);
    if (workers == 1 || targets.size() <= 1) {
        for (size_t slot = 0; slot < targets.size(); ++slot) run_target(slot);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    size_t slot = next.fetch_add(1);
                    if (slot >= targets.size()) return;
                    run_target(slot);
                }
            });
        for (auto& t : pool) t.join();
    }

    FdrTable table;
    table.rows = std::move(rows);
    return table;
}

} // namespace fdrkit

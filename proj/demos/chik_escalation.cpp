// Escalates the |chi_k> family: every truncation below d = k+1 sees only the
// product vector |0,0>/sqrt(2), so the partial transpose stays positive until
// the |k,k> component enters the window.

#include <cstdio>

#include "cvent/cvent.hpp"

int main() {
    using namespace cvent;
    for (std::size_t k = 1; k <= 5; ++k) {
        AnalyticFamily chik{Family::chik, k};
        EscalationConfig cfg;
        cfg.d_start = 1;
        cfg.d_max = 10;
        cfg.criteria = {Criterion::ppt};
        auto v = verify_escalating(chik, cfg);
        std::printf("k=%zu:", k);
        for (const auto& step : v.history)
            std::printf(" d=%zu(min_ev=%+.3f)", step.dims[0], step.results.front().detail_value("min_eigenvalue"));
        if (v.entangled()) std::printf("  -> entangled at d=%zu\n", v.as_entangled().dims[0]);
        else std::printf("  -> undecided\n");
    }
}
